#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcner {

using LabelId = std::uint32_t;

/// A decoded label sequence; each entry indexes into a LabelSet.
using LabelSequence = std::vector<LabelId>;

enum class PositionTag : std::uint8_t { B, M, E, S, O };

enum class Scheme : std::uint8_t { BMES };

char tag_char(PositionTag tag);
std::string_view scheme_name(Scheme scheme);

struct Label {
  PositionTag tag = PositionTag::O;
  std::string type;  // empty for O

  std::string name() const;
  friend bool operator==(const Label&, const Label&) = default;
};

/// Entity types crossed with BMES position tags, plus a single trailing O.
///
/// Ordering is fixed: for each entity type in input order the labels B, M, E, S
/// are emitted, and O comes last. Immutable after construction.
class LabelSet {
 public:
  LabelSet(std::vector<std::string> entity_types, Scheme scheme = Scheme::BMES);

  std::size_t size() const noexcept { return labels_.size(); }
  Scheme scheme() const noexcept { return scheme_; }
  const std::vector<std::string>& entity_types() const noexcept { return entity_types_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  const Label& label(LabelId id) const;
  std::string name(LabelId id) const { return label(id).name(); }
  PositionTag tag(LabelId id) const { return label(id).tag; }

  LabelId outside() const noexcept { return static_cast<LabelId>(labels_.size() - 1); }
  LabelId id(PositionTag tag, std::string_view type) const;
  std::optional<LabelId> find(std::string_view name) const;
  /// Throws InvalidInput for unknown names.
  LabelId at(std::string_view name) const;

  bool has_type(std::string_view type) const;

  /// FNV-1a over the newline-joined label names; identifies the vocabulary.
  std::uint64_t fingerprint() const;
  std::string fingerprint_hex() const;

  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.scheme_ == b.scheme_ && a.entity_types_ == b.entity_types_;
  }

 private:
  Scheme scheme_;
  std::vector<std::string> entity_types_;
  std::vector<Label> labels_;
  std::unordered_map<std::string, LabelId> by_name_;
};

LabelSet build_label_set(std::vector<std::string> entity_types, Scheme scheme = Scheme::BMES);

/// Valid-transition structure of a tagging scheme over one LabelSet.
class ConstraintMatrix {
 public:
  ConstraintMatrix(std::size_t k, std::vector<std::uint8_t> allow,
                   std::vector<std::uint8_t> start_allow, std::vector<std::uint8_t> end_allow);

  /// Every transition, start and end permitted.
  static ConstraintMatrix unconstrained(std::size_t k);

  std::size_t size() const noexcept { return k_; }
  bool allowed(LabelId from, LabelId to) const { return allow_[from * k_ + to] != 0; }
  bool start_allowed(LabelId y) const { return start_allow_[y] != 0; }
  bool end_allowed(LabelId y) const { return end_allow_[y] != 0; }

  /// Row `from` of the matrix: 1 where the successor is valid.
  std::span<const std::uint8_t> row(LabelId from) const {
    return {allow_.data() + from * k_, k_};
  }
  std::span<const std::uint8_t> start_mask() const { return start_allow_; }
  std::span<const std::uint8_t> end_mask() const { return end_allow_; }

  std::size_t count_allowed() const;

 private:
  std::size_t k_;
  std::vector<std::uint8_t> allow_;
  std::vector<std::uint8_t> start_allow_;
  std::vector<std::uint8_t> end_allow_;
};

ConstraintMatrix build_constraint_matrix(const LabelSet& labels);

/// Closed form for the number of allowed BMES transitions with `types` entity types.
constexpr std::size_t bmes_allowed_count(std::size_t types) {
  return 4 * types * types + 8 * types + 1;
}

/// Empty sequences are valid. Throws InvalidInput on out-of-range indices.
bool is_valid_sequence(const ConstraintMatrix& cm, std::span<const LabelId> seq);

/// Like is_valid_sequence but ignores the end mask (what greedy decoding guarantees).
bool is_valid_prefix(const ConstraintMatrix& cm, std::span<const LabelId> seq);

// Vocabulary file: header `scheme=BMES k=<int>`, then one label name per line.
void write_vocabulary(std::ostream& out, const LabelSet& labels);
void write_vocabulary_file(const std::string& path, const LabelSet& labels);
LabelSet read_vocabulary(std::istream& in);
LabelSet read_vocabulary_file(const std::string& path);

}  // namespace lcner
