#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcner/labelspace.hpp"

namespace lcner {

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<LabelSequence> gold;

  std::size_t size() const noexcept { return tokens.size(); }
};

/// Typed token span, both ends inclusive.
struct EntitySpan {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Two-column corpus: `token<TAB>label`, blank line between sentences.
/// Labels are not checked against the tagging grammar.
std::vector<Sentence> read_corpus(std::istream& in, const LabelSet& labels);
std::vector<Sentence> read_corpus_file(const std::string& path, const LabelSet& labels);

/// Writes `predictions[i]` for each sentence, or its gold labels when `predictions` is empty.
void write_corpus(std::ostream& out, std::span<const Sentence> sentences, const LabelSet& labels,
                  std::span<const LabelSequence> predictions = {});
void write_corpus_file(const std::string& path, std::span<const Sentence> sentences,
                       const LabelSet& labels, std::span<const LabelSequence> predictions = {});

/// Well-formed B M* E runs of a single type and S singletons, sorted by start.
/// Malformed fragments are dropped.
std::vector<EntitySpan> extract_entities(const LabelSet& labels, std::span<const LabelId> seq);

/// Inverse of extract_entities for non-overlapping spans; other tokens become O.
LabelSequence encode_entities(const LabelSet& labels, std::size_t length,
                              std::span<const EntitySpan> spans);

struct PrfCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  PrfCounts totals;
  std::map<std::string, PrfCounts> per_type;
};

/// Strict entity-level scoring: a predicted span counts only on an exact
/// (type, start, end) match.
ScoreReport score(const LabelSet& labels, std::span<const Sentence> gold,
                  std::span<const LabelSequence> predictions);

/// JSON document {precision, recall, f1, per_type:{type:{precision,recall,f1,...}}}.
std::string score_report_json(const ScoreReport& report);

struct RelabelStats {
  std::size_t sentences = 0;
  std::size_t kept_spans = 0;
  std::size_t dropped_spans = 0;
  std::size_t target_labels = 0;
};

struct RelabelResult {
  std::vector<Sentence> sentences;
  RelabelStats stats;
};

/// Maps each source entity type to a target type, or to nullopt to drop it (its tokens
/// become O). Every source type must appear in `mapping`.
RelabelResult relabel_subset(std::span<const Sentence> sentences, const LabelSet& source,
                             const LabelSet& target,
                             const std::map<std::string, std::optional<std::string>>& mapping);

}  // namespace lcner
