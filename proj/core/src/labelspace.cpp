#include "lcner/labelspace.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "lcner/error.hpp"

namespace lcner {

char tag_char(PositionTag tag) {
  switch (tag) {
    case PositionTag::B: return 'B';
    case PositionTag::M: return 'M';
    case PositionTag::E: return 'E';
    case PositionTag::S: return 'S';
    case PositionTag::O: return 'O';
  }
  return '?';
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::BMES: return "BMES";
  }
  return "?";
}

std::string Label::name() const {
  if (tag == PositionTag::O) return "O";
  std::string out;
  out.reserve(type.size() + 2);
  out.push_back(tag_char(tag));
  out.push_back('-');
  out += type;
  return out;
}

LabelSet::LabelSet(std::vector<std::string> entity_types, Scheme scheme)
    : scheme_(scheme), entity_types_(std::move(entity_types)) {
  if (entity_types_.empty()) throw InvalidInput("label set needs at least one entity type");
  std::unordered_set<std::string> seen;
  for (const auto& type : entity_types_) {
    if (type.empty()) throw InvalidInput("entity type names must be non-empty");
    if (type.find_first_of(" \t\r\n") != std::string::npos)
      throw InvalidInput("entity type '" + type + "' contains whitespace");
    if (!seen.insert(type).second) throw InvalidInput("duplicate entity type '" + type + "'");
  }

  constexpr PositionTag kEntityTags[] = {PositionTag::B, PositionTag::M, PositionTag::E,
                                         PositionTag::S};
  labels_.reserve(4 * entity_types_.size() + 1);
  for (const auto& type : entity_types_)
    for (PositionTag tag : kEntityTags) labels_.push_back({tag, type});
  labels_.push_back({PositionTag::O, {}});

  for (std::size_t i = 0; i < labels_.size(); ++i)
    by_name_.emplace(labels_[i].name(), static_cast<LabelId>(i));
}

const Label& LabelSet::label(LabelId id) const {
  if (id >= labels_.size())
    throw InvalidInput("label index " + std::to_string(id) + " out of range [0, " +
                       std::to_string(labels_.size()) + ")");
  return labels_[id];
}

LabelId LabelSet::id(PositionTag tag, std::string_view type) const {
  if (tag == PositionTag::O) return outside();
  for (std::size_t t = 0; t < entity_types_.size(); ++t) {
    if (entity_types_[t] == type) return static_cast<LabelId>(4 * t + static_cast<std::size_t>(tag));
  }
  throw InvalidInput("unknown entity type '" + std::string(type) + "'");
}

std::optional<LabelId> LabelSet::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelSet::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw InvalidInput("unknown label '" + std::string(name) + "'");
}

bool LabelSet::has_type(std::string_view type) const {
  for (const auto& t : entity_types_)
    if (t == type) return true;
  return false;
}

std::uint64_t LabelSet::fingerprint() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (char c : scheme_name(scheme_)) mix(static_cast<unsigned char>(c));
  for (const auto& label : labels_) {
    mix('\n');
    for (char c : label.name()) mix(static_cast<unsigned char>(c));
  }
  return h;
}

std::string LabelSet::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint()));
  return buf;
}

LabelSet build_label_set(std::vector<std::string> entity_types, Scheme scheme) {
  return LabelSet(std::move(entity_types), scheme);
}

ConstraintMatrix::ConstraintMatrix(std::size_t k, std::vector<std::uint8_t> allow,
                                   std::vector<std::uint8_t> start_allow,
                                   std::vector<std::uint8_t> end_allow)
    : k_(k), allow_(std::move(allow)), start_allow_(std::move(start_allow)),
      end_allow_(std::move(end_allow)) {
  if (k_ == 0) throw InvalidInput("constraint matrix needs k >= 1");
  if (allow_.size() != k_ * k_ || start_allow_.size() != k_ || end_allow_.size() != k_)
    throw InvalidInput("constraint matrix dimensions disagree with k");
  for (std::size_t p = 0; p < k_; ++p) {
    bool has_succ = false, has_pred = false;
    for (std::size_t q = 0; q < k_; ++q) {
      has_succ |= allow_[p * k_ + q] != 0;
      has_pred |= allow_[q * k_ + p] != 0;
    }
    if (!has_succ || !has_pred)
      throw InvalidInput("constraint matrix has a dead state at label " + std::to_string(p));
  }
}

ConstraintMatrix ConstraintMatrix::unconstrained(std::size_t k) {
  return ConstraintMatrix(k, std::vector<std::uint8_t>(k * k, 1), std::vector<std::uint8_t>(k, 1),
                          std::vector<std::uint8_t>(k, 1));
}

std::size_t ConstraintMatrix::count_allowed() const {
  std::size_t n = 0;
  for (auto v : allow_) n += v != 0;
  return n;
}

namespace {

// Whether `to` may follow `from` under BMES; type equality matters only inside an entity.
bool bmes_transition(const Label& from, const Label& to) {
  switch (from.tag) {
    case PositionTag::B:
    case PositionTag::M:
      return (to.tag == PositionTag::M || to.tag == PositionTag::E) && to.type == from.type;
    case PositionTag::E:
    case PositionTag::S:
    case PositionTag::O:
      return to.tag == PositionTag::B || to.tag == PositionTag::S || to.tag == PositionTag::O;
  }
  return false;
}

bool opens(PositionTag t) {
  return t == PositionTag::B || t == PositionTag::S || t == PositionTag::O;
}

bool closes(PositionTag t) {
  return t == PositionTag::E || t == PositionTag::S || t == PositionTag::O;
}

}  // namespace

ConstraintMatrix build_constraint_matrix(const LabelSet& labels) {
  const std::size_t k = labels.size();
  std::vector<std::uint8_t> allow(k * k), start(k), end(k);
  const auto& ls = labels.labels();
  for (std::size_t p = 0; p < k; ++p) {
    start[p] = opens(ls[p].tag);
    end[p] = closes(ls[p].tag);
    for (std::size_t q = 0; q < k; ++q) allow[p * k + q] = bmes_transition(ls[p], ls[q]);
  }
  return ConstraintMatrix(k, std::move(allow), std::move(start), std::move(end));
}

namespace {

void check_range(const ConstraintMatrix& cm, std::span<const LabelId> seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= cm.size())
      throw InvalidInput("label index " + std::to_string(seq[i]) + " at position " +
                         std::to_string(i) + " out of range");
  }
}

}  // namespace

bool is_valid_prefix(const ConstraintMatrix& cm, std::span<const LabelId> seq) {
  check_range(cm, seq);
  if (seq.empty()) return true;
  if (!cm.start_allowed(seq.front())) return false;
  for (std::size_t t = 1; t < seq.size(); ++t)
    if (!cm.allowed(seq[t - 1], seq[t])) return false;
  return true;
}

bool is_valid_sequence(const ConstraintMatrix& cm, std::span<const LabelId> seq) {
  if (!is_valid_prefix(cm, seq)) return false;
  return seq.empty() || cm.end_allowed(seq.back());
}

void write_vocabulary(std::ostream& out, const LabelSet& labels) {
  out << "scheme=" << scheme_name(labels.scheme()) << " k=" << labels.size() << '\n';
  for (const auto& label : labels.labels()) out << label.name() << '\n';
}

void write_vocabulary_file(const std::string& path, const LabelSet& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_vocabulary(out, labels);
  if (!out) throw IoError("failed writing '" + path + "'");
}

LabelSet read_vocabulary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidInput("vocabulary: missing header line");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::istringstream hs(header);
  std::string scheme_field, k_field, extra;
  hs >> scheme_field >> k_field;
  if (scheme_field != "scheme=BMES" || k_field.rfind("k=", 0) != 0 || (hs >> extra))
    throw InvalidInput("vocabulary: header must be 'scheme=BMES k=<int>', got '" + header + "'");
  std::size_t k = 0;
  try {
    std::size_t used = 0;
    k = std::stoul(k_field.substr(2), &used);
    if (used != k_field.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidInput("vocabulary: bad k in header '" + header + "'");
  }

  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  if (names.size() != k)
    throw InvalidInput("vocabulary: header declares k=" + std::to_string(k) + " but lists " +
                       std::to_string(names.size()) + " labels");
  if (k < 5 || (k - 1) % 4 != 0)
    throw InvalidInput("vocabulary: k=" + std::to_string(k) + " is not 4T+1");

  std::vector<std::string> types;
  for (std::size_t i = 0; i + 1 < names.size(); i += 4) {
    const auto& b = names[i];
    if (b.size() < 3 || b.rfind("B-", 0) != 0)
      throw InvalidInput("vocabulary: expected a B- label at line " + std::to_string(i + 2));
    types.push_back(b.substr(2));
  }
  LabelSet labels(std::move(types));
  for (std::size_t i = 0; i < k; ++i) {
    if (labels.name(static_cast<LabelId>(i)) != names[i])
      throw InvalidInput("vocabulary: label '" + names[i] + "' at line " + std::to_string(i + 2) +
                         " breaks the canonical B,M,E,S per type then O ordering");
  }
  return labels;
}

LabelSet read_vocabulary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  return read_vocabulary(in);
}

}  // namespace lcner
