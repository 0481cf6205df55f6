#include "lcner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "lcner/error.hpp"

namespace lcner {

std::vector<Sentence> read_corpus(std::istream& in, const LabelSet& labels) {
  std::vector<Sentence> out;
  Sentence current;
  current.gold.emplace();
  auto flush = [&] {
    if (current.tokens.empty()) return;
    out.push_back(std::move(current));
    current = Sentence{};
    current.gold.emplace();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos)
      throw InvalidInput("corpus line " + std::to_string(line_no) +
                         ": expected '<token>\\t<label>'");
    const std::string label = line.substr(tab + 1);
    const auto id = labels.find(label);
    if (!id)
      throw InvalidInput("corpus line " + std::to_string(line_no) + ": unknown label '" + label + "'");
    current.tokens.push_back(line.substr(0, tab));
    current.gold->push_back(*id);
  }
  flush();
  return out;
}

std::vector<Sentence> read_corpus_file(const std::string& path, const LabelSet& labels) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  try {
    return read_corpus(in, labels);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, std::span<const Sentence> sentences, const LabelSet& labels,
                  std::span<const LabelSequence> predictions) {
  if (!predictions.empty() && predictions.size() != sentences.size())
    throw InvalidInput("prediction count differs from sentence count");
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    const LabelSequence* seq = nullptr;
    if (!predictions.empty()) seq = &predictions[i];
    else if (s.gold) seq = &*s.gold;
    if (!seq) throw InvalidInput("sentence " + std::to_string(i) + " has no labels to write");
    if (seq->size() != s.tokens.size())
      throw InvalidInput("sentence " + std::to_string(i) + ": label count differs from token count");
    for (std::size_t t = 0; t < s.tokens.size(); ++t)
      out << s.tokens[t] << '\t' << labels.name((*seq)[t]) << '\n';
    out << '\n';
  }
}

void write_corpus_file(const std::string& path, std::span<const Sentence> sentences,
                       const LabelSet& labels, std::span<const LabelSequence> predictions) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_corpus(out, sentences, labels, predictions);
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<EntitySpan> extract_entities(const LabelSet& labels, std::span<const LabelId> seq) {
  std::vector<EntitySpan> spans;
  std::size_t t = 0;
  while (t < seq.size()) {
    const Label& head = labels.label(seq[t]);
    if (head.tag == PositionTag::S) {
      spans.push_back({head.type, t, t});
      ++t;
      continue;
    }
    if (head.tag != PositionTag::B) {
      ++t;
      continue;
    }
    std::size_t j = t + 1;
    while (j < seq.size()) {
      const Label& l = labels.label(seq[j]);
      if (l.type != head.type || (l.tag != PositionTag::M && l.tag != PositionTag::E)) break;
      if (l.tag == PositionTag::E) break;
      ++j;
    }
    if (j < seq.size()) {
      const Label& l = labels.label(seq[j]);
      if (l.tag == PositionTag::E && l.type == head.type) {
        spans.push_back({head.type, t, j});
        t = j + 1;
        continue;
      }
    }
    // Broken run: resume at the token that broke it so it may open its own entity.
    t = j;
  }
  return spans;
}

LabelSequence encode_entities(const LabelSet& labels, std::size_t length,
                              std::span<const EntitySpan> spans) {
  LabelSequence seq(length, labels.outside());
  std::vector<std::uint8_t> used(length, 0);
  for (const auto& span : spans) {
    if (span.start > span.end || span.end >= length)
      throw InvalidInput("entity span [" + std::to_string(span.start) + ", " +
                         std::to_string(span.end) + "] outside sentence of length " +
                         std::to_string(length));
    for (std::size_t t = span.start; t <= span.end; ++t) {
      if (used[t]) throw InvalidInput("overlapping entity spans at token " + std::to_string(t));
      used[t] = 1;
    }
    if (span.start == span.end) {
      seq[span.start] = labels.id(PositionTag::S, span.type);
      continue;
    }
    seq[span.start] = labels.id(PositionTag::B, span.type);
    for (std::size_t t = span.start + 1; t < span.end; ++t) seq[t] = labels.id(PositionTag::M, span.type);
    seq[span.end] = labels.id(PositionTag::E, span.type);
  }
  return seq;
}

double PrfCounts::precision() const {
  return predicted == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(predicted);
}

double PrfCounts::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gold);
}

double PrfCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ScoreReport score(const LabelSet& labels, std::span<const Sentence> gold,
                  std::span<const LabelSequence> predictions) {
  if (gold.size() != predictions.size())
    throw InvalidInput("score: " + std::to_string(gold.size()) + " gold sentences but " +
                       std::to_string(predictions.size()) + " predictions");
  ScoreReport report;
  for (const auto& type : labels.entity_types()) report.per_type[type];

  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].gold) throw InvalidInput("score: sentence " + std::to_string(i) + " has no gold labels");
    if (gold[i].gold->size() != predictions[i].size())
      throw InvalidInput("score: sentence " + std::to_string(i) + " has " +
                         std::to_string(gold[i].gold->size()) + " gold labels but " +
                         std::to_string(predictions[i].size()) + " predicted");
    auto g = extract_entities(labels, *gold[i].gold);
    auto p = extract_entities(labels, predictions[i]);
    for (const auto& s : g) ++report.per_type[s.type].gold;
    for (const auto& s : p) ++report.per_type[s.type].predicted;
    // Both lists are sorted by start and non-overlapping, so a merge finds exact matches.
    std::size_t a = 0, b = 0;
    while (a < g.size() && b < p.size()) {
      if (g[a] == p[b]) {
        ++report.per_type[g[a].type].matched;
        ++a;
        ++b;
      } else if (g[a].start < p[b].start || (g[a].start == p[b].start && g[a].end < p[b].end)) {
        ++a;
      } else {
        ++b;
      }
    }
  }
  for (const auto& [type, c] : report.per_type) {
    report.totals.matched += c.matched;
    report.totals.predicted += c.predicted;
    report.totals.gold += c.gold;
  }
  report.precision = report.totals.precision();
  report.recall = report.totals.recall();
  report.f1 = report.totals.f1();
  return report;
}

std::string score_report_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["matched"] = report.totals.matched;
  j["predicted"] = report.totals.predicted;
  j["gold"] = report.totals.gold;
  auto& per = j["per_type"] = nlohmann::ordered_json::object();
  for (const auto& [type, c] : report.per_type) {
    per[type] = {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
                 {"matched", c.matched},       {"predicted", c.predicted}, {"gold", c.gold}};
  }
  return j.dump(2);
}

RelabelResult relabel_subset(std::span<const Sentence> sentences, const LabelSet& source,
                             const LabelSet& target,
                             const std::map<std::string, std::optional<std::string>>& mapping) {
  for (const auto& type : source.entity_types()) {
    auto it = mapping.find(type);
    if (it == mapping.end()) throw InvalidInput("relabel: no mapping for source type '" + type + "'");
    if (it->second && !target.has_type(*it->second))
      throw InvalidInput("relabel: target type '" + *it->second + "' not in target label set");
  }

  RelabelResult result;
  result.sentences.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    if (!s.gold) throw InvalidInput("relabel: sentence " + std::to_string(i) + " has no gold labels");
    std::vector<EntitySpan> kept;
    for (auto span : extract_entities(source, *s.gold)) {
      const auto& to = mapping.at(span.type);
      if (!to) {
        ++result.stats.dropped_spans;
        continue;
      }
      span.type = *to;
      kept.push_back(std::move(span));
      ++result.stats.kept_spans;
    }
    Sentence out{s.tokens, encode_entities(target, s.tokens.size(), kept)};
    result.sentences.push_back(std::move(out));
  }
  result.stats.sentences = result.sentences.size();
  result.stats.target_labels = target.size();
  return result;
}

}  // namespace lcner
