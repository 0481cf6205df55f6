#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lcner/corpus.hpp"
#include "lcner/decode.hpp"
#include "lcner/logits_io.hpp"
#include "lcner/synth.hpp"
#include "support/cli_harness.hpp"

using namespace lcner;
using namespace lcner::testing;

namespace {

std::size_t count_code_points(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

/// Stands in for an external model exporter: it knows nothing about the library and
/// writes the two interchange files by hand. Each token gets a noisy score row that
/// favours its gold label.
void stub_export(const std::vector<std::string>& label_names,
                 const std::vector<std::pair<std::string, std::vector<std::size_t>>>& sentences,
                 const std::string& vocab_path, const std::string& logits_path, std::uint64_t seed) {
  std::ofstream vocab(vocab_path);
  vocab << "scheme=BMES k=" << label_names.size() << '\n';
  for (const auto& name : label_names) vocab << name << '\n';

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::ofstream out(logits_path);
  for (const auto& [text, gold] : sentences) {
    nlohmann::json tokens = nlohmann::json::array(), rows = nlohmann::json::array();
    std::size_t t = 0;
    for (std::size_t i = 0; i < text.size();) {
      std::size_t len = 1;
      while (i + len < text.size() && (static_cast<unsigned char>(text[i + len]) & 0xC0) == 0x80) ++len;
      tokens.push_back(text.substr(i, len));
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t y = 0; y < label_names.size(); ++y) row.push_back(noise(rng) + (y == gold[t] ? 1.5 : 0.0));
      rows.push_back(row);
      i += len;
      ++t;
    }
    out << nlohmann::json{{"tokens", tokens}, {"logits", rows}}.dump() << '\n';
  }
}

}  // namespace

TEST_CASE("files from an external exporter decode end to end") {
  TempDir dir;
  SynthSpec spec;
  spec.entity_types = 3;
  spec.sentences = 100;
  const auto synth = synth_corpus(spec, 7);
  const auto& labels = synth.labels;

  std::vector<std::string> names;
  for (LabelId y = 0; y < labels.size(); ++y) names.push_back(labels.name(y));
  std::vector<std::pair<std::string, std::vector<std::size_t>>> exported;
  for (const auto& s : synth.sentences) {
    std::string text;
    for (const auto& tok : s.tokens) text += tok;
    exported.push_back({text, {s.gold->begin(), s.gold->end()}});
  }
  stub_export(names, exported, dir / "vocab.txt", dir / "logits.jsonl", 3);

  SUBCASE("the vocabulary file round-trips to the same label set") {
    const auto read = read_vocabulary_file(dir / "vocab.txt");
    CHECK(read == labels);
    CHECK(read.fingerprint_hex() == labels.fingerprint_hex());
  }

  SUBCASE("one logits row per character") {
    const auto recs = read_logits_file(dir / "logits.jsonl", labels.size());
    REQUIRE(recs.size() == exported.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(recs[i].logits.tokens() == count_code_points(exported[i].first));
      CHECK(recs[i].tokens == synth.sentences[i].tokens);
    }
  }

  SUBCASE("CLI decoding agrees with the library and scores against gold") {
    const auto recs = read_logits_file(dir / "logits.jsonl", labels.size());
    const auto cm = build_constraint_matrix(labels);
    auto r = run_cli({"decode", "--labels", dir / "vocab.txt", "--logits", dir / "logits.jsonl", "-o",
                      dir / "pred.txt"});
    REQUIRE(r.code == 0);
    const auto pred = read_corpus_file(dir / "pred.txt", labels);
    REQUIRE(pred.size() == recs.size());
    std::vector<LabelSequence> seqs;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      CHECK(*pred[i].gold == lc_decode(recs[i].logits, cm));
      seqs.push_back(*pred[i].gold);
    }

    write_corpus_file(dir / "gold.txt", synth.sentences, labels);
    auto sc = run_cli({"score", "--gold", dir / "gold.txt", "--pred", dir / "pred.txt", "--labels",
                       dir / "vocab.txt"});
    REQUIRE(sc.code == 0);
    const double f1 = nlohmann::json::parse(sc.out).at("f1").get<double>();
    CHECK(f1 == doctest::Approx(score(labels, synth.sentences, seqs).f1).epsilon(1e-12));
    CHECK(f1 > 0.0);
  }

  SUBCASE("a logits file with the wrong width is rejected") {
    write_vocabulary_file(dir / "small.txt", build_label_set({"PER"}));
    auto r = run_cli({"decode", "--labels", dir / "small.txt", "--logits", dir / "logits.jsonl"});
    CHECK(r.code == cli::kExitIo);
    CHECK(r.err.find("line 1") != std::string::npos);
  }
}
