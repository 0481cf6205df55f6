#include <doctest.h>

#include <random>

#include "lcner/decode.hpp"
#include "lcner/error.hpp"
#include "support/oracles.hpp"

using namespace lcner;
using namespace lcner::testing;

TEST_CASE("argmax_decode") {
  CHECK(argmax_decode(LogitsSequence::from_rows({{1, 2}, {3, 0}})) == LabelSequence{1, 0});
  CHECK(argmax_decode(LogitsSequence::from_rows({{0, 0, 0}})) == LabelSequence{0});
  CHECK(argmax_decode(LogitsSequence{}).empty());
  CHECK(argmax_decode(LogitsSequence::from_rows({{0, 9, 1}, {-5, 2, 1}, {3, 4, 3.9}})) ==
        LabelSequence{1, 1, 1});
}

TEST_CASE("LogitsSequence validates its buffer") {
  CHECK_THROWS_AS(LogitsSequence(2, 2, std::vector<double>{1, 2, 3}), InvalidInput);
  CHECK_THROWS_AS(LogitsSequence(1, 2, std::vector<double>{1, std::nan("")}), InvalidInput);
  CHECK_THROWS_AS(LogitsSequence::from_rows({{1, 2}, {3}}), InvalidInput);
}

TEST_CASE("lc_decode hand-worked example") {
  auto ls = build_label_set({"PER"});
  auto cm = build_constraint_matrix(ls);
  // B, M, E, S, O
  auto x = LogitsSequence::from_rows({{2.0, 0.1, 0.1, 0.5, 0.3}, {0.2, 0.4, 0.3, 1.5, 0.9}});
  CHECK(argmax_decode(x) == LabelSequence{0, 3});
  CHECK(lc_decode(x, cm) == LabelSequence{ls.at("B-PER"), ls.at("M-PER")});
}

TEST_CASE("lc_decode applies the start mask to the first token") {
  auto ls = build_label_set({"PER"});
  auto cm = build_constraint_matrix(ls);
  auto x = LogitsSequence::from_rows({{0.1, 5.0, 4.0, 0.3, 0.2}});
  CHECK(lc_decode(x, cm) == LabelSequence{ls.at("S-PER")});
}

TEST_CASE("lc_decode rejects mismatched dimensions") {
  auto cm = build_constraint_matrix(build_label_set({"PER"}));
  CHECK_THROWS_AS(lc_decode(LogitsSequence::from_rows({{1, 2, 3}}), cm), InvalidInput);
  CHECK_THROWS_AS(viterbi_decode(LogitsSequence::from_rows({{1, 2, 3}}), cm), InvalidInput);
}

TEST_CASE("lc_decode does not backtrack on an end-mask violation") {
  auto ls = build_label_set({"PER"});
  auto cm = build_constraint_matrix(ls);
  auto x = LogitsSequence::from_rows({{0, 0, 0, 0, 5}, {9, 0, 0, 0, 0}});
  auto y = lc_decode(x, cm);
  CHECK(y == LabelSequence{ls.outside(), ls.at("B-PER")});
  CHECK(is_valid_prefix(cm, y));
  CHECK_FALSE(is_valid_sequence(cm, y));
  CHECK(is_valid_sequence(cm, viterbi_decode(x, cm)));
}

TEST_CASE("lc_decode fuzz: output always respects transitions and start mask") {
  std::mt19937_64 rng(7);
  for (std::size_t types : {1, 3, 6}) {
    auto cm = build_constraint_matrix(build_label_set(type_names(types)));
    std::uniform_int_distribution<std::size_t> len(1, 40);
    for (int i = 0; i < 500; ++i) {
      auto x = random_logits(rng, len(rng), cm.size());
      CHECK(is_valid_prefix(cm, lc_decode(x, cm)));
    }
  }
}

TEST_CASE("lc_decode equals argmax when argmax is already well-formed") {
  std::mt19937_64 rng(11);
  auto cm = build_constraint_matrix(build_label_set(type_names(2)));
  int checked = 0;
  for (int i = 0; i < 4000; ++i) {
    auto x = random_logits(rng, 1 + i % 4, cm.size());
    auto a = argmax_decode(x);
    if (!is_valid_prefix(cm, a)) continue;
    ++checked;
    CHECK(lc_decode(x, cm) == a);
  }
  CHECK(checked > 50);
}

TEST_CASE("viterbi matches exhaustive enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  for (std::size_t types : {1, 2}) {
    auto cm = build_constraint_matrix(build_label_set(type_names(types)));
    for (int i = 0; i < 150; ++i) {
      auto x = random_logits(rng, len(rng), cm.size());
      TransitionScores s;
      if (i % 2) {
        auto p = random_crf(rng, cm.size());
        s = p.scores;
      }
      auto best = brute_force_best(x, cm, s);
      auto y = viterbi_decode(x, cm, s);
      CHECK(oracle_valid(cm, y));
      CHECK(oracle_path_score(x, y, s) == doctest::Approx(best.score).epsilon(1e-12));
    }
  }
}

TEST_CASE("viterbi breaks ties towards the lexicographically smallest path") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(-1, 1);
  auto cm = build_constraint_matrix(build_label_set({"PER"}));
  for (int i = 0; i < 300; ++i) {
    // Integer scores make ties common and exact.
    LogitsSequence x(1 + i % 4, cm.size());
    for (auto& v : x.data()) v = small(rng);
    CHECK(viterbi_decode(x, cm) == brute_force_best(x, cm).path);
  }
  LogitsSequence zeros(3, cm.size());
  CHECK(viterbi_decode(zeros, cm) == LabelSequence{0, 1, 2});
}

TEST_CASE("unconstrained viterbi with zero transitions equals argmax") {
  std::mt19937_64 rng(9);
  auto free = ConstraintMatrix::unconstrained(7);
  for (int i = 0; i < 200; ++i) {
    auto x = random_logits(rng, 1 + i % 12, 7);
    CHECK(viterbi_decode(x, free) == argmax_decode(x));
  }
}

TEST_CASE("viterbi follows a dominating valid path") {
  auto ls = build_label_set({"PER", "LOC"});
  auto cm = build_constraint_matrix(ls);
  LabelSequence target{ls.at("O"), ls.at("B-LOC"), ls.at("M-LOC"), ls.at("E-LOC"), ls.at("S-PER")};
  LogitsSequence x(target.size(), ls.size());
  for (std::size_t t = 0; t < target.size(); ++t) x(t, target[t]) = 10.0;
  CHECK(viterbi_decode(x, cm) == target);
}

TEST_CASE("global decoding is never worse than greedy") {
  std::mt19937_64 rng(21);
  auto cm = build_constraint_matrix(build_label_set(type_names(3)));
  for (int i = 0; i < 500; ++i) {
    auto x = random_logits(rng, 1 + i % 20, cm.size());
    auto g = lc_decode(x, cm);
    auto v = viterbi_decode(x, cm);
    CHECK(is_valid_sequence(cm, v));
    if (is_valid_sequence(cm, g)) CHECK(path_score(x, v) >= path_score(x, g));
  }
}

TEST_CASE("decoders are deterministic and batch decoding preserves order") {
  std::mt19937_64 rng(4);
  auto cm = build_constraint_matrix(build_label_set(type_names(2)));
  std::vector<LogitsSequence> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(random_logits(rng, 1 + i % 9, cm.size()));
  for (auto dec : {Decoder::Argmax, Decoder::Lc, Decoder::Viterbi}) {
    auto serial = decode_batch(batch, dec, cm, {}, 1);
    auto threaded = decode_batch(batch, dec, cm, {}, 4);
    CHECK(serial == threaded);
    CHECK(serial == decode_batch(batch, dec, cm, {}, 1));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (dec == Decoder::Lc) CHECK(serial[i] == lc_decode(batch[i], cm));
      if (dec == Decoder::Viterbi) CHECK(serial[i] == viterbi_decode(batch[i], cm));
    }
  }
}

TEST_CASE("path_score") {
  auto x = LogitsSequence::from_rows({{1, 2}, {3, 4}});
  TransitionScores s{{0.5, -1, 2, 0}, {10, 20}, {100, 200}};
  CHECK(path_score(x, LabelSequence{0, 1}, s) == doctest::Approx(1 + 4 - 1 + 10 + 200));
  CHECK(path_score(x, LabelSequence{1, 0}) == doctest::Approx(5));
  CHECK_THROWS_AS(path_score(x, LabelSequence{0}), InvalidInput);
}
