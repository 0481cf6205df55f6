// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcner/advisor.hpp"
#include "lcner/cli.hpp"
#include "lcner/crf.hpp"
#include "lcner/decode.hpp"
#include "lcner/emission.hpp"
#include "lcner/labelspace.hpp"
#include "lcner/segment.hpp"
#include "support/oracles.hpp"
#include "support/segmentation.hpp"

using namespace lcner;
using namespace lcner::testing;

namespace {

// Pinned tolerances and budgets.
constexpr double kCountBudgetSeconds = 1.0;
constexpr std::size_t kFuzzSequences = 100000;
constexpr std::size_t kFuzzMaxLength = 50;
constexpr double kFuzzBudgetSeconds = 30.0;
constexpr std::size_t kViterbiInstances = 1000;
constexpr double kViterbiScoreTolerance = 1e-9;  // relative
constexpr std::size_t kPartitionInstances = 1000;
constexpr double kPartitionTolerance = 1e-8;  // relative
constexpr std::size_t kGradientInstances = 100;
constexpr double kFiniteDifferenceStep = 1e-4;
constexpr double kGradientTolerance = 1e-5;  // absolute
constexpr double kAdvisorStep = 1e-6;
constexpr double kAdvisorGradientTolerance = 1e-6;  // relative
constexpr double kGridBudgetSeconds = 300.0;
constexpr std::size_t kSegmentationFuzz = 10000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict constraint_counts() {
  const auto start = Clock::now();
  const std::size_t t6 = build_constraint_matrix(build_label_set(type_names(6))).count_allowed();
  const std::size_t t3 = build_constraint_matrix(build_label_set(type_names(3))).count_allowed();
  bool closed_form = true;
  for (std::size_t t = 1; t <= 10; ++t)
    closed_form = closed_form &&
                  build_constraint_matrix(build_label_set(type_names(t))).count_allowed() == 4 * t * t + 8 * t + 1;
  const double secs = seconds_since(start);
  return {t6 == 193 && t3 == 103 && closed_form && secs < kCountBudgetSeconds,
          fmt("T=6 -> %zu (want 193), T=3 -> %zu (want 103), closed form T=1..10 %s, %.3fs", t6, t3,
              closed_form ? "holds" : "broken", secs)};
}

Verdict label_inventory() {
  const std::size_t k9 = build_label_set(type_names(9)).size();
  const std::size_t k3 = build_label_set(type_names(3)).size();
  return {k9 == 37 && k3 == 13, fmt("9 types -> k=%zu (want 37), 3 types -> k=%zu (want 13)", k9, k3)};
}

/// Adjacent-transition and start checks written against label names, not the matrix.
bool name_valid_prefix(const std::vector<std::string>& names, const LabelSequence& y) {
  if (y.empty()) return true;
  const char first = names[y.front()][0];
  if (first != 'B' && first != 'S' && first != 'O') return false;
  for (std::size_t t = 1; t < y.size(); ++t)
    if (!bmes_rule(names[y[t - 1]], names[y[t]])) return false;
  return true;
}

Verdict validity_fuzz() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  struct Space {
    ConstraintMatrix cm;
    std::vector<std::string> names;
  };
  std::vector<Space> spaces;
  for (std::size_t types : {1, 3, 6}) {
    auto ls = build_label_set(type_names(types));
    spaces.push_back({build_constraint_matrix(ls), bmes_names(type_names(types))});
  }
  std::size_t lc_bad = 0, argmax_bad = 0;
  for (std::size_t i = 0; i < kFuzzSequences; ++i) {
    const auto& sp = spaces[i % spaces.size()];
    const std::size_t n = 1 + rng() % kFuzzMaxLength;
    const auto x = random_logits(rng, n, sp.cm.size());
    lc_bad += !name_valid_prefix(sp.names, lc_decode(x, sp.cm));
    argmax_bad += !name_valid_prefix(sp.names, argmax_decode(x));
  }
  const double secs = seconds_since(start);
  return {lc_bad == 0 && argmax_bad > 0 && secs < kFuzzBudgetSeconds,
          fmt("%zu sequences, k in {5,13,25}: lc invalid %zu, argmax invalid %zu (%.1f%%), %.2fs", kFuzzSequences,
              lc_bad, argmax_bad, 100.0 * static_cast<double>(argmax_bad) / kFuzzSequences, secs)};
}

Verdict viterbi_oracle() {
  std::mt19937_64 rng(1002);
  const ConstraintMatrix cms[] = {build_constraint_matrix(build_label_set(type_names(1))),
                                  build_constraint_matrix(build_label_set(type_names(2)))};
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kViterbiInstances; ++i) {
    const auto& cm = cms[i % 2];
    const std::size_t n = 1 + rng() % 6;
    const auto x = random_logits(rng, n, cm.size());
    TransitionScores s;
    if (i % 3 != 0) s = random_crf(rng, cm.size()).scores;
    const auto got = viterbi_decode(x, cm, s);
    const auto best = brute_force_best(x, cm, s);
    const double diff = std::abs(oracle_path_score(x, got, s) - best.score) / std::max(1.0, std::abs(best.score));
    worst = std::max(worst, diff);
    mismatches += !oracle_valid(cm, got) || diff > kViterbiScoreTolerance;
  }
  return {mismatches == 0, fmt("%zu instances, n<=6, k in {5,9}: %zu mismatches, worst relative gap %.2e",
                               kViterbiInstances, mismatches, worst)};
}

Verdict partition_oracle() {
  std::mt19937_64 rng(1003);
  std::size_t misses = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kPartitionInstances; ++i) {
    const std::size_t n = 1 + rng() % 5, k = 1 + rng() % 6;
    const auto x = random_logits(rng, n, k);
    const auto p = random_crf(rng, k);
    const double want = brute_force_log_partition(x, p);
    const double rel = std::abs(log_partition(x, p) - want) / std::max(std::abs(want), 1e-300);
    worst = std::max(worst, rel);
    misses += rel > kPartitionTolerance;
  }
  return {misses == 0, fmt("%zu instances, n<=5, k<=6: %zu beyond %.0e, worst relative error %.2e",
                           kPartitionInstances, misses, kPartitionTolerance, worst)};
}

Verdict crf_gradients() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kGradientInstances; ++trial) {
    const std::size_t k = 2 + rng() % 4;
    std::vector<LogitsSequence> xs;
    std::vector<LabelSequence> ys;
    for (int b = 0; b < 2; ++b) {
      const std::size_t n = 1 + rng() % 4;
      xs.push_back(random_logits(rng, n, k));
      ys.push_back(random_path(rng, n, k));
    }
    auto p = random_crf(rng, k);
    std::vector<CrfExample> batch;
    for (std::size_t i = 0; i < xs.size(); ++i) batch.push_back({&xs[i], &ys[i]});
    const auto g = nll_and_gradient(batch, p);
    auto f = [&] { return nll_and_gradient(batch, p).nll; };
    auto probe = [&](double& coord, double analytic) {
      worst = std::max(worst, std::abs(central_difference(f, coord, kFiniteDifferenceStep) - analytic));
    };
    for (std::size_t i = 0; i < k * k; ++i) probe(p.scores.transitions[i], g.transitions[i]);
    for (std::size_t i = 0; i < k; ++i) {
      probe(p.scores.start[i], g.start[i]);
      probe(p.scores.end[i], g.end[i]);
    }
    for (std::size_t b = 0; b < xs.size(); ++b)
      for (std::size_t i = 0; i < xs[b].data().size(); ++i) probe(xs[b].data()[i], g.logits[b].data()[i]);
  }
  return {worst <= kGradientTolerance,
          fmt("%zu instances: worst absolute gap %.2e (limit %.0e)", kGradientInstances, worst, kGradientTolerance)};
}

Verdict emission_gradients() {
  std::mt19937_64 rng(1005);
  std::normal_distribution<double> d(0.0, 0.5);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kGradientInstances; ++trial) {
    const std::size_t k = 2 + rng() % 4, dim = 6 + rng() % 6;
    LinearProjection proj(k, dim);
    for (std::size_t f = 0; f < dim; ++f)
      for (auto& w : proj.feature_row(f)) w = d(rng);
    for (auto& b : proj.bias()) b = d(rng);
    std::vector<EncodedSentence> batch(2);
    for (auto& s : batch) {
      const std::size_t n = 1 + rng() % 4;
      for (std::size_t t = 0; t < n; ++t) {
        SparseFeatures feats;
        for (std::uint32_t idx = 0; idx < dim; ++idx)
          if (rng() % 3 == 0) feats.push_back({idx, 1.0 + d(rng)});
        s.features.push_back(std::move(feats));
      }
      s.gold = random_path(rng, n, k);
    }
    const auto g = emission_loss_and_gradient(batch, proj);
    auto f = [&] { return emission_loss_and_gradient(batch, proj).loss; };
    for (std::size_t feat = 0; feat < dim; ++feat)
      for (std::size_t y = 0; y < k; ++y)
        worst = std::max(worst, std::abs(central_difference(f, proj.weight(y, feat), kFiniteDifferenceStep) -
                                         g.grad.weight(y, feat)));
    for (std::size_t y = 0; y < k; ++y)
      worst = std::max(worst, std::abs(central_difference(f, proj.bias()[y], kFiniteDifferenceStep) - g.grad.bias()[y]));
  }
  return {worst <= kGradientTolerance,
          fmt("%zu instances: worst absolute gap %.2e (limit %.0e)", kGradientInstances, worst, kGradientTolerance)};
}

Verdict advisor_gradients() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> delta(-0.05, 0.05), alpha(0.01, 1.0), beta(1.0, 3.0);
  std::uniform_int_distribution<std::uint64_t> labels(5, 40), sentences(100, 20000);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kGradientInstances; ++trial) {
    std::vector<advisor::Observation> obs;
    const std::size_t m = 1 + rng() % 6;
    for (std::size_t i = 0; i < m; ++i) obs.push_back({delta(rng), {labels(rng), sentences(rng)}});
    advisor::Params p{alpha(rng), beta(rng)};
    const auto g = advisor::objective_and_gradient(obs, p);
    auto f = [&] { return advisor::objective_and_gradient(obs, p).value; };
    const double floor = 1e-12 * std::max(1.0, g.value);
    auto rel = [&](double fd, double an) { return std::abs(fd - an) / (std::abs(an) + floor); };
    worst = std::max(worst, rel(central_difference(f, p.alpha, kAdvisorStep), g.d_alpha));
    worst = std::max(worst, rel(central_difference(f, p.beta, kAdvisorStep), g.d_beta));
  }
  return {worst <= kAdvisorGradientTolerance, fmt("%zu instances: worst relative gap %.2e (limit %.0e)",
                                                  kGradientInstances, worst, kAdvisorGradientTolerance)};
}

/// Per-seed F1 of every arm, parsed from the `lcner grid` table.
struct GridTable {
  std::vector<std::string> arms;
  std::vector<std::vector<double>> seed_f1;  // arms x seeds
  double seconds = 0.0;
  std::string error;

  const std::vector<double>& of(const std::string& arm) const {
    return seed_f1[std::find(arms.begin(), arms.end(), arm) - arms.begin()];
  }
  bool has(const std::string& arm) const { return std::find(arms.begin(), arms.end(), arm) != arms.end(); }
};

GridTable run_grid_cli(std::vector<std::string> args) {
  GridTable t;
  std::ostringstream out, err;
  const auto start = Clock::now();
  args.insert(args.begin(), "grid");
  const int code = cli::run(args, out, err);
  t.seconds = seconds_since(start);
  if (code != 0) {
    t.error = "lcner grid exited " + std::to_string(code) + ": " + err.str();
    return t;
  }
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::size_t> seed_columns;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream cs(line);
    for (std::string c; std::getline(cs, c, '\t');) cells.push_back(c);
    if (cells[0] == "arm") {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].rfind("f1_seed", 0) == 0) seed_columns.push_back(i);
      continue;
    }
    t.arms.push_back(cells[0]);
    std::vector<double> f1;
    for (std::size_t c : seed_columns) f1.push_back(std::stod(cells.at(c)));
    t.seed_f1.push_back(std::move(f1));
  }
  return t;
}

struct Paired {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
};

Paired paired(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  Paired p;
  p.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - p.mean) * (v - p.mean);
  p.sd = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
  p.min = *std::min_element(d.begin(), d.end());
  return p;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const std::vector<std::string> kGridArgs{"--types", "6", "--noise", "0.3", "--seeds", "1,2,3,4,5"};

Verdict grid_direction(GridTable& table) {
  auto args = kGridArgs;
  args.insert(args.end(), {"--sentences", "3000"});
  table = run_grid_cli(args);
  if (!table.error.empty()) return {false, table.error};
  const auto lc = paired(table.of("lc"), table.of("baseline"));
  const auto crf = paired(table.of("crf+lc"), table.of("crf"));
  const bool ok = lc.mean > lc.sd && lc.min > 0.0 && crf.mean > crf.sd && crf.min >= 0.0 &&
                  table.seconds < kGridBudgetSeconds;
  return {ok, fmt("T=6 N=3000 noise=0.3 seeds 1-5: F1 baseline %.4f lc %.4f crf %.4f crf+lc %.4f; "
                  "lc-baseline mean %+.4f sd %.4f min %+.4f; crf+lc-crf mean %+.4f sd %.4f min %+.4f; %.1fs",
                  mean(table.of("baseline")), mean(table.of("lc")), mean(table.of("crf")), mean(table.of("crf+lc")),
                  lc.mean, lc.sd, lc.min, crf.mean, crf.sd, crf.min, table.seconds)};
}

Verdict dataset_expansion(const GridTable& small) {
  if (!small.has("baseline")) return {false, "N=3000 grid unavailable"};
  auto args = kGridArgs;
  args.insert(args.end(), {"--sentences", "10000", "--arms", "baseline"});
  const auto large = run_grid_cli(args);
  if (!large.error.empty()) return {false, large.error};
  const double a = mean(small.of("baseline")), b = mean(large.of("baseline"));
  return {b > a, fmt("baseline mean F1 over seeds 1-5: N=10000 %.4f vs N=3000 %.4f (%+.4f), %.1fs", b, a, b - a,
                     large.seconds)};
}

Verdict advisor_rule() {
  using advisor::Recommendation;
  struct Example {
    advisor::DatasetProfile profile;
    advisor::Params params;
    Recommendation want;
  };
  const Example examples[] = {
      {{13, 3434}, advisor::kDefaultParams, Recommendation::CrfPlusLc},
      {{25, 11307}, advisor::kDefaultParams, Recommendation::LcOnly},
      {{19, 1000000000}, advisor::kDefaultParams, Recommendation::CrfPlusLc},
      {{20, 400}, advisor::Params{1.0, 2.0}, Recommendation::CrfPlusLc},  // N equals the threshold
  };
  std::size_t examples_ok = 0;
  for (const auto& e : examples) examples_ok += advisor::recommend(e.profile, e.params) == e.want;

  // L in 2..51, N log-spaced over 10..10^6.
  std::vector<std::uint64_t> ls, ns;
  for (std::uint64_t l = 2; l < 52; ++l) ls.push_back(l);
  for (int i = 0; i < 50; ++i) ns.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, 1.0 + 5.0 * i / 49.0))));
  auto lc = [](std::uint64_t l, std::uint64_t n) { return advisor::recommend({l, n}) == Recommendation::LcOnly; };
  std::size_t n_violations = 0, l_violations = 0;
  std::string n_example, l_example;
  for (auto l : ls)
    for (std::size_t j = 1; j < ns.size(); ++j)
      if (lc(l, ns[j - 1]) && !lc(l, ns[j])) {
        if (n_violations++ == 0) n_example = fmt(" e.g. (%llu,%llu)", (unsigned long long)l, (unsigned long long)ns[j]);
      }
  for (auto n : ns)
    for (std::size_t i = 1; i < ls.size(); ++i)
      if (!lc(ls[i], n) && lc(ls[i - 1], n)) {
        if (l_violations++ == 0)
          l_example = fmt(" e.g. (L=%llu,N=%llu) CRF_PLUS_LC but (L=%llu,N=%llu) LC_ONLY", (unsigned long long)ls[i],
                          (unsigned long long)n, (unsigned long long)ls[i - 1], (unsigned long long)n);
      }
  return {examples_ok == std::size(examples) && n_violations == 0 && l_violations == 0,
          fmt("examples %zu/%zu; 50x50 grid: N-monotonicity violations %zu%s; L-monotonicity violations %zu%s",
              examples_ok, std::size(examples), n_violations, n_example.c_str(), l_violations, l_example.c_str())};
}

Verdict segmentation() {
  const auto cases = load_segmentation_golden(LCNER_TEST_DATA_DIR "/segmentation_golden.jsonl");
  const auto ab = SegmentationProfile::with_closers(), c = SegmentationProfile::primary();
  std::size_t golden_ok = 0;
  for (const auto& tc : cases) golden_ok += segment(tc.text, ab) == tc.with_closers && segment(tc.text, c) == tc.primary;
  std::mt19937_64 rng(1007);
  std::size_t lossy = 0;
  for (std::size_t i = 0; i < kSegmentationFuzz; ++i) {
    const auto text = random_segmentation_text(rng);
    for (const auto* p : {&ab, &c}) {
      std::string joined;
      for (const auto& s : segment(text, *p)) joined += s;
      lossy += joined != text;
    }
  }
  return {cases.size() == 20 && golden_ok == cases.size() && lossy == 0,
          fmt("golden %zu/%zu cases match both profiles; %zu fuzzed strings x 2 profiles, %zu lossy", golden_ok,
              cases.size(), kSegmentationFuzz, lossy)};
}

}  // namespace

int main() {
  GridTable grid;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"constraint-counts", constraint_counts},
      {"label-inventory", label_inventory},
      {"lc-validity-fuzz", validity_fuzz},
      {"viterbi-oracle", viterbi_oracle},
      {"log-partition-oracle", partition_oracle},
      {"gradient-crf-nll", crf_gradients},
      {"gradient-emission-ce", emission_gradients},
      {"gradient-advisor-objective", advisor_gradients},
      {"grid-direction", [&] { return grid_direction(grid); }},
      {"grid-dataset-expansion", [&] { return dataset_expansion(grid); }},
      {"advisor-rule", advisor_rule},
      {"segmentation", segmentation},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
