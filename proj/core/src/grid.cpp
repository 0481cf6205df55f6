#include "lcner/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lcner/decode.hpp"
#include "lcner/error.hpp"
#include "lcner/parallel.hpp"

namespace lcner {

std::string_view arm_name(Arm arm) {
  switch (arm) {
    case Arm::Baseline: return "baseline";
    case Arm::Lc: return "lc";
    case Arm::Crf: return "crf";
    case Arm::CrfLc: return "crf+lc";
  }
  return "?";
}

Arm parse_arm(std::string_view name) {
  for (Arm a : kAllArms)
    if (arm_name(a) == name) return a;
  throw InvalidInput("unknown arm '" + std::string(name) + "' (expected baseline, lc, crf or crf+lc)");
}

bool arm_uses_crf(Arm arm) { return arm == Arm::Crf || arm == Arm::CrfLc; }

double ArmSummary::mean_f1() const {
  if (runs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : runs) s += r.f1;
  return s / static_cast<double>(runs.size());
}

double ArmSummary::sd_f1() const {
  if (runs.size() < 2) return 0.0;
  const double m = mean_f1();
  double s = 0.0;
  for (const auto& r : runs) s += (r.f1 - m) * (r.f1 - m);
  return std::sqrt(s / static_cast<double>(runs.size() - 1));
}

double ArmSummary::min_f1() const {
  double v = runs.empty() ? 0.0 : runs.front().f1;
  for (const auto& r : runs) v = std::min(v, r.f1);
  return v;
}

double ArmSummary::max_f1() const {
  double v = runs.empty() ? 0.0 : runs.front().f1;
  for (const auto& r : runs) v = std::max(v, r.f1);
  return v;
}

const ArmSummary& GridResult::arm(Arm a) const {
  for (const auto& s : arms)
    if (s.arm == a) return s;
  throw InvalidInput("grid result has no '" + std::string(arm_name(a)) + "' arm");
}

std::vector<ArmScore> evaluate_arms(const LabelSet& labels, std::span<const Sentence> train,
                                    std::span<const Sentence> test, const GridConfig& config,
                                    std::uint64_t seed) {
  const std::size_t k = labels.size();
  const auto cm = build_constraint_matrix(labels);
  const auto train_enc = encode_corpus(train, config.encoder, k);
  const auto test_enc = encode_corpus(test, config.encoder, k);

  auto emission_cfg = config.emission;
  emission_cfg.seed = seed;
  const auto emission = train_emission(train_enc, k, config.encoder.dim, emission_cfg);

  const bool need_crf = std::any_of(config.arms.begin(), config.arms.end(), arm_uses_crf);
  std::optional<CrfModel> crf;
  if (need_crf) {
    auto crf_cfg = config.crf;
    crf_cfg.seed = seed;
    crf = train_crf(train_enc, emission.projection, crf_cfg, &cm).model;
  }

  std::vector<LogitsSequence> emission_logits(test_enc.size()), crf_logits(test_enc.size());
  parallel_for(test_enc.size(), config.threads, [&](std::size_t i) {
    emission_logits[i] = project(test_enc[i].features, emission.projection);
    if (crf) crf_logits[i] = project(test_enc[i].features, crf->projection);
  });

  std::vector<ArmScore> out;
  for (Arm arm : config.arms) {
    std::vector<LabelSequence> pred(test_enc.size());
    parallel_for(test_enc.size(), config.threads, [&](std::size_t i) {
      switch (arm) {
        case Arm::Baseline: pred[i] = argmax_decode(emission_logits[i]); break;
        case Arm::Lc: pred[i] = lc_decode(emission_logits[i], cm); break;
        case Arm::Crf: pred[i] = crf_decode(crf_logits[i], crf->params); break;
        case Arm::CrfLc: pred[i] = crf_decode(crf_logits[i], crf->params, &cm); break;
      }
    });
    const auto report = score(labels, test, pred);
    std::size_t invalid = 0;
    for (const auto& p : pred) invalid += !is_valid_sequence(cm, p);
    out.push_back({seed, report.precision, report.recall, report.f1,
                   pred.empty() ? 0.0 : static_cast<double>(invalid) / static_cast<double>(pred.size())});
  }
  return out;
}

namespace {

GridResult empty_result(const GridConfig& config, std::string description) {
  if (config.seeds.empty()) throw InvalidInput("grid needs at least one seed");
  if (config.arms.empty()) throw InvalidInput("grid needs at least one arm");
  GridResult r;
  r.description = std::move(description);
  r.seeds = config.seeds;
  for (Arm a : config.arms) r.arms.push_back({a, {}});
  return r;
}

void append_runs(GridResult& r, const std::vector<ArmScore>& scores) {
  for (std::size_t a = 0; a < scores.size(); ++a) r.arms[a].runs.push_back(scores[a]);
}

std::string describe(const GridConfig& c) {
  std::ostringstream os;
  os << "T=" << c.synth.entity_types << " N=" << c.synth.sentences << " noise=" << c.synth.noise_rate
     << " test=" << c.test_sentences << " emission_epochs=" << c.emission.epochs
     << " emission_lr=" << c.emission.learning_rate << " crf_epochs=" << c.crf.epochs
     << " crf_lr=" << c.crf.learning_rate << " batch=" << c.emission.batch_size;
  return os.str();
}

// Keeps test corpora independent of the training-set size and disjoint from training
// sentences drawn with the same seed.
constexpr std::uint64_t kTestSeedSalt = 0x9E3779B97F4A7C15ULL;

}  // namespace

GridResult run_grid(const GridConfig& config) {
  GridResult result = empty_result(config, "synthetic " + describe(config));
  for (std::uint64_t seed : config.seeds) {
    auto train = synth_corpus(config.synth, seed);
    SynthSpec test_spec = config.synth;
    test_spec.sentences = config.test_sentences;
    auto test = synth_corpus(test_spec, seed ^ kTestSeedSalt);
    append_runs(result, evaluate_arms(train.labels, train.sentences, test.sentences, config, seed));
  }
  return result;
}

GridResult run_grid(const LabelSet& labels, std::span<const Sentence> train,
                    std::span<const Sentence> test, const GridConfig& config) {
  std::ostringstream os;
  os << "corpus train=" << train.size() << " test=" << test.size() << " k=" << labels.size();
  GridResult result = empty_result(config, os.str());
  for (std::uint64_t seed : config.seeds)
    append_runs(result, evaluate_arms(labels, train, test, config, seed));
  return result;
}

std::string format_grid_table(const GridResult& result) {
  std::ostringstream os;
  os << "# lcner grid " << result.description << '\n';
  os << "# seeds=";
  for (std::size_t i = 0; i < result.seeds.size(); ++i) os << (i ? "," : "") << result.seeds[i];
  os << '\n';
  os << "arm\tf1_mean\tf1_sd\tf1_min\tf1_max\tprecision_mean\trecall_mean\tinvalid_rate_mean";
  for (auto s : result.seeds) os << "\tf1_seed" << s;
  os << '\n';
  char buf[32];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& a : result.arms) {
    double p = 0.0, r = 0.0, inv = 0.0;
    for (const auto& run : a.runs) {
      p += run.precision;
      r += run.recall;
      inv += run.invalid_rate;
    }
    const double n = a.runs.empty() ? 1.0 : static_cast<double>(a.runs.size());
    os << arm_name(a.arm) << '\t' << num(a.mean_f1()) << '\t' << num(a.sd_f1()) << '\t'
       << num(a.min_f1()) << '\t' << num(a.max_f1()) << '\t' << num(p / n) << '\t' << num(r / n) << '\t'
       << num(inv / n);
    for (const auto& run : a.runs) os << '\t' << num(run.f1);
    os << '\n';
  }
  return os.str();
}

}  // namespace lcner
