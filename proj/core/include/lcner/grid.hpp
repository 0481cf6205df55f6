#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcner/corpus.hpp"
#include "lcner/crf.hpp"
#include "lcner/emission.hpp"
#include "lcner/synth.hpp"

namespace lcner {

/// The four decoder arms of the +/-CRF x +/-LC comparison.
enum class Arm { Baseline, Lc, Crf, CrfLc };

inline constexpr Arm kAllArms[] = {Arm::Baseline, Arm::Lc, Arm::Crf, Arm::CrfLc};

std::string_view arm_name(Arm arm);
/// Accepts baseline, lc, crf, crf+lc. Throws InvalidInput otherwise.
Arm parse_arm(std::string_view name);
bool arm_uses_crf(Arm arm);

struct GridConfig {
  SynthSpec synth;
  std::vector<std::uint64_t> seeds{1};
  std::size_t test_sentences = 1000;
  FeatureEncoder encoder;
  EmissionTrainConfig emission;
  CrfTrainConfig crf{.epochs = 5};
  std::vector<Arm> arms{std::begin(kAllArms), std::end(kAllArms)};
  unsigned threads = 1;
};

struct ArmScore {
  std::uint64_t seed = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double invalid_rate = 0.0;  // fraction of test sentences decoded to an ill-formed sequence
};

struct ArmSummary {
  Arm arm = Arm::Baseline;
  std::vector<ArmScore> runs;  // one per seed, in seed order

  double mean_f1() const;
  double sd_f1() const;  // sample standard deviation; 0 for one run
  double min_f1() const;
  double max_f1() const;
};

struct GridResult {
  std::string description;  // settings line recorded in the table header
  std::vector<std::uint64_t> seeds;
  std::vector<ArmSummary> arms;

  const ArmSummary& arm(Arm a) const;
};

/// Scores of every requested arm after training on `train` and decoding `test`.
/// `seed` drives mini-batch shuffling.
std::vector<ArmScore> evaluate_arms(const LabelSet& labels, std::span<const Sentence> train,
                                    std::span<const Sentence> test, const GridConfig& config,
                                    std::uint64_t seed);

/// For every seed: synthesize train (config.synth.sentences) and test
/// (config.test_sentences) corpora, then evaluate_arms. The test corpus for a seed does
/// not depend on the training size.
GridResult run_grid(const GridConfig& config);

/// Fixed train/test corpora; seeds only vary the training order.
GridResult run_grid(const LabelSet& labels, std::span<const Sentence> train,
                    std::span<const Sentence> test, const GridConfig& config);

/// Tab-separated table, one row per arm, preceded by `#` header lines holding the
/// settings and seeds.
std::string format_grid_table(const GridResult& result);

}  // namespace lcner
