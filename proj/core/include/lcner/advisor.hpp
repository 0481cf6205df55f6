#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lcner::advisor {

/// Label cardinality (full vocabulary including O) and sentence count.
struct DatasetProfile {
  std::uint64_t labels = 0;
  std::uint64_t sentences = 0;
};

/// Coefficient and exponent of the data-size threshold alpha * L^beta.
struct Params {
  double alpha = 0.16;
  double beta = 2.8;
};

inline constexpr Params kDefaultParams{0.16, 2.8};

/// Labels needed before an LC-only model is considered.
inline constexpr std::uint64_t kMinLabelsForLcOnly = 20;

enum class Recommendation { LcOnly, CrfPlusLc };

std::string_view to_string(Recommendation r);

/// alpha * L^beta.
double threshold(const DatasetProfile& profile, const Params& params = kDefaultParams);

/// LcOnly iff L >= 20 and N > alpha * L^beta; otherwise CrfPlusLc.
Recommendation recommend(const DatasetProfile& profile, const Params& params = kDefaultParams);

struct Observation {
  double residual = 0.0;  // F1_best - F1_pred
  DatasetProfile profile;
};

struct Objective {
  double value = 0.0;
  double d_alpha = 0.0;
  double d_beta = 0.0;
};

/// sum_i residual_i^2 * exp(-alpha * N_i / L_i^beta) with analytic partial derivatives.
Objective objective_and_gradient(std::span<const Observation> observations, const Params& params);

struct Box {
  double alpha_min = 0.01;
  double alpha_max = 1.0;
  double beta_min = 1.0;
  double beta_max = 4.0;
};

struct FitConfig {
  Box box;
  std::size_t steps = 200;
  double learning_rate = 1e-2;
  /// Step halvings allowed per iteration before the iterate is left where it is.
  std::size_t max_halvings = 60;
};

struct FitStep {
  Params params;
  double value = 0.0;
  double step_size = 0.0;
};

struct FitResult {
  Params params;
  double value = 0.0;
  std::vector<FitStep> trajectory;  // accepted iterates, starting with the initial point
};

/// Projected gradient descent inside the box. A step that would increase the objective
/// is retried at half the step size. Throws NumericalFailure on non-finite objectives.
FitResult fit(std::span<const Observation> observations, const Params& init, const FitConfig& config);

/// (L1/L2)^1.7 * (N1/N2)^0.6: relative BiLSTM degradation between two datasets.
double bilstm_degradation_ratio(const DatasetProfile& a, const DatasetProfile& b);

}  // namespace lcner::advisor
