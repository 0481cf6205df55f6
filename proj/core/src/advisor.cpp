#include "lcner/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcner/error.hpp"

namespace lcner::advisor {

namespace {

void check_profile(const DatasetProfile& p) {
  if (p.labels < 2) throw InvalidInput("dataset profile needs L >= 2, got " + std::to_string(p.labels));
  if (p.sentences < 1) throw InvalidInput("dataset profile needs N >= 1");
}

void check_params(const Params& p) {
  if (!(p.alpha >= 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.beta))
    throw InvalidInput("advisor parameters must be finite with alpha >= 0 and beta > 0");
}

}  // namespace

std::string_view to_string(Recommendation r) {
  switch (r) {
    case Recommendation::LcOnly: return "LC_ONLY";
    case Recommendation::CrfPlusLc: return "CRF_PLUS_LC";
  }
  return "?";
}

double threshold(const DatasetProfile& profile, const Params& params) {
  return params.alpha * std::pow(static_cast<double>(profile.labels), params.beta);
}

Recommendation recommend(const DatasetProfile& profile, const Params& params) {
  check_profile(profile);
  check_params(params);
  if (profile.labels >= kMinLabelsForLcOnly &&
      static_cast<double>(profile.sentences) > threshold(profile, params))
    return Recommendation::LcOnly;
  return Recommendation::CrfPlusLc;
}

Objective objective_and_gradient(std::span<const Observation> observations, const Params& params) {
  if (observations.empty()) throw InvalidInput("objective needs at least one observation");
  Objective out;
  for (const auto& o : observations) {
    check_profile(o.profile);
    if (!std::isfinite(o.residual)) throw InvalidInput("residuals must be finite");
    const double l = static_cast<double>(o.profile.labels);
    const double ratio = static_cast<double>(o.profile.sentences) * std::pow(l, -params.beta);
    const double r2w = o.residual * o.residual * std::exp(-params.alpha * ratio);
    out.value += r2w;
    out.d_alpha -= r2w * ratio;
    out.d_beta += r2w * params.alpha * ratio * std::log(l);
  }
  return out;
}

FitResult fit(std::span<const Observation> observations, const Params& init, const FitConfig& config) {
  const Box& box = config.box;
  if (!(box.alpha_min <= box.alpha_max) || !(box.beta_min <= box.beta_max))
    throw InvalidInput("fit: empty parameter box");
  if (init.alpha < box.alpha_min || init.alpha > box.alpha_max || init.beta < box.beta_min ||
      init.beta > box.beta_max)
    throw InvalidInput("fit: initial parameters lie outside the box");
  if (!(config.learning_rate > 0.0)) throw InvalidInput("fit: learning rate must be positive");

  auto project = [&box](Params p) {
    p.alpha = std::clamp(p.alpha, box.alpha_min, box.alpha_max);
    p.beta = std::clamp(p.beta, box.beta_min, box.beta_max);
    return p;
  };

  FitResult result{init, 0.0, {}};
  auto current = objective_and_gradient(observations, init);
  if (!std::isfinite(current.value)) throw NumericalFailure("fit: non-finite objective at init");
  result.value = current.value;
  result.trajectory.push_back({init, current.value, 0.0});

  double step = config.learning_rate;
  for (std::size_t it = 0; it < config.steps; ++it) {
    bool accepted = false;
    for (std::size_t h = 0; h <= config.max_halvings; ++h) {
      Params next = project({result.params.alpha - step * current.d_alpha,
                             result.params.beta - step * current.d_beta});
      if (next.alpha == result.params.alpha && next.beta == result.params.beta) break;
      auto cand = objective_and_gradient(observations, next);
      if (!std::isfinite(cand.value) || !std::isfinite(cand.d_alpha) || !std::isfinite(cand.d_beta))
        throw NumericalFailure("fit: non-finite objective", it);
      if (cand.value <= current.value) {
        result.params = next;
        result.value = cand.value;
        current = cand;
        result.trajectory.push_back({next, cand.value, step});
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return result;
}

double bilstm_degradation_ratio(const DatasetProfile& a, const DatasetProfile& b) {
  check_profile(a);
  check_profile(b);
  return std::pow(static_cast<double>(a.labels) / static_cast<double>(b.labels), 1.7) *
         std::pow(static_cast<double>(a.sentences) / static_cast<double>(b.sentences), 0.6);
}

}  // namespace lcner::advisor
