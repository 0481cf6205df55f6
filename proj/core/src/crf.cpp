#include "lcner/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lcner/error.hpp"

namespace lcner {

namespace {

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_params(const LogitsSequence& logits, const CrfParams& p) {
  const std::size_t k = p.k;
  if (p.scores.transitions.size() != k * k || p.scores.start.size() != k || p.scores.end.size() != k)
    throw InvalidInput("CRF parameters are not k-consistent");
  if (!logits.empty() && logits.labels() != k)
    throw InvalidInput("logits have " + std::to_string(logits.labels()) +
                       " columns but the CRF has k=" + std::to_string(k));
}

// The recursions stay in log space but factor exp(a + b) = exp(a) exp(b): each step
// shifts the previous vector by its maximum, and the transition matrix is exponentiated
// once with a per-column (forward) or per-row (backward) maximum shift. This turns the
// k^2 exponentials per token into k^2 multiply-adds plus 2k exponentials.
struct ShiftedTransitions {
  std::vector<double> col_exp, col_max;  // exp(trans[i][j] - col_max[j])
  std::vector<double> row_exp, row_max;  // exp(trans[i][j] - row_max[i])
};

ShiftedTransitions shift_transitions(const CrfParams& p) {
  const std::size_t k = p.k;
  const auto& tr = p.scores.transitions;
  ShiftedTransitions s;
  s.col_max.assign(k, -std::numeric_limits<double>::infinity());
  s.row_max.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      s.col_max[j] = std::max(s.col_max[j], tr[i * k + j]);
      s.row_max[i] = std::max(s.row_max[i], tr[i * k + j]);
    }
  s.col_exp.resize(k * k);
  s.row_exp.resize(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      s.col_exp[i * k + j] = std::exp(tr[i * k + j] - s.col_max[j]);
      s.row_exp[i * k + j] = std::exp(tr[i * k + j] - s.row_max[i]);
    }
  return s;
}

// alpha[t][j]: log-sum of all prefixes ending in j at t (emission at t included).
std::vector<double> forward(const LogitsSequence& x, const CrfParams& p, const ShiftedTransitions& st) {
  const std::size_t n = x.tokens(), k = p.k;
  std::vector<double> alpha(n * k);
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j) alpha[j] = p.scores.start[j] + x(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    const double* prev = alpha.data() + (t - 1) * k;
    const double m = *std::max_element(prev, prev + k);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::exp(prev[i] - m);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += w[i] * st.col_exp[i * k + j];
      alpha[t * k + j] = m + st.col_max[j] + std::log(s) + x(t, j);
    }
  }
  return alpha;
}

// beta[t][i]: log-sum of all suffixes after t given y_t = i (end score included).
std::vector<double> backward(const LogitsSequence& x, const CrfParams& p, const ShiftedTransitions& st) {
  const std::size_t n = x.tokens(), k = p.k;
  std::vector<double> beta(n * k);
  std::vector<double> q(k), w(k);
  for (std::size_t i = 0; i < k; ++i) beta[(n - 1) * k + i] = p.scores.end[i];
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) q[j] = x(t + 1, j) + beta[(t + 1) * k + j];
    const double m = *std::max_element(q.begin(), q.end());
    for (std::size_t j = 0; j < k; ++j) w[j] = std::exp(q[j] - m);
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += st.row_exp[i * k + j] * w[j];
      beta[t * k + i] = m + st.row_max[i] + std::log(s);
    }
  }
  return beta;
}

double final_log_z(const std::vector<double>& alpha, const CrfParams& p, std::size_t n) {
  const std::size_t k = p.k;
  std::vector<double> tmp(k);
  for (std::size_t j = 0; j < k; ++j) tmp[j] = alpha[(n - 1) * k + j] + p.scores.end[j];
  return log_sum_exp(tmp);
}

}  // namespace

CrfParams CrfParams::zeros(std::size_t k) {
  if (k == 0) throw InvalidInput("CRF needs k >= 1");
  CrfParams p;
  p.k = k;
  p.scores.transitions.assign(k * k, 0.0);
  p.scores.start.assign(k, 0.0);
  p.scores.end.assign(k, 0.0);
  p.frozen_transitions.assign(k * k, 0);
  p.frozen_start.assign(k, 0);
  p.frozen_end.assign(k, 0);
  return p;
}

CrfParams CrfParams::constrained(const ConstraintMatrix& cm) {
  const std::size_t k = cm.size();
  CrfParams p = zeros(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (cm.allowed(static_cast<LabelId>(i), static_cast<LabelId>(j))) continue;
      p.scores.transitions[i * k + j] = kForbiddenTransition;
      p.frozen_transitions[i * k + j] = 1;
    }
    if (!cm.start_allowed(static_cast<LabelId>(i))) {
      p.scores.start[i] = kForbiddenTransition;
      p.frozen_start[i] = 1;
    }
    if (!cm.end_allowed(static_cast<LabelId>(i))) {
      p.scores.end[i] = kForbiddenTransition;
      p.frozen_end[i] = 1;
    }
  }
  return p;
}

bool CrfParams::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(scores.transitions.begin(), scores.transitions.end(), finite) &&
         std::all_of(scores.start.begin(), scores.start.end(), finite) &&
         std::all_of(scores.end.begin(), scores.end.end(), finite);
}

double log_partition(const LogitsSequence& logits, const CrfParams& params) {
  check_params(logits, params);
  if (logits.empty()) throw InvalidInput("log_partition needs at least one token");
  const auto st = shift_transitions(params);
  return final_log_z(forward(logits, params, st), params, logits.tokens());
}

LogitsSequence marginals(const LogitsSequence& logits, const CrfParams& params) {
  check_params(logits, params);
  const std::size_t n = logits.tokens(), k = params.k;
  LogitsSequence out(n, k);
  if (n == 0) return out;
  const auto st = shift_transitions(params);
  const auto alpha = forward(logits, params, st);
  const auto beta = backward(logits, params, st);
  const double log_z = final_log_z(alpha, params, n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < k; ++j) out(t, j) = std::exp(alpha[t * k + j] + beta[t * k + j] - log_z);
  return out;
}

CrfGradient nll_and_gradient(std::span<const CrfExample> batch, const CrfParams& params) {
  const std::size_t k = params.k;
  CrfGradient g;
  g.transitions.assign(k * k, 0.0);
  g.start.assign(k, 0.0);
  g.end.assign(k, 0.0);
  g.logits.reserve(batch.size());
  if (batch.empty()) return g;
  check_params(LogitsSequence{}, params);
  const double inv = 1.0 / static_cast<double>(batch.size());
  const auto st = shift_transitions(params);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const LogitsSequence& x = *batch[b].logits;
    const LabelSequence& y = *batch[b].gold;
    check_params(x, params);
    if (y.size() != x.tokens())
      throw InvalidInput("CRF example " + std::to_string(b) + ": gold has " + std::to_string(y.size()) +
                         " labels but logits have " + std::to_string(x.tokens()) + " rows");
    for (LabelId l : y)
      if (l >= k) throw InvalidInput("CRF example " + std::to_string(b) + ": gold label out of range");
    const std::size_t n = x.tokens();
    LogitsSequence dx(n, k);
    if (n == 0) {
      g.logits.push_back(std::move(dx));
      continue;
    }

    const auto alpha = forward(x, params, st);
    const auto beta = backward(x, params, st);
    const double log_z = final_log_z(alpha, params, n);
    g.nll += inv * (log_z - path_score(x, y, params.scores));

    // Expected counts minus gold counts.
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const double m = std::exp(alpha[t * k + j] + beta[t * k + j] - log_z);
        dx(t, j) = inv * m;
        if (t == 0) g.start[j] += inv * m;
        if (t == n - 1) g.end[j] += inv * m;
      }
      dx(t, y[t]) -= inv;
    }
    for (std::size_t t = 1; t < n; ++t) {
      for (std::size_t i = 0; i < k; ++i) {
        const double a = alpha[(t - 1) * k + i];
        for (std::size_t j = 0; j < k; ++j) {
          const double lp = a + params.scores.transitions[i * k + j] + x(t, j) + beta[t * k + j] - log_z;
          g.transitions[i * k + j] += inv * std::exp(lp);
        }
      }
      g.transitions[y[t - 1] * k + y[t]] -= inv;
    }
    g.start[y.front()] -= inv;
    g.end[y.back()] -= inv;
    g.logits.push_back(std::move(dx));
  }
  return g;
}

LabelSequence crf_decode(const LogitsSequence& logits, const CrfParams& params,
                         const ConstraintMatrix* cm) {
  check_params(logits, params);
  if (cm) {
    if (cm->size() != params.k) throw InvalidInput("constraint matrix size differs from CRF k");
    return viterbi_decode(logits, *cm, params.scores);
  }
  return viterbi_decode(logits, ConstraintMatrix::unconstrained(params.k), params.scores);
}

CrfTrainResult train_crf(std::span<const EncodedSentence> corpus, const LinearProjection& emission,
                         const CrfTrainConfig& config, const ConstraintMatrix* cm) {
  if (corpus.empty()) throw InvalidInput("train_crf: empty corpus");
  if (config.batch_size == 0) throw InvalidInput("train_crf: batch size must be positive");
  const std::size_t k = emission.labels();

  CrfTrainResult result;
  if (config.init == TransitionInit::Constrained) {
    if (!cm) throw InvalidInput("train_crf: constrained initialization needs a constraint matrix");
    if (cm->size() != k) throw InvalidInput("train_crf: constraint matrix size differs from k");
    result.model.params = CrfParams::constrained(*cm);
  } else {
    result.model.params = CrfParams::zeros(k);
  }
  result.model.projection = emission;
  auto& params = result.model.params;
  auto& proj = result.model.projection;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  std::vector<LogitsSequence> logits;
  std::vector<CrfExample> batch;
  std::size_t batch_index = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size, ++batch_index) {
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      logits.clear();
      batch.clear();
      for (std::size_t i = lo; i < hi; ++i) logits.push_back(project(corpus[order[i]].features, proj));
      for (std::size_t i = lo; i < hi; ++i) batch.push_back({&logits[i - lo], &corpus[order[i]].gold});

      auto grad = nll_and_gradient(batch, params);
      if (!std::isfinite(grad.nll)) throw NumericalFailure("train_crf: non-finite loss", batch_index);
      epoch_loss += grad.nll * static_cast<double>(hi - lo);

      const double lr = config.learning_rate;
      for (std::size_t i = 0; i < k * k; ++i)
        if (!params.frozen_transitions[i]) params.scores.transitions[i] -= lr * grad.transitions[i];
      for (std::size_t i = 0; i < k; ++i) {
        if (!params.frozen_start[i]) params.scores.start[i] -= lr * grad.start[i];
        if (!params.frozen_end[i]) params.scores.end[i] -= lr * grad.end[i];
      }
      if (config.update_emission)
        for (std::size_t i = lo; i < hi; ++i)
          apply_logit_gradient(proj, corpus[order[i]].features, grad.logits[i - lo], -lr);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return result;
}

}  // namespace lcner
