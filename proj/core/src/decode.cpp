#include "lcner/decode.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lcner/error.hpp"
#include "lcner/parallel.hpp"

namespace lcner {

namespace {

// Stand-in for -inf on masked entries; never participates in arithmetic.
constexpr double kMasked = std::numeric_limits<double>::lowest();

void check_dims(const LogitsSequence& logits, const ConstraintMatrix& cm) {
  if (!logits.empty() && logits.labels() != cm.size())
    throw InvalidInput("logits have " + std::to_string(logits.labels()) +
                       " columns but the constraint matrix is " + std::to_string(cm.size()) +
                       "x" + std::to_string(cm.size()));
}

void check_scores(const TransitionScores& s, std::size_t k) {
  if (!s.transitions.empty() && s.transitions.size() != k * k)
    throw InvalidInput("transition matrix must be k x k");
  if (!s.start.empty() && s.start.size() != k) throw InvalidInput("start scores must have length k");
  if (!s.end.empty() && s.end.size() != k) throw InvalidInput("end scores must have length k");
}

LabelId masked_argmax(std::span<const double> row, std::span<const std::uint8_t> mask) {
  LabelId best = 0;
  double best_score = kMasked;
  bool found = false;
  for (std::size_t y = 0; y < row.size(); ++y) {
    const double v = mask[y] ? row[y] : kMasked;
    if (!found || v > best_score) {
      best = static_cast<LabelId>(y);
      best_score = v;
      found = true;
    }
  }
  return best;
}

}  // namespace

LogitsSequence::LogitsSequence(std::size_t n, std::size_t k, double fill)
    : n_(n), k_(k), scores_(n * k, fill) {}

LogitsSequence::LogitsSequence(std::size_t n, std::size_t k, std::vector<double> scores)
    : n_(n), k_(k), scores_(std::move(scores)) {
  if (scores_.size() != n_ * k_)
    throw InvalidInput("logits buffer has " + std::to_string(scores_.size()) + " entries, expected " +
                       std::to_string(n_ * k_));
  if (!all_finite()) throw InvalidInput("logits contain non-finite values");
}

LogitsSequence LogitsSequence::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t k = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * k);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != k)
      throw InvalidInput("logits row " + std::to_string(t) + " has " +
                         std::to_string(rows[t].size()) + " entries, expected " + std::to_string(k));
    flat.insert(flat.end(), rows[t].begin(), rows[t].end());
  }
  return LogitsSequence(rows.size(), k, std::move(flat));
}

bool LogitsSequence::all_finite() const {
  for (double v : scores_)
    if (!std::isfinite(v)) return false;
  return true;
}

LabelSequence argmax_decode(const LogitsSequence& logits) {
  LabelSequence out(logits.tokens());
  for (std::size_t t = 0; t < logits.tokens(); ++t) {
    auto row = logits.row(t);
    std::size_t best = 0;
    for (std::size_t y = 1; y < row.size(); ++y)
      if (row[y] > row[best]) best = y;
    out[t] = static_cast<LabelId>(best);
  }
  return out;
}

LabelSequence lc_decode(const LogitsSequence& logits, const ConstraintMatrix& cm) {
  check_dims(logits, cm);
  LabelSequence out(logits.tokens());
  for (std::size_t t = 0; t < logits.tokens(); ++t) {
    auto mask = t == 0 ? cm.start_mask() : cm.row(out[t - 1]);
    out[t] = masked_argmax(logits.row(t), mask);
  }
  return out;
}

LabelSequence viterbi_decode(const LogitsSequence& logits, const ConstraintMatrix& cm,
                             const TransitionScores& scores) {
  check_dims(logits, cm);
  const std::size_t n = logits.tokens();
  const std::size_t k = cm.size();
  check_scores(scores, k);
  if (n == 0) return {};

  // suffix[t][j]: best score of tokens t..n-1 given y_t = j, including end score.
  // Running the recursion backwards and choosing forwards yields the lexicographically
  // smallest optimal path.
  std::vector<double> suffix(n * k, kMasked);
  std::vector<std::uint8_t> reachable(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    if (!cm.end_allowed(static_cast<LabelId>(j))) continue;
    suffix[(n - 1) * k + j] = logits(n - 1, j) + scores.end_score(static_cast<LabelId>(j));
    reachable[(n - 1) * k + j] = 1;
  }
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      bool any = false;
      double best = kMasked;
      for (std::size_t j = 0; j < k; ++j) {
        if (!reachable[(t + 1) * k + j] || !cm.allowed(static_cast<LabelId>(i), static_cast<LabelId>(j)))
          continue;
        const double v =
            scores.transition(k, static_cast<LabelId>(i), static_cast<LabelId>(j)) + suffix[(t + 1) * k + j];
        if (!any || v > best) {
          best = v;
          any = true;
        }
      }
      if (any) {
        suffix[t * k + i] = logits(t, i) + best;
        reachable[t * k + i] = 1;
      }
    }
  }

  LabelSequence out(n);
  bool any = false;
  double best = kMasked;
  for (std::size_t j = 0; j < k; ++j) {
    if (!reachable[j] || !cm.start_allowed(static_cast<LabelId>(j))) continue;
    const double v = scores.start_score(static_cast<LabelId>(j)) + suffix[j];
    if (!any || v > best) {
      best = v;
      out[0] = static_cast<LabelId>(j);
      any = true;
    }
  }
  if (!any) throw InternalError("viterbi: no valid path");
  for (std::size_t t = 1; t < n; ++t) {
    any = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!reachable[t * k + j] || !cm.allowed(out[t - 1], static_cast<LabelId>(j))) continue;
      const double v = scores.transition(k, out[t - 1], static_cast<LabelId>(j)) + suffix[t * k + j];
      if (!any || v > best) {
        best = v;
        out[t] = static_cast<LabelId>(j);
        any = true;
      }
    }
    if (!any) throw InternalError("viterbi: lost the optimal path during traceback");
  }
  return out;
}

double path_score(const LogitsSequence& logits, std::span<const LabelId> seq,
                  const TransitionScores& scores) {
  if (seq.size() != logits.tokens()) throw InvalidInput("path length differs from logits length");
  if (seq.empty()) return 0.0;
  const std::size_t k = logits.labels();
  check_scores(scores, k);
  for (LabelId y : seq)
    if (y >= k) throw InvalidInput("label index out of range");
  double s = scores.start_score(seq.front()) + scores.end_score(seq.back());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    s += logits(t, seq[t]);
    if (t > 0) s += scores.transition(k, seq[t - 1], seq[t]);
  }
  return s;
}

std::vector<LabelSequence> decode_batch(std::span<const LogitsSequence> batch, Decoder decoder,
                                        const ConstraintMatrix& cm, const TransitionScores& scores,
                                        unsigned threads) {
  std::vector<LabelSequence> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    switch (decoder) {
      case Decoder::Argmax: out[i] = argmax_decode(batch[i]); break;
      case Decoder::Lc: out[i] = lc_decode(batch[i], cm); break;
      case Decoder::Viterbi: out[i] = viterbi_decode(batch[i], cm, scores); break;
    }
  });
  return out;
}

}  // namespace lcner
