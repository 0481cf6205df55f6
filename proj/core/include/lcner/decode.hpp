#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lcner/labelspace.hpp"

namespace lcner {

/// n x k row-major matrix of unnormalized per-token label scores.
class LogitsSequence {
 public:
  LogitsSequence() = default;
  LogitsSequence(std::size_t n, std::size_t k, double fill = 0.0);
  /// Throws InvalidInput if `scores.size() != n * k` or any entry is non-finite.
  LogitsSequence(std::size_t n, std::size_t k, std::vector<double> scores);
  static LogitsSequence from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t tokens() const noexcept { return n_; }
  std::size_t labels() const noexcept { return k_; }
  bool empty() const noexcept { return n_ == 0; }

  double& operator()(std::size_t t, std::size_t y) { return scores_[t * k_ + y]; }
  double operator()(std::size_t t, std::size_t y) const { return scores_[t * k_ + y]; }

  std::span<double> row(std::size_t t) { return {scores_.data() + t * k_, k_}; }
  std::span<const double> row(std::size_t t) const { return {scores_.data() + t * k_, k_}; }

  const std::vector<double>& data() const noexcept { return scores_; }
  std::vector<double>& data() noexcept { return scores_; }

  bool all_finite() const;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> scores_;
};

/// Scores added on top of the emission logits when ranking whole paths.
/// An empty vector stands for all zeros.
struct TransitionScores {
  std::vector<double> transitions;  // k x k row-major, from -> to
  std::vector<double> start;        // length k
  std::vector<double> end;          // length k

  double transition(std::size_t k, LabelId from, LabelId to) const {
    return transitions.empty() ? 0.0 : transitions[from * k + to];
  }
  double start_score(LabelId y) const { return start.empty() ? 0.0 : start[y]; }
  double end_score(LabelId y) const { return end.empty() ? 0.0 : end[y]; }

  friend bool operator==(const TransitionScores&, const TransitionScores&) = default;
};

/// Per-row argmax; ties go to the lowest index. Empty input gives an empty sequence.
LabelSequence argmax_decode(const LogitsSequence& logits);

/// Greedy left-to-right decoding where each step only considers labels the constraint
/// matrix allows after the previous prediction. The first token is restricted to the
/// start mask. The end mask is not consulted.
LabelSequence lc_decode(const LogitsSequence& logits, const ConstraintMatrix& cm);

/// Highest-scoring path subject to the constraint matrix, including start and end masks.
/// Among equally scored paths the lexicographically smallest index sequence wins.
LabelSequence viterbi_decode(const LogitsSequence& logits, const ConstraintMatrix& cm,
                             const TransitionScores& scores = {});

/// Sum of emission, transition, start and end scores along `seq`.
double path_score(const LogitsSequence& logits, std::span<const LabelId> seq,
                  const TransitionScores& scores = {});

enum class Decoder { Argmax, Lc, Viterbi };

/// Decodes sentences independently on up to `threads` worker threads; output order
/// matches input order.
std::vector<LabelSequence> decode_batch(std::span<const LogitsSequence> batch, Decoder decoder,
                                        const ConstraintMatrix& cm,
                                        const TransitionScores& scores = {},
                                        unsigned threads = 1);

}  // namespace lcner
