#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lcner/decode.hpp"
#include "lcner/emission.hpp"
#include "lcner/labelspace.hpp"

namespace lcner {

/// Score assigned to forbidden transitions in constraint-initialized mode.
inline constexpr double kForbiddenTransition = -1.0e4;

/// Linear-chain CRF parameters on top of emission logits.
struct CrfParams {
  std::size_t k = 0;
  TransitionScores scores;  // transitions k x k, start k, end k; always fully sized
  /// Entries set to 1 are never updated by training (transitions, start, end in that order).
  std::vector<std::uint8_t> frozen_transitions;
  std::vector<std::uint8_t> frozen_start;
  std::vector<std::uint8_t> frozen_end;

  /// All scores zero, nothing frozen.
  static CrfParams zeros(std::size_t k);
  /// Forbidden transitions, starts and ends set to kForbiddenTransition and frozen.
  static CrfParams constrained(const ConstraintMatrix& cm);

  bool all_finite() const;

  friend bool operator==(const CrfParams&, const CrfParams&) = default;
};

/// log sum over every label path of exp(path score), via the forward algorithm.
double log_partition(const LogitsSequence& logits, const CrfParams& params);

/// Per-position label marginals (n x k) from forward-backward.
LogitsSequence marginals(const LogitsSequence& logits, const CrfParams& params);

struct CrfExample {
  const LogitsSequence* logits = nullptr;
  const LabelSequence* gold = nullptr;
};

struct CrfGradient {
  double nll = 0.0;  // mean over the batch
  std::vector<double> transitions;
  std::vector<double> start;
  std::vector<double> end;
  std::vector<LogitsSequence> logits;  // one per example
};

/// Mean negative log-likelihood of the gold paths and its exact gradient.
CrfGradient nll_and_gradient(std::span<const CrfExample> batch, const CrfParams& params);

/// Viterbi with the learned transitions; when `cm` is given, forbidden moves are removed.
LabelSequence crf_decode(const LogitsSequence& logits, const CrfParams& params,
                         const ConstraintMatrix* cm = nullptr);

enum class TransitionInit { Zeros, Constrained };

struct CrfTrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;
  TransitionInit init = TransitionInit::Zeros;
  bool update_emission = true;
};

struct CrfModel {
  CrfParams params;
  LinearProjection projection;
};

struct CrfTrainResult {
  CrfModel model;
  std::vector<double> epoch_losses;  // mean NLL per sentence
};

/// Mini-batch gradient descent on the CRF NLL, jointly updating the emission projection
/// starting from `emission`. `cm` is required for TransitionInit::Constrained.
CrfTrainResult train_crf(std::span<const EncodedSentence> corpus, const LinearProjection& emission,
                         const CrfTrainConfig& config, const ConstraintMatrix* cm = nullptr);

}  // namespace lcner
