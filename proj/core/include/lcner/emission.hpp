#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcner/corpus.hpp"
#include "lcner/decode.hpp"

namespace lcner {

struct FeatureEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Sorted by index, duplicates merged.
using SparseFeatures = std::vector<FeatureEntry>;

/// Hashes token identities and adjacent-token bigrams inside a context window.
struct FeatureEncoder {
  std::size_t dim = std::size_t{1} << 18;
  std::size_t window = 2;
  std::uint64_t seed = 0;

  friend bool operator==(const FeatureEncoder&, const FeatureEncoder&) = default;
};

std::vector<SparseFeatures> encode(std::span<const std::string> tokens, const FeatureEncoder& enc);

/// Affine map from hashed features to label logits: row t = W h_t + b.
///
/// W is conceptually k x dim; storage is feature-major so that a sparse feature
/// touches one contiguous block of k weights.
class LinearProjection {
 public:
  LinearProjection() = default;
  LinearProjection(std::size_t labels, std::size_t dim);

  std::size_t labels() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }

  double& weight(std::size_t label, std::size_t feature) { return w_[feature * k_ + label]; }
  double weight(std::size_t label, std::size_t feature) const { return w_[feature * k_ + label]; }
  std::span<double> feature_row(std::size_t feature) { return {w_.data() + feature * k_, k_}; }
  std::span<const double> feature_row(std::size_t feature) const {
    return {w_.data() + feature * k_, k_};
  }

  std::vector<double>& bias() noexcept { return b_; }
  const std::vector<double>& bias() const noexcept { return b_; }

  bool all_finite() const;

  friend bool operator==(const LinearProjection&, const LinearProjection&) = default;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> w_;
  std::vector<double> b_;
};

LogitsSequence project(std::span<const SparseFeatures> features, const LinearProjection& proj);

/// Adds `scale * dlogits[t] * h_t^T` to W and `scale * dlogits[t]` to b for every token.
void apply_logit_gradient(LinearProjection& proj, std::span<const SparseFeatures> features,
                          const LogitsSequence& dlogits, double scale);

/// Numerically stable softmax of one row.
std::vector<double> softmax(std::span<const double> row);

/// Summed token cross-entropy of `logits` against `gold`; when `dlogits` is given it
/// receives softmax - one_hot for every row.
double token_cross_entropy(const LogitsSequence& logits, std::span<const LabelId> gold,
                           LogitsSequence* dlogits = nullptr);

/// A sentence after feature encoding.
struct EncodedSentence {
  std::vector<SparseFeatures> features;
  LabelSequence gold;
};

std::vector<EncodedSentence> encode_corpus(std::span<const Sentence> sentences,
                                           const FeatureEncoder& enc, std::size_t labels);

/// Mean per-token cross-entropy over `batch` and its dense gradient (same shape as `proj`).
/// Dense output is meant for small `dim`; training never materializes it.
struct EmissionGradient {
  double loss = 0.0;
  LinearProjection grad;
};
EmissionGradient emission_loss_and_gradient(std::span<const EncodedSentence> batch,
                                            const LinearProjection& proj);

struct EmissionTrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 10.0;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;
};

struct EmissionTrainResult {
  LinearProjection projection;
  std::vector<double> epoch_losses;  // mean per-token loss per epoch
};

/// Mini-batch gradient descent on mean per-token cross-entropy, from all-zero weights
/// (or from `init` when supplied).
EmissionTrainResult train_emission(std::span<const EncodedSentence> corpus, std::size_t labels,
                                   std::size_t dim, const EmissionTrainConfig& config,
                                   const LinearProjection* init = nullptr);

/// Fraction of tokens whose argmax label equals the gold label.
double token_accuracy(std::span<const EncodedSentence> corpus, const LinearProjection& proj);

}  // namespace lcner
