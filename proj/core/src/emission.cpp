#include "lcner/emission.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lcner/error.hpp"

namespace lcner {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

struct Hasher {
  std::uint64_t h;

  explicit Hasher(std::uint64_t seed) : h(kFnvOffset) { mix_int(seed); }

  void mix_byte(unsigned char c) {
    h ^= c;
    h *= kFnvPrime;
  }
  void mix_int(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void mix_str(std::string_view s) {
    mix_int(s.size());
    for (char c : s) mix_byte(static_cast<unsigned char>(c));
  }
  std::uint64_t finish() const {
    // Final avalanche so that low bits are usable for the modulus.
    std::uint64_t x = h;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }
};

constexpr std::string_view kBos = "\x02<s>";
constexpr std::string_view kEos = "\x03</s>";

std::string_view token_at(std::span<const std::string> tokens, std::ptrdiff_t i) {
  if (i < 0) return kBos;
  if (i >= static_cast<std::ptrdiff_t>(tokens.size())) return kEos;
  return tokens[static_cast<std::size_t>(i)];
}

}  // namespace

std::vector<SparseFeatures> encode(std::span<const std::string> tokens, const FeatureEncoder& enc) {
  if (enc.dim == 0) throw InvalidInput("feature encoder dim must be positive");
  if (enc.dim > (std::size_t{1} << 32)) throw InvalidInput("feature encoder dim exceeds 2^32");
  const auto w = static_cast<std::ptrdiff_t>(enc.window);
  std::vector<SparseFeatures> out(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto pos = static_cast<std::ptrdiff_t>(t);
    std::vector<std::uint32_t> idx;
    idx.reserve(static_cast<std::size_t>(4 * w + 2));
    for (std::ptrdiff_t o = -w; o <= w; ++o) {
      Hasher h(enc.seed);
      h.mix_byte('U');
      h.mix_int(static_cast<std::uint64_t>(o));
      h.mix_str(token_at(tokens, pos + o));
      idx.push_back(static_cast<std::uint32_t>(h.finish() % enc.dim));
    }
    for (std::ptrdiff_t o = -w; o < w; ++o) {
      Hasher h(enc.seed);
      h.mix_byte('G');
      h.mix_int(static_cast<std::uint64_t>(o));
      h.mix_str(token_at(tokens, pos + o));
      h.mix_str(token_at(tokens, pos + o + 1));
      idx.push_back(static_cast<std::uint32_t>(h.finish() % enc.dim));
    }
    std::sort(idx.begin(), idx.end());
    auto& f = out[t];
    for (auto i : idx) {
      if (!f.empty() && f.back().index == i) f.back().value += 1.0;
      else f.push_back({i, 1.0});
    }
  }
  return out;
}

LinearProjection::LinearProjection(std::size_t labels, std::size_t dim)
    : k_(labels), dim_(dim), w_(labels * dim, 0.0), b_(labels, 0.0) {
  if (labels == 0 || dim == 0) throw InvalidInput("projection needs k >= 1 and dim >= 1");
}

bool LinearProjection::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(w_.begin(), w_.end(), finite) && std::all_of(b_.begin(), b_.end(), finite);
}

LogitsSequence project(std::span<const SparseFeatures> features, const LinearProjection& proj) {
  const std::size_t k = proj.labels();
  LogitsSequence out(features.size(), k);
  for (std::size_t t = 0; t < features.size(); ++t) {
    auto row = out.row(t);
    std::copy(proj.bias().begin(), proj.bias().end(), row.begin());
    for (const auto& f : features[t]) {
      if (f.index >= proj.dim())
        throw InvalidInput("feature index " + std::to_string(f.index) + " exceeds projection dim " +
                           std::to_string(proj.dim()));
      auto w = proj.feature_row(f.index);
      for (std::size_t y = 0; y < k; ++y) row[y] += f.value * w[y];
    }
  }
  return out;
}

void apply_logit_gradient(LinearProjection& proj, std::span<const SparseFeatures> features,
                          const LogitsSequence& dlogits, double scale) {
  const std::size_t k = proj.labels();
  if (dlogits.tokens() != features.size() || (dlogits.tokens() > 0 && dlogits.labels() != k))
    throw InvalidInput("logit gradient shape does not match features/projection");
  for (std::size_t t = 0; t < features.size(); ++t) {
    auto g = dlogits.row(t);
    for (std::size_t y = 0; y < k; ++y) proj.bias()[y] += scale * g[y];
    for (const auto& f : features[t]) {
      auto w = proj.feature_row(f.index);
      const double s = scale * f.value;
      for (std::size_t y = 0; y < k; ++y) w[y] += s * g[y];
    }
  }
}

std::vector<double> softmax(std::span<const double> row) {
  std::vector<double> p(row.begin(), row.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) z += (v = std::exp(v - m));
  for (double& v : p) v /= z;
  return p;
}

double token_cross_entropy(const LogitsSequence& logits, std::span<const LabelId> gold,
                           LogitsSequence* dlogits) {
  if (gold.size() != logits.tokens()) throw InvalidInput("gold length differs from logits length");
  const std::size_t k = logits.labels();
  if (dlogits) *dlogits = LogitsSequence(logits.tokens(), k);
  double loss = 0.0;
  for (std::size_t t = 0; t < logits.tokens(); ++t) {
    if (gold[t] >= k) throw InvalidInput("gold label " + std::to_string(gold[t]) + " out of range");
    auto row = logits.row(t);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double lse = m + std::log(z);
    loss += lse - row[gold[t]];
    if (dlogits) {
      auto g = dlogits->row(t);
      for (std::size_t y = 0; y < k; ++y) g[y] = std::exp(row[y] - lse);
      g[gold[t]] -= 1.0;
    }
  }
  return loss;
}

std::vector<EncodedSentence> encode_corpus(std::span<const Sentence> sentences,
                                           const FeatureEncoder& enc, std::size_t labels) {
  std::vector<EncodedSentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    if (!s.gold) throw InvalidInput("sentence " + std::to_string(i) + " has no gold labels");
    if (s.gold->size() != s.tokens.size())
      throw InvalidInput("sentence " + std::to_string(i) + ": gold length differs from token count");
    for (LabelId y : *s.gold)
      if (y >= labels) throw InvalidInput("sentence " + std::to_string(i) + ": label out of range");
    out.push_back({encode(s.tokens, enc), *s.gold});
  }
  return out;
}

EmissionGradient emission_loss_and_gradient(std::span<const EncodedSentence> batch,
                                            const LinearProjection& proj) {
  EmissionGradient out{0.0, LinearProjection(proj.labels(), proj.dim())};
  std::size_t tokens = 0;
  for (const auto& s : batch) tokens += s.gold.size();
  if (tokens == 0) return out;
  const double inv = 1.0 / static_cast<double>(tokens);
  for (const auto& s : batch) {
    LogitsSequence d;
    out.loss += token_cross_entropy(project(s.features, proj), s.gold, &d);
    apply_logit_gradient(out.grad, s.features, d, inv);
  }
  out.loss *= inv;
  return out;
}

EmissionTrainResult train_emission(std::span<const EncodedSentence> corpus, std::size_t labels,
                                   std::size_t dim, const EmissionTrainConfig& config,
                                   const LinearProjection* init) {
  if (corpus.empty()) throw InvalidInput("train_emission: empty corpus");
  if (config.batch_size == 0) throw InvalidInput("train_emission: batch size must be positive");
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (LabelId y : corpus[i].gold)
      if (y >= labels)
        throw InvalidInput("train_emission: label " + std::to_string(y) + " out of range in sentence " +
                           std::to_string(i));

  EmissionTrainResult result{init ? *init : LinearProjection(labels, dim), {}};
  auto& proj = result.projection;
  if (proj.labels() != labels || proj.dim() != dim)
    throw InvalidInput("train_emission: initial projection has the wrong shape");

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  std::vector<LogitsSequence> grads;
  std::size_t batch_index = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size, ++batch_index) {
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      grads.resize(hi - lo);
      double loss = 0.0;
      std::size_t tokens = 0;
      // All gradients are taken at the pre-update weights before any is applied.
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& s = corpus[order[i]];
        loss += token_cross_entropy(project(s.features, proj), s.gold, &grads[i - lo]);
        tokens += s.gold.size();
      }
      if (!std::isfinite(loss)) throw NumericalFailure("train_emission: non-finite loss", batch_index);
      if (tokens == 0) continue;
      const double scale = -config.learning_rate / static_cast<double>(tokens);
      for (std::size_t i = lo; i < hi; ++i)
        apply_logit_gradient(proj, corpus[order[i]].features, grads[i - lo], scale);
      epoch_loss += loss;
      epoch_tokens += tokens;
    }
    result.epoch_losses.push_back(epoch_tokens ? epoch_loss / static_cast<double>(epoch_tokens) : 0.0);
  }
  return result;
}

double token_accuracy(std::span<const EncodedSentence> corpus, const LinearProjection& proj) {
  std::size_t correct = 0, total = 0;
  for (const auto& s : corpus) {
    auto pred = argmax_decode(project(s.features, proj));
    for (std::size_t t = 0; t < pred.size(); ++t) correct += pred[t] == s.gold[t];
    total += pred.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace lcner
