#include "lcner/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lcner/error.hpp"
#include "lcner/utf8.hpp"

namespace lcner {

namespace {

constexpr char32_t kFirstCodePoint = 0x4E00;
constexpr char32_t kLastCodePoint = 0x9FFF;

class Pool {
 public:
  Pool(char32_t first, std::size_t size, double exponent) : first_(first) {
    std::vector<double> w(size);
    for (std::size_t r = 0; r < size; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  std::string draw(std::mt19937_64& rng) {
    return utf8::encode(first_ + static_cast<char32_t>(dist_(rng)));
  }

 private:
  char32_t first_;
  std::discrete_distribution<std::size_t> dist_;
};

void validate(const SynthSpec& s) {
  auto fail = [](const std::string& m) { return InvalidInput("synthetic corpus settings: " + m); };
  if (s.entity_types == 0) throw fail("entity_types must be positive");
  if (s.min_sentence_length == 0) throw fail("min_sentence_length must be positive");
  if (s.min_sentence_length > s.max_sentence_length)
    throw fail("min_sentence_length exceeds max_sentence_length");
  if (s.min_entity_length == 0) throw fail("min_entity_length must be positive");
  if (s.min_entity_length > s.max_entity_length) throw fail("min_entity_length exceeds max_entity_length");
  if (s.max_entity_length > s.max_sentence_length)
    throw fail("max_entity_length exceeds max_sentence_length");
  if (!(s.entity_rate >= 0.0 && s.entity_rate <= 1.0)) throw fail("entity_rate must lie in [0, 1]");
  if (!(s.noise_rate >= 0.0 && s.noise_rate <= 1.0)) throw fail("noise_rate must lie in [0, 1]");
  if (s.plain_vocabulary == 0 || s.shared_vocabulary == 0 || s.head_vocabulary == 0 ||
      s.body_vocabulary == 0 || s.tail_vocabulary == 0 || s.single_vocabulary == 0)
    throw fail("every character pool must be non-empty");
  if (!(s.zipf_exponent >= 0.0)) throw fail("zipf_exponent must be non-negative");
  const std::size_t total = s.plain_vocabulary + s.shared_vocabulary +
                            s.entity_types * (s.head_vocabulary + s.body_vocabulary +
                                              s.tail_vocabulary + s.single_vocabulary);
  if (total > kLastCodePoint - kFirstCodePoint + 1) throw fail("character pools exceed the CJK block");
}

}  // namespace

std::vector<std::string> synth_type_names(std::size_t count) {
  static const char* const kNames[] = {"PER", "LOC", "OFI", "BOOK", "TIME", "THING", "DYN", "EVT", "ORG"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(i < std::size(kNames) ? kNames[i] : "TYPE" + std::to_string(i));
  return out;
}

SynthCorpus synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  validate(spec);
  SynthCorpus out{LabelSet(synth_type_names(spec.entity_types)), {}};
  const LabelSet& labels = out.labels;

  char32_t next = kFirstCodePoint;
  auto make_pool = [&](std::size_t size) {
    Pool p(next, size, spec.zipf_exponent);
    next += static_cast<char32_t>(size);
    return p;
  };
  Pool plain = make_pool(spec.plain_vocabulary);
  Pool shared = make_pool(spec.shared_vocabulary);
  std::vector<Pool> heads, bodies, tails, singles;
  for (std::size_t t = 0; t < spec.entity_types; ++t) {
    heads.push_back(make_pool(spec.head_vocabulary));
    bodies.push_back(make_pool(spec.body_vocabulary));
    tails.push_back(make_pool(spec.tail_vocabulary));
    singles.push_back(make_pool(spec.single_vocabulary));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> type_dist(0, spec.entity_types - 1);
  out.sentences.reserve(spec.sentences);
  for (std::size_t i = 0; i < spec.sentences; ++i) {
    // One generator per sentence keeps sentence i independent of the corpus size.
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    auto noisy = [&] { return spec.noise_rate > 0.0 && unit(rng) < spec.noise_rate; };

    const std::size_t length = std::uniform_int_distribution<std::size_t>(
        spec.min_sentence_length, spec.max_sentence_length)(rng);
    Sentence s;
    s.tokens.reserve(length);
    LabelSequence gold;
    gold.reserve(length);
    while (s.tokens.size() < length) {
      const std::size_t room = length - s.tokens.size();
      if (room >= spec.min_entity_length && unit(rng) < spec.entity_rate) {
        const std::size_t type = type_dist(rng);
        const std::string& name = labels.entity_types()[type];
        const std::size_t len = std::uniform_int_distribution<std::size_t>(
            spec.min_entity_length, std::min(spec.max_entity_length, room))(rng);
        if (len == 1) {
          s.tokens.push_back(singles[type].draw(rng));
          gold.push_back(labels.id(PositionTag::S, name));
          continue;
        }
        s.tokens.push_back(heads[type].draw(rng));
        gold.push_back(labels.id(PositionTag::B, name));
        for (std::size_t j = 1; j + 1 < len; ++j) {
          s.tokens.push_back(noisy() ? shared.draw(rng) : bodies[type].draw(rng));
          gold.push_back(labels.id(PositionTag::M, name));
        }
        s.tokens.push_back(tails[type].draw(rng));
        gold.push_back(labels.id(PositionTag::E, name));
        continue;
      }
      s.tokens.push_back(noisy() ? shared.draw(rng) : plain.draw(rng));
      gold.push_back(labels.outside());
    }
    s.gold = std::move(gold);
    out.sentences.push_back(std::move(s));
  }
  return out;
}

}  // namespace lcner
