#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lcner/corpus.hpp"
#include "lcner/labelspace.hpp"

namespace lcner {

/// Settings for the synthetic character-level NER corpus generator.
///
/// Every entity type owns four character pools (heads, bodies, tails, singletons), much
/// like historical names that open with a surname and close with a suffix such as 州 or
/// 公. Plain text draws from a pool of its own. All pools are sampled with Zipfian
/// frequencies. Noise swaps entity body characters and plain-text characters, each with
/// probability noise_rate, for characters from one pool shared by both, so an isolated
/// noisy token cannot tell an entity interior from plain text. With zero noise the
/// shared pool is never used and every label is determined by the token itself.
struct SynthSpec {
  std::size_t entity_types = 3;
  std::size_t sentences = 1000;
  std::size_t min_sentence_length = 12;
  std::size_t max_sentence_length = 40;
  std::size_t min_entity_length = 1;
  std::size_t max_entity_length = 6;
  double entity_rate = 0.12;  // chance that an entity opens at a free position
  double noise_rate = 0.0;
  std::size_t plain_vocabulary = 200;
  std::size_t shared_vocabulary = 50;
  std::size_t head_vocabulary = 30;
  std::size_t body_vocabulary = 40;
  std::size_t tail_vocabulary = 20;
  std::size_t single_vocabulary = 20;
  double zipf_exponent = 1.0;
};

struct SynthCorpus {
  LabelSet labels;
  std::vector<Sentence> sentences;
};

/// Entity type names used by the generator: PER, LOC, OFI, BOOK, ... then TYPE<i>.
std::vector<std::string> synth_type_names(std::size_t count);

/// Deterministic in (spec, seed); sentence i does not depend on spec.sentences, so a
/// larger corpus extends a smaller one. Throws InvalidInput on contradictory settings.
SynthCorpus synth_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace lcner
