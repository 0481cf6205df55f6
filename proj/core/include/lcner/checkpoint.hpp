#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lcner/crf.hpp"
#include "lcner/emission.hpp"
#include "lcner/labelspace.hpp"

namespace lcner {

inline constexpr int kCheckpointVersion = 1;

/// Trained model: encoder settings, emission projection and optional CRF layer,
/// tied to one label vocabulary by its fingerprint.
struct Checkpoint {
  std::size_t k = 0;
  std::string vocabulary_hash;
  FeatureEncoder encoder;
  LinearProjection projection;
  std::optional<CrfParams> crf;
};

/// JSON document. Emission weights are stored sparsely as [feature, [k values]] rows
/// holding at least one non-zero.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint_file(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint_file(const std::string& path);

/// Throws CompatibilityError when the checkpoint was trained on a different vocabulary.
void check_compatible(const Checkpoint& ckpt, const LabelSet& labels);

}  // namespace lcner
