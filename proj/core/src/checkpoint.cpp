#include "lcner/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "lcner/error.hpp"

namespace lcner {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "lcner-checkpoint";

std::vector<double> doubles(const json& j, const char* field, std::size_t expected) {
  if (!j.contains(field) || !j[field].is_array())
    throw InvalidInput(std::string("checkpoint: missing array '") + field + "'");
  auto v = j[field].get<std::vector<double>>();
  if (v.size() != expected)
    throw InvalidInput(std::string("checkpoint: '") + field + "' has " + std::to_string(v.size()) +
                       " entries, expected " + std::to_string(expected));
  return v;
}

std::vector<std::uint8_t> flags(const json& j, const char* field, std::size_t expected) {
  if (!j.contains(field)) return std::vector<std::uint8_t>(expected, 0);
  auto v = j[field].get<std::vector<std::uint8_t>>();
  if (v.size() != expected) throw InvalidInput(std::string("checkpoint: bad length for '") + field + "'");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const std::size_t k = ckpt.k;
  if (ckpt.projection.labels() != k) throw InvalidInput("checkpoint: projection k differs from k");
  json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["k"] = k;
  j["vocabulary_hash"] = ckpt.vocabulary_hash;
  j["encoder"] = {{"dim", ckpt.encoder.dim}, {"window", ckpt.encoder.window}, {"seed", ckpt.encoder.seed}};

  json rows = json::array();
  const auto& proj = ckpt.projection;
  for (std::size_t f = 0; f < proj.dim(); ++f) {
    auto row = proj.feature_row(f);
    bool nonzero = false;
    for (double v : row) nonzero |= v != 0.0;
    if (nonzero) rows.push_back(json::array({f, std::vector<double>(row.begin(), row.end())}));
  }
  j["emission"] = {{"dim", proj.dim()}, {"bias", proj.bias()}, {"weights", std::move(rows)}};

  if (ckpt.crf) {
    const auto& c = *ckpt.crf;
    if (c.k != k) throw InvalidInput("checkpoint: CRF k differs from k");
    j["crf"] = {{"transitions", c.scores.transitions},
                {"start", c.scores.start},
                {"end", c.scores.end},
                {"frozen_transitions", c.frozen_transitions},
                {"frozen_start", c.frozen_start},
                {"frozen_end", c.frozen_end}};
  } else {
    j["crf"] = nullptr;
  }
  out << j.dump() << '\n';
}

void write_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Checkpoint read_checkpoint(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kFormat) throw InvalidInput("checkpoint: not an lcner checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw CompatibilityError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint c;
    c.k = j.at("k").get<std::size_t>();
    if (c.k == 0) throw InvalidInput("checkpoint: k must be positive");
    c.vocabulary_hash = j.at("vocabulary_hash").get<std::string>();
    const auto& e = j.at("encoder");
    c.encoder.dim = e.at("dim").get<std::size_t>();
    c.encoder.window = e.at("window").get<std::size_t>();
    c.encoder.seed = e.at("seed").get<std::uint64_t>();

    const auto& em = j.at("emission");
    const auto dim = em.at("dim").get<std::size_t>();
    if (dim != c.encoder.dim) throw InvalidInput("checkpoint: emission dim differs from encoder dim");
    c.projection = LinearProjection(c.k, dim);
    c.projection.bias() = doubles(em, "bias", c.k);
    for (const auto& row : em.at("weights")) {
      const auto f = row.at(0).get<std::size_t>();
      if (f >= dim) throw InvalidInput("checkpoint: weight row index out of range");
      const auto values = row.at(1).get<std::vector<double>>();
      if (values.size() != c.k) throw InvalidInput("checkpoint: weight row has wrong length");
      std::copy(values.begin(), values.end(), c.projection.feature_row(f).begin());
    }

    if (j.contains("crf") && !j["crf"].is_null()) {
      const auto& cr = j["crf"];
      CrfParams p = CrfParams::zeros(c.k);
      p.scores.transitions = doubles(cr, "transitions", c.k * c.k);
      p.scores.start = doubles(cr, "start", c.k);
      p.scores.end = doubles(cr, "end", c.k);
      p.frozen_transitions = flags(cr, "frozen_transitions", c.k * c.k);
      p.frozen_start = flags(cr, "frozen_start", c.k);
      p.frozen_end = flags(cr, "frozen_end", c.k);
      c.crf = std::move(p);
    }
    if (!c.projection.all_finite() || (c.crf && !c.crf->all_finite()))
      throw InvalidInput("checkpoint: non-finite parameters");
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("checkpoint: malformed document: ") + e.what());
  }
}

Checkpoint read_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

void check_compatible(const Checkpoint& ckpt, const LabelSet& labels) {
  if (ckpt.k != labels.size() || ckpt.vocabulary_hash != labels.fingerprint_hex())
    throw CompatibilityError("checkpoint vocabulary (k=" + std::to_string(ckpt.k) + ", hash " +
                             ckpt.vocabulary_hash + ") does not match labels (k=" +
                             std::to_string(labels.size()) + ", hash " + labels.fingerprint_hex() + ")");
}

}  // namespace lcner
