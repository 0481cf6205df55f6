#include "lcner/logits_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "lcner/error.hpp"

namespace lcner {

namespace {

LogitsRecord parse_record(const std::string& line, std::size_t k, std::size_t line_no) {
  auto fail = [line_no](const std::string& msg) -> InvalidInput {
    return InvalidInput("logits line " + std::to_string(line_no) + ": " + msg);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw fail("expected a JSON object");
  if (!j.contains("tokens") || !j["tokens"].is_array()) throw fail("missing 'tokens' array");
  if (!j.contains("logits") || !j["logits"].is_array()) throw fail("missing 'logits' array");

  LogitsRecord rec;
  for (const auto& tok : j["tokens"]) {
    if (!tok.is_string()) throw fail("tokens must be strings");
    rec.tokens.push_back(tok.get<std::string>());
  }
  const auto& rows = j["logits"];
  if (rows.size() != rec.tokens.size())
    throw fail(std::to_string(rows.size()) + " logits rows for " + std::to_string(rec.tokens.size()) +
               " tokens");
  std::vector<double> flat;
  flat.reserve(rows.size() * k);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& row = rows[t];
    if (!row.is_array() || row.size() != k)
      throw fail("row " + std::to_string(t) + " must hold exactly " + std::to_string(k) + " numbers");
    for (const auto& v : row) {
      if (!v.is_number()) throw fail("row " + std::to_string(t) + " has a non-numeric entry");
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw fail("row " + std::to_string(t) + " has a non-finite entry");
      flat.push_back(d);
    }
  }
  rec.logits = LogitsSequence(rows.size(), k, std::move(flat));
  return rec;
}

}  // namespace

std::vector<LogitsRecord> read_logits(std::istream& in, std::size_t k) {
  if (k == 0) throw InvalidInput("read_logits: k must be positive");
  std::vector<LogitsRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(line, k, line_no));
  }
  return out;
}

std::vector<LogitsRecord> read_logits_file(const std::string& path, std::size_t k) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open logits file '" + path + "'");
  try {
    return read_logits(in, k);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_logits(std::ostream& out, std::span<const LogitsRecord> records) {
  for (const auto& rec : records) {
    if (rec.tokens.size() != rec.logits.tokens())
      throw InvalidInput("logits record has " + std::to_string(rec.logits.tokens()) + " rows for " +
                         std::to_string(rec.tokens.size()) + " tokens");
    nlohmann::json j;
    j["tokens"] = rec.tokens;
    auto rows = nlohmann::json::array();
    for (std::size_t t = 0; t < rec.logits.tokens(); ++t) {
      auto r = rec.logits.row(t);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["logits"] = std::move(rows);
    out << j.dump() << '\n';
  }
}

void write_logits_file(const std::string& path, std::span<const LogitsRecord> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_logits(out, records);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace lcner
