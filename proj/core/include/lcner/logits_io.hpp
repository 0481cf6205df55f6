#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lcner/decode.hpp"

namespace lcner {

/// One line of a logits file: the sentence tokens and their n x k scores.
struct LogitsRecord {
  std::vector<std::string> tokens;
  LogitsSequence logits;
};

/// JSON-lines logits file. Each non-empty line is
/// `{"tokens": [...], "logits": [[...], ...]}` with one row per token and `k` finite
/// numbers per row, in vocabulary order. Errors name the offending line.
std::vector<LogitsRecord> read_logits(std::istream& in, std::size_t k);
std::vector<LogitsRecord> read_logits_file(const std::string& path, std::size_t k);

void write_logits(std::ostream& out, std::span<const LogitsRecord> records);
void write_logits_file(const std::string& path, std::span<const LogitsRecord> records);

}  // namespace lcner
