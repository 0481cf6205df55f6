#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lcner::utf8 {

/// Byte length of the UTF-8 sequence starting at `s[pos]`; malformed bytes count as 1.
std::size_t sequence_length(std::string_view s, std::size_t pos);

/// Decodes the scalar at `s[pos]`; malformed input decodes to U+FFFD.
char32_t decode(std::string_view s, std::size_t pos);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);

/// Splits into one string per scalar (malformed bytes become single-byte pieces).
std::vector<std::string> scalars(std::string_view s);

}  // namespace lcner::utf8
