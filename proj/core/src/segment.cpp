#include "lcner/segment.hpp"

#include <cctype>

#include "lcner/error.hpp"
#include "lcner/utf8.hpp"

namespace lcner {

SegmentationProfile SegmentationProfile::primary() {
  return {U"。！？", U""};
}

SegmentationProfile SegmentationProfile::with_closers() {
  return {U"。！？", U"」』”’"};
}

SegmentationProfile SegmentationProfile::by_name(std::string_view name) {
  if (name == "c" || name == "C") return primary();
  if (name == "ab" || name == "AB" || name == "a" || name == "b") return with_closers();
  throw InvalidInput("unknown segmentation profile '" + std::string(name) + "' (expected ab or c)");
}

std::vector<std::string> segment(std::string_view text, const SegmentationProfile& profile) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = utf8::decode(text, i);
    i += utf8::sequence_length(text, i);
    if (profile.terminal_marks.find(cp) == std::u32string::npos) continue;
    while (i < text.size() &&
           profile.trailing_closers.find(utf8::decode(text, i)) != std::u32string::npos)
      i += utf8::sequence_length(text, i);
    out.emplace_back(text.substr(begin, i - begin));
    begin = i;
  }
  if (begin < text.size()) out.emplace_back(text.substr(begin));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80 && std::isspace(c)) {
      ++i;
    } else if (c < 0x80 && std::isalnum(c)) {
      std::size_t j = i;
      while (j < text.size() && static_cast<unsigned char>(text[j]) < 0x80 &&
             std::isalnum(static_cast<unsigned char>(text[j])))
        ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      const std::size_t len = utf8::sequence_length(text, i);
      out.emplace_back(text.substr(i, len));
      i += len;
    }
  }
  return out;
}

}  // namespace lcner
