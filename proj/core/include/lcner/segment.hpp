#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lcner {

/// Which characters end a sentence and which closing marks stick to that end.
struct SegmentationProfile {
  std::u32string terminal_marks;
  std::u32string trailing_closers;

  /// 。！？ only.
  static SegmentationProfile primary();
  /// 。！？ plus the closers 」』”’ attached after a terminal mark.
  static SegmentationProfile with_closers();
  /// "c" selects primary(), "ab" selects with_closers(); throws InvalidInput otherwise.
  static SegmentationProfile by_name(std::string_view name);
};

/// Splits after every terminal mark. With closers, a run of closers directly after the
/// terminal joins the sentence before the split. Concatenating the result yields `text`.
std::vector<std::string> segment(std::string_view text, const SegmentationProfile& profile);

/// One token per Unicode scalar, except that runs of ASCII letters and digits stay
/// together. Whitespace is dropped.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace lcner
