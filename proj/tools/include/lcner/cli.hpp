#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lcner::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;  // unreadable, unwritable or malformed input files
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCompatibility = 4;
inline constexpr int kExitInternal = 5;

/// Runs the `lcner` command line with `args` (program name excluded). Normal output goes
/// to `out` unless a command writes to a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcner::cli
