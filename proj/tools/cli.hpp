/// @file cli.hpp
/// @brief Command dispatch for the `sage` tool.

#pragma once

#include <string>
#include <vector>

namespace sage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (argv[0] is the program name). Returns the exit code.
int dispatch(const std::vector<std::string>& argv);

}  // namespace sage::cli
