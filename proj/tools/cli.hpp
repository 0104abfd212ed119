#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcgame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSolver = 2;

// Runs the command line in `args` (program name first). All numbers come
// from the library; this layer only parses, dispatches and prints.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcgame::cli
