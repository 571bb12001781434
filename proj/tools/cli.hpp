#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace banditgame::cli {

/// Exit codes of the banditgame binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace banditgame::cli
