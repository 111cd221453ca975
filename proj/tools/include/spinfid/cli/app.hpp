#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spinfid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// Runs the command line in `args` (args[0] is the program name). Errors go
/// to `err` as `ERROR[<category>]: message`. Returns the process exit code:
/// 0 success, 1 error, 2 a fit did not converge (its report is still written).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinfid::cli
