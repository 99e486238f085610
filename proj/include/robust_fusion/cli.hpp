#pragma once

#include <iosfwd>

namespace robust_fusion {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitParse = 3,
  kExitValidation = 4,
  kExitTooLarge = 5,
  kExitNumerical = 6,
  kExitCheckFailed = 7,
  kExitPrecondition = 8,
  kExitInternal = 9,
};

// Runs `robust-fusion` with the given arguments; reports go to `out`,
// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace robust_fusion
