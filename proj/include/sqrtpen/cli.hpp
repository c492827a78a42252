#pragma once

#include <iosfwd>

namespace sqrtpen {

/// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitError = 3,
};

/// Runs `sqrtpen <simulate|fit|rates|checks|oracle> [options]`. Progress and
/// errors go to `err`, file paths of written outputs to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sqrtpen
