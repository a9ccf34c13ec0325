#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epsurf::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       ///< malformed input or invalid parameters
  kInfeasible = 2,  ///< check/eigs: parameters are not pseudo-Hermitian
  kEmpty = 3,       ///< ep-find/el3/es3 found nothing
};

/// Runs the command line `args` (without the program name). Tables go to the
/// --out file, or to `out` when no file is configured.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epsurf::cli
