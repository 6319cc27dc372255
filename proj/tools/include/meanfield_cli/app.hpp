#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meanfield::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kNumericalFailure = 2,
  kCheckFailure = 3,
};

/// Runs one command line (args excludes the program name) and returns the
/// process exit status. Diagnostics go to `err`, progress summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meanfield::cli
