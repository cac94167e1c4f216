#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace adq::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kIoFailure = 1,
  kValidationFailure = 2,
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adq::cli
