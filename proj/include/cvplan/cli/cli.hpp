#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvplan::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kExecutionFailed = 2,
  kTransportOrConfig = 3,
};

/// Entry point behind the `cvplan` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvplan::cli
