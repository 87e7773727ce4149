#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scenesense::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kIoError = 3,
  kBackendError = 4,
};

/// Runs `scenesense <subcommand> [flags]`; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenesense::cli
