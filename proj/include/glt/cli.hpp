#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glt::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     // partial benchmark failure or unexpected error
  kConfigError = 2, // bad flags, config or input files
  kInferenceError = 3,
  kDecodeError = 4,
};

/// Entry point behind the `glt` binary. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glt::cli
