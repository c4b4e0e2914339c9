#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace isden::cli {

// Process exit codes; each failure class has its own value.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadPath = 3,
  kInsufficientData = 4,
  kModelError = 5,
  kImageError = 6,
  kParameterError = 7,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name, e.g. {"train", "--data", "ds", "--out", "m.isdm"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isden::cli
