#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pvml/error.hpp"

namespace pvml::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kTaskMismatch = 3,
  kReproductionMismatch = 4,
};

/// Exit code reported for a library error.
int exit_code_for(ErrorCode code);

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pvml::cli
