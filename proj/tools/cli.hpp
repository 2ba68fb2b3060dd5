#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace momnet::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kIoError = 4 };

/// Runs one command line (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace momnet::cli
