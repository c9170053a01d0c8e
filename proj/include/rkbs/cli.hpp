#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rkbs::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kMathFailure = 2,
};

/// Runs one subcommand (fit, interpolate, predict, certify, lebesgue-scan,
/// pursuit). `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace rkbs::cli
