#pragma once

#include <string>
#include <vector>

namespace qtime::cli {

enum ExitCode : int {
  kOk = 0,
  kParse = 2,
  kOverflowGuard = 3,
  kDivergence = 4,
  kInfeasible = 5,
};

/// Subcommands: analyze, transform [lift|lower], solve, hopfield check|solve.
/// Common flags: --config PATH, --out DIR, --q REAL, --window A..B, --seed N,
/// --tol REAL. Flags override values from the config file.
int run(int argc, char** argv);
/// args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace qtime::cli
