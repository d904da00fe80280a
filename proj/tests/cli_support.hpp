#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qtime/cli.hpp"
#include "qtime/io.hpp"

namespace clitest {

namespace fs = std::filesystem;
using qtime::io::Json;

// Fresh scratch directory under the system temp path.
inline fs::path scratch(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path p = fs::temp_directory_path() / ("qtime_" + name + "_" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

inline std::string write_config(const fs::path& dir, const Json& cfg,
                                const std::string& name = "config.json") {
  const fs::path p = dir / name;
  qtime::io::write_text(p.string(), qtime::io::dump(cfg));
  return p.string();
}

inline int run_cli(const std::vector<std::string>& args) { return qtime::cli::run(args); }

inline std::string slurp(const fs::path& p) { return qtime::io::read_text(p.string()); }

inline qtime::ApGenerator period_five() {
  return qtime::ApGenerator::scalar(0.0, {{1.0, 2.0 * std::numbers::pi / 5.0, 0.0}});
}

// Log-scale scalar system Delta x = -0.5 x + 0.1 tanh(x(n - d(n))) + 0.2 cos n.
inline Json small_system() {
  return qtime::io::parse(R"({
    "dim": 1, "scale": "log",
    "A": [[-0.5]],
    "C": [[0.1]],
    "u": [{"offset": 0, "terms": [{"amp": 0.2, "freq": 1, "phase": 0}]}],
    "delay": {"cycle": [1, 2]}
  })");
}

}  // namespace clitest
