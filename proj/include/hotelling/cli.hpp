#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hotelling::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInfeasible = 2,
  kNotConverged = 3,
  kExperimentFailed = 4,
};

/// Everything a run depends on; echoed in the header line of every output.
struct RunConfig {
  std::string command;
  std::string space = "interval";  // interval | circle | torus | two_interval | custom
  std::string space_file;
  double length = 1.0;
  std::size_t n = 256;
  std::vector<double> budgets{1.0};
  std::vector<std::string> densities;  // one generator spec per player, default uniform
  std::string rule = "midpoint";
  std::uint64_t seed = 1;
  std::size_t reps = 10000;
  std::string ties = "drop";
  double gamma = 0.5;
  double tol = 1e-6;
  std::size_t max_iters = 500;
  double p = 2.0;
  double cap = 4.0;
  std::string experiment;
  double rho = 0.0;  // lab override, 0 = experiment default
  bool n_set = false;
  bool reps_set = false;
  std::string out;
  std::string csv;
  int threads = 0;

  void validate() const;
};

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hotelling::cli
