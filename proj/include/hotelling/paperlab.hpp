#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hotelling/space.hpp"

// Named, reproducible experiments. Each returns one record comparing computed
// quantities against reference values; re-running with the same inputs gives
// a bitwise-identical record apart from wall_seconds.

namespace hotelling::lab {

enum class Comparison {
  Near,   // |computed - reference| <= tolerance
  Above,  // computed - reference > tolerance (strict margin)
  Below,  // reference - computed > tolerance
};

/// Where a reference value comes from.
enum class Source {
  ClosedForm,  // formula evaluated in closed form
  Oracle,      // independent computation (other algorithm, exact sum, sampling)
  Symmetry,    // follows from symmetry or a trivial identity
};

struct Check {
  std::string quantity;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::Near;
  Source source = Source::ClosedForm;
  bool pass = false;
};

struct ExperimentRecord {
  std::string name;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<Check> checks;
  nlohmann::json values = nlohmann::json::object();  // other computed quantities
  std::vector<std::string> notes;
  std::vector<std::string> table_header;  // swept quantities, for CSV
  std::vector<std::vector<double>> table;
  bool pass = true;
  double wall_seconds = 0.0;

  const Check& check(std::string quantity, double computed, double reference, double tolerance,
                     Comparison comparison, Source source);
  /// First check with this name; throws std::out_of_range when absent.
  const Check& find(const std::string& quantity) const;
  nlohmann::json to_json() const;
};

std::string to_string(Comparison c);
std::string to_string(Source s);

/// Overrides accepted by every experiment; unset fields keep the defaults.
struct LabOptions {
  std::optional<double> rho;
  std::optional<std::size_t> n;
  std::optional<std::size_t> reps;
  std::uint64_t seed = 1;
};

ExperimentRecord exp_conservation(SpaceKind kind, double rho, const std::vector<std::size_t>& ns,
                                  std::size_t mc_reps = 100000, std::uint64_t seed = 1);
ExperimentRecord exp_interval_deviation(const std::vector<double>& rhos, std::size_t n = 1024);
ExperimentRecord exp_no_ne_psi(double rho, std::size_t n = 512);
ExperimentRecord exp_potential_cycle(double rho = 200.0, double eps = M_PI / 18.0,
                                     std::size_t n = 1024);
ExperimentRecord exp_symmetric_equilibrium(SpaceKind kind, const std::vector<double>& budgets,
                                           std::size_t n = 512, std::size_t reps = 100000,
                                           std::uint64_t seed = 1);
ExperimentRecord exp_conflicting_space(double rho = 2.0, std::size_t reps = 100000,
                                       std::uint64_t seed = 1, std::size_t n_per_side = 256);
/// Interval [0, 1] or circle of circumference 1.
ExperimentRecord exp_restricted_equilibrium(SpaceKind kind, const std::vector<double>& budgets,
                                            double p = 2.0, double cap = 4.0,
                                            const std::vector<std::uint64_t>& seeds = {1, 2},
                                            std::size_t n = 32);

struct Experiment {
  std::string name;
  std::string summary;
  std::function<std::vector<ExperimentRecord>(const LabOptions&)> run;
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& name);

}  // namespace hotelling::lab
