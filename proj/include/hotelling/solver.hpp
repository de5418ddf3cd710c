#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hotelling/analytic.hpp"
#include "hotelling/space.hpp"

namespace hotelling {

/// Theta^{(alpha)}(x) = (x / alpha)^p with p > 1.
struct ThetaSpec {
  double p = 2.0;
  double alpha = 1.0;

  double operator()(double x) const;
  double derivative(double x) const;
  /// (Theta')^{-1}(t) for t >= 0.
  double inverse_derivative(double t) const;
  ThetaSpec scaled(double a) const { return {p, a}; }
  void validate() const;
};

/// C(rho, Theta, K) = {g >= 0 : int g = rho, int Theta(g) <= K}.
struct RestrictedActionSet {
  double budget = 1.0;
  ThetaSpec theta;
  double cap = 1.0;

  /// eta(D) Theta(rho / eta(D)): the smallest attainable Theta integral (uniform g).
  double jensen_bound(const MetricMeasureSpace& space) const;
  bool feasible(const MetricMeasureSpace& space) const;
  /// Throws InfeasibleError when the set is empty.
  void require_feasible(const MetricMeasureSpace& space) const;
  double theta_integral(const MetricMeasureSpace& space, std::span<const double> g) const;
};

/// Quadrature used by best responses and the dynamics: the game it defines
/// is exactly constant-sum, so its equilibria are exactly proportional.
inline constexpr Quadrature kSolverRule = Quadrature::ShellAverage;

/// rho max_x psi_bar(x) - sum_x w_x f(x) psi_bar(x) >= 0. Zero exactly when no
/// concentrated deviation beats the proportional split of f.
double nash_residual(const MetricMeasureSpace& space, const Density& f,
                     Quadrature rule = Quadrature::Midpoint);

/// argmax sum_x w_x g_x s_x over the restricted action set (water-filling).
Density lmo_restricted(const MetricMeasureSpace& space, std::span<const double> scores,
                       const RestrictedActionSet& set);

enum class StepRule { LineSearch, OpenLoop };

struct FrankWolfeOptions {
  double tol = 1e-10;
  std::size_t max_iters = 5000;
  StepRule step = StepRule::LineSearch;
  /// Switch once to Newton on the KKT system when the gap falls below
  /// polish_below or after polish_after iterations.
  bool polish = true;
  double polish_below = 1e-4;
  std::size_t polish_after = 300;
};

struct BestResponse {
  Density f;
  double gap = 0.0;  // <grad V, s - f> at the returned iterate
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Set when the gap failed to shrink by 10% over some 50-iteration window.
  bool stalled = false;
};

/// Frank-Wolfe on V(f_own; f_opp) over the action set, started at `start`
/// (uniform when absent).
BestResponse best_response_restricted(const MetricMeasureSpace& space, const Density& f_opp,
                                      const RestrictedActionSet& set,
                                      const FrankWolfeOptions& options = {},
                                      std::optional<Density> start = std::nullopt);
BestResponse best_response_restricted(const Profile& profile, std::size_t i,
                                      const RestrictedActionSet& set,
                                      const FrankWolfeOptions& options = {});

/// max_i max_x |f_i(x) - rho_i / rho f(x)|.
double check_proportionality(const Profile& profile);

struct DynamicsOptions {
  double gamma = 0.5;
  double tol = 1e-6;  // on max_i sup |BR_i - f_i|
  std::size_t max_iters = 500;
  /// Halve gamma whenever a window of sweeps fails to cut the residual by 10%.
  bool adaptive = true;
  std::size_t window = 20;
  double min_gamma = 1e-3;
  /// Anderson acceleration depth on the damped map (0: plain damping).
  std::size_t anderson = 5;
  FrankWolfeOptions inner{};
};

struct EquilibriumReport {
  Profile profile;
  std::vector<double> fw_gaps;       // per player, at the final profile
  std::vector<double> improvements;  // per player: V_i(BR_i) - V_i(f_i) at the final profile
  std::vector<double> values;
  double nash_residual = 0.0;        // unrestricted diagnostic of the aggregate
  double proportionality = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double gamma = 0.0;                // damping in use at the end
  std::vector<double> trace;         // max_i sup |BR_i - f_i| per sweep
};

/// Damped simultaneous best response against the frozen previous profile;
/// player i uses Theta^{(rho_i)} from the
/// shared base family and the common cap K.
EquilibriumReport br_dynamics(const MetricMeasureSpace& space, const std::vector<double>& budgets,
                              double p, double cap, const DynamicsOptions& options = {},
                              std::optional<Profile> start = std::nullopt);

/// Random feasible starting profile for br_dynamics (seeded).
Profile random_feasible_profile(const MetricMeasureSpace& space, const std::vector<double>& budgets,
                                double p, double cap, std::uint64_t seed);

}  // namespace hotelling
