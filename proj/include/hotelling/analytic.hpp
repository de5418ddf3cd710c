#pragma once

#include <cstddef>
#include <vector>

#include "hotelling/quadrature.hpp"
#include "hotelling/space.hpp"

namespace hotelling {

/// N pure actions on one space; f = sum_i f_i, rho = sum_i rho_i.
class Profile {
 public:
  Profile(const MetricMeasureSpace& space, std::vector<Density> densities);

  const MetricMeasureSpace& space() const { return *space_; }
  std::size_t players() const { return densities_.size(); }
  const Density& operator[](std::size_t i) const { return densities_[i]; }
  const std::vector<Density>& densities() const { return densities_; }
  std::vector<double> budgets() const;
  Density total() const;
  /// Aggregate opponent sum_{j != i} f_j.
  Density opponents_of(std::size_t i) const;
  void set(std::size_t i, Density f);

 private:
  const MetricMeasureSpace* space_;
  std::vector<Density> densities_;
};

struct ValueVector {
  std::vector<double> values;
  double total = 0.0;
};

/// psi_bar(x) = sum_y w_y E(y, x) for every cell x.
std::vector<double> psi_bar_all(const MetricMeasureSpace& space, const Density& f_total,
                                Quadrature rule = Quadrature::Midpoint);
double psi_bar(const MetricMeasureSpace& space, const Density& f_total, std::size_t x);
/// Continuum psi_bar(x) = int_D exp(-m(y, x)) dy at an arbitrary coordinate (1-D only).
double psi_bar_at(const MetricMeasureSpace& space, const Density& f_total, double x);

/// V_A(f_own, f_opp): two-player kernel against an aggregate opponent.
double value_vs_aggregate(const MetricMeasureSpace& space, const Density& f_own,
                          const Density& f_opp, Quadrature rule = Quadrature::Midpoint);
ValueVector value_all(const Profile& profile, Quadrature rule = Quadrature::Midpoint);

/// |sum_x w_x f(x) psi_bar(x) - eta(D)(1 - e^{-rho})|.
double conservation_residual(const MetricMeasureSpace& space, const Density& f_total,
                             Quadrature rule = Quadrature::Midpoint);

/// dV_i / df_i(u).
std::vector<double> grad_value_own(const Profile& profile, std::size_t i,
                                   Quadrature rule = Quadrature::Midpoint);
/// Same, with the player's density and aggregate opponent given directly.
std::vector<double> grad_value_own(const MetricMeasureSpace& space, const Density& f_own,
                                   const Density& f_opp, Quadrature rule = Quadrature::Midpoint);

/// rho_dev * psi_bar(x0): value of concentrating the whole budget near x0.
double dirac_deviation_value(const MetricMeasureSpace& space, const Density& f_total,
                             std::size_t x0, double rho_dev);
double dirac_deviation_value_at(const MetricMeasureSpace& space, const Density& f_total,
                                double x0, double rho_dev);

namespace closed_form {

/// Interval [-1/2, 1/2], uniform total rho: psi_bar at the centre.
double interval_center_psi(double rho);
/// Same, at an endpoint.
double interval_endpoint_psi(double rho);
/// Constant profile: V_i = rho_i / rho * eta(D) (1 - e^{-rho}).
double constant_value(double rho_i, double rho, double eta);
/// eta(D)(1 - e^{-rho}).
double total_value(double rho, double eta);
/// rho * psi(centre) for the uniform unit interval: 1 - e^{-rho/2} + (rho/2) e^{-rho/2}.
double dirac_center_value(double rho);
/// psi(centre) - psi(endpoint) lower bound, (e^{-rho/2} - e^{-rho})/2 - (1 - e^{-rho/2})/4.
double no_ne_gap_bound(double rho);

}  // namespace closed_form

}  // namespace hotelling
