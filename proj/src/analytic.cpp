#include "hotelling/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "hotelling/error.hpp"
#include "hotelling/kernels.hpp"

namespace hotelling {

Profile::Profile(const MetricMeasureSpace& space, std::vector<Density> densities)
    : space_(&space), densities_(std::move(densities)) {
  if (densities_.empty()) throw ValidationError("profile needs at least one player");
  for (const auto& d : densities_)
    if (d.size() != space.size()) throw ValidationError("profile: density size mismatch");
}

std::vector<double> Profile::budgets() const {
  std::vector<double> b;
  for (const auto& d : densities_) b.push_back(d.budget());
  return b;
}

Density Profile::total() const {
  Density t = densities_[0];
  for (std::size_t i = 1; i < densities_.size(); ++i) t += densities_[i];
  return t;
}

Density Profile::opponents_of(std::size_t i) const {
  Density t = Density::zero(*space_);
  for (std::size_t j = 0; j < densities_.size(); ++j)
    if (j != i) t += densities_[j];
  return t;
}

void Profile::set(std::size_t i, Density f) {
  if (f.size() != space_->size()) throw ValidationError("profile: density size mismatch");
  densities_.at(i) = std::move(f);
}

std::vector<double> psi_bar_all(const MetricMeasureSpace& space, const Density& f_total,
                                Quadrature rule) {
  const auto e = kernels::parallel::capture_matrix(space, f_total.values(), rule);
  return kernels::parallel::psi_bar(space, e);
}

double psi_bar(const MetricMeasureSpace& space, const Density& f_total, std::size_t x) {
  const BallMassQuery mass(space, f_total.values());
  double acc = 0.0;
  for (std::size_t y = 0; y < space.size(); ++y) acc += space.weight(y) * std::exp(-mass(y, x));
  return acc;
}

double psi_bar_at(const MetricMeasureSpace& space, const Density& f_total, double x) {
  if (!space.exact_1d()) throw ValidationError("psi_bar_at: needs an exact 1-D space");
  const auto f = f_total.values();
  const auto prefix = cell_prefix(space, f);
  const bool circle = space.kind() == SpaceKind::Circle;
  const double a = space.lower(), b = space.upper(), h = space.cell_width();
  const double L = b - a;
  if (circle) {
    x -= std::floor(x / L) * L;
  } else if (x < a || x > b) {
    throw ValidationError("psi_bar_at: point outside the interval");
  }
  auto F = [&](double t) {
    if (!circle) t = std::clamp(t, a, b);
    return cumulative_at(space, f, prefix, t);
  };
  const double fx = F(x);

  // a centre y at distance r on side s sees the ball [x, x + 2r] (s = +1)
  // or [x - 2r, x] (s = -1); its mass is affine in r between grid edges
  double total = 0.0;
  for (int s : {+1, -1}) {
    const double R = circle ? 0.5 * L : (s > 0 ? b - x : x - a);
    if (R <= 0.0) continue;
    auto m = [&](double r) { return s > 0 ? F(x + 2.0 * r) - fx : fx - F(x - 2.0 * r); };
    std::vector<double> cuts{0.0, R};
    const auto kmin = static_cast<long>(std::floor((x - 2.0 * R - a) / h)) - 1;
    const auto kmax = static_cast<long>(std::ceil((x + 2.0 * R - a) / h)) + 1;
    for (long k = kmin; k <= kmax; ++k) {
      const double r = s * (a + static_cast<double>(k) * h - x) / 2.0;
      if (r > 0.0 && r < R) cuts.push_back(r);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double len = cuts[i + 1] - cuts[i];
      if (len <= 0.0) continue;
      const double m0 = m(cuts[i]), m1 = m(cuts[i + 1]);
      const double dm = m1 - m0;
      total += std::abs(dm) < 1e-300 ? len * std::exp(-m0)
                                     : std::exp(-m0) * (-std::expm1(-dm)) * len / dm;
    }
  }
  return total;
}

namespace {

double midpoint_value(const MetricMeasureSpace& space, std::span<const double> psi,
                      const Density& f_own) {
  double v = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) v += space.weight(x) * f_own[x] * psi[x];
  return v;
}

}  // namespace

double value_vs_aggregate(const MetricMeasureSpace& space, const Density& f_own,
                          const Density& f_opp, Quadrature rule) {
  return midpoint_value(space, psi_bar_all(space, f_own + f_opp, rule), f_own);
}

ValueVector value_all(const Profile& profile, Quadrature rule) {
  const auto& space = profile.space();
  ValueVector out;
  // every player shares the kernel of the aggregate f = f_i + sum_{j != i} f_j
  const auto psi = psi_bar_all(space, profile.total(), rule);
  for (std::size_t i = 0; i < profile.players(); ++i)
    out.values.push_back(midpoint_value(space, psi, profile[i]));
  for (double v : out.values) out.total += v;
  return out;
}

double conservation_residual(const MetricMeasureSpace& space, const Density& f_total,
                             Quadrature rule) {
  const double target = closed_form::total_value(f_total.budget(), space.total_mass());
  const double v = midpoint_value(space, psi_bar_all(space, f_total, rule), f_total);
  return std::abs(v - target);
}

std::vector<double> grad_value_own(const MetricMeasureSpace& space, const Density& f_own,
                                   const Density& f_opp, Quadrature rule) {
  const std::size_t n = space.size();
  const Density total = f_own + f_opp;
  const auto e = kernels::parallel::capture_matrix(space, total.values(), rule);
  const auto psi = kernels::parallel::psi_bar(space, e);
  std::vector<double> coef(n);
  for (std::size_t x = 0; x < n; ++x) coef[x] = space.weight(x) * f_own[x];
  const auto adj = kernels::parallel::ball_adjoint(space, total.values(), coef, rule);
  std::vector<double> g(n);
  for (std::size_t u = 0; u < n; ++u) g[u] = space.weight(u) * (psi[u] - adj[u]);
  return g;
}

std::vector<double> grad_value_own(const Profile& profile, std::size_t i, Quadrature rule) {
  return grad_value_own(profile.space(), profile[i], profile.opponents_of(i), rule);
}

double dirac_deviation_value(const MetricMeasureSpace& space, const Density& f_total,
                             std::size_t x0, double rho_dev) {
  if (!(rho_dev > 0.0)) throw ValidationError("dirac deviation needs rho_dev > 0");
  return rho_dev * psi_bar(space, f_total, x0);
}

double dirac_deviation_value_at(const MetricMeasureSpace& space, const Density& f_total,
                                double x0, double rho_dev) {
  if (!(rho_dev > 0.0)) throw ValidationError("dirac deviation needs rho_dev > 0");
  return rho_dev * psi_bar_at(space, f_total, x0);
}

namespace closed_form {

double interval_center_psi(double rho) {
  if (rho == 0.0) return 1.0;
  return (1.0 - std::exp(-rho / 2)) / rho + 0.5 * std::exp(-rho / 2);
}

double interval_endpoint_psi(double rho) {
  if (rho == 0.0) return 1.0;
  return -std::expm1(-rho) / (2.0 * rho) + 0.5 * std::exp(-rho);
}

double constant_value(double rho_i, double rho, double eta) {
  if (rho == 0.0) return 0.0;
  return rho_i / rho * total_value(rho, eta);
}

double total_value(double rho, double eta) { return -eta * std::expm1(-rho); }

double dirac_center_value(double rho) {
  return 1.0 - std::exp(-rho / 2) + 0.5 * rho * std::exp(-rho / 2);
}

double no_ne_gap_bound(double rho) {
  return 0.5 * (std::exp(-rho / 2) - std::exp(-rho)) - 0.25 * (1.0 - std::exp(-rho / 2));
}

}  // namespace closed_form

}  // namespace hotelling
