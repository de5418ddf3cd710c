#include <cmath>

#include "hotelling/error.hpp"
#include "hotelling/kernels.hpp"

namespace hotelling::kernels {

double coverage(const MetricMeasureSpace& space, std::size_t u, std::size_t y, std::size_t x) {
  if (x == y) return 0.0;
  if (space.exact_1d()) {
    const std::size_t k = space.offset(y, x);
    if (space.kind() == SpaceKind::Circle && 2 * k == space.size()) return 1.0;
    const std::size_t ku = space.offset(y, u);
    return ku < k ? 1.0 : (ku == k ? 0.5 : 0.0);
  }
  const auto g = space.group_of(y, x);
  const auto gu = space.group_of(y, u);
  return gu < g ? 1.0 : (gu == g ? 0.5 : 0.0);
}

namespace {

// integral over [0, len] of exp(-(m0 + s t))
double exp_segment(double m0, double s, double len) {
  if (len <= 0.0) return 0.0;
  const double q = s * len;
  if (std::abs(q) < 1e-300) return len * std::exp(-m0);
  return std::exp(-m0) * (-std::expm1(-q)) / s;
}

}  // namespace

double phi(double s) {
  if (std::abs(s) < 1e-4) return 1.0 - s / 2.0 + s * s / 6.0 - s * s * s / 24.0;
  return -std::expm1(-s) / s;
}

double phi_prime(double s) {
  if (std::abs(s) < 0.1) {
    // sum_{k >= 1} k (-1)^k s^{k-1} / (k+1)!
    double acc = 0.0, power = 1.0, factorial = 1.0;
    for (int k = 1; k <= 14; ++k) {
      factorial *= k + 1;
      acc += (k % 2 ? -k : k) * power / factorial;
      power *= s;
    }
    return acc;
  }
  return (std::exp(-s) * (1.0 + s) - 1.0) / (s * s);
}

namespace {

// -1, 0, 1 as u lies in a nearer, the same or a farther shell than x, seen from y
int compare_shell(const MetricMeasureSpace& space, std::size_t y, std::size_t u, std::size_t x) {
  if (space.exact_1d()) {
    const auto ku = space.offset(y, u), kx = space.offset(y, x);
    return ku < kx ? -1 : (ku == kx ? 0 : 1);
  }
  const double du = space.distance(y, u), dx = space.distance(y, x);
  return du < dx ? -1 : (du == dx ? 0 : 1);
}

struct InnerAndShell {
  double inner = 0.0, shell = 0.0;
};

InnerAndShell shell_masses(const MetricMeasureSpace& space, std::span<const double> f,
                           std::size_t y, std::size_t x) {
  InnerAndShell m;
  for (std::size_t u = 0; u < space.size(); ++u) {
    const int c = compare_shell(space, y, u, x);
    if (c < 0) m.inner += space.weight(u) * f[u];
    if (c == 0) m.shell += space.weight(u) * f[u];
  }
  return m;
}

}  // namespace

namespace serial {

CaptureMatrix capture_matrix(const MetricMeasureSpace& space, std::span<const double> f_total,
                             Quadrature rule) {
  const std::size_t n = space.size();
  CaptureMatrix out{n, std::vector<double>(n * n)};
  if (rule == Quadrature::Midpoint) {
    const BallMassQuery mass(space, f_total);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) out.e[y * n + x] = std::exp(-mass(y, x));
    return out;
  }
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const auto m = shell_masses(space, f_total, y, x);
      out.e[y * n + x] = std::exp(-m.inner) * phi(m.shell);
    }
  return out;
}

std::vector<double> psi_bar(const MetricMeasureSpace& space, const CaptureMatrix& e) {
  const std::size_t n = space.size();
  std::vector<double> psi(n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) psi[x] += space.weight(y) * e(y, x);
  return psi;
}

std::vector<double> ball_adjoint(const MetricMeasureSpace& space, std::span<const double> f_total,
                                 std::span<const double> coef, Quadrature rule) {
  const std::size_t n = space.size();
  const auto e = capture_matrix(space, f_total, rule);
  std::vector<double> a(n, 0.0);
  if (rule == Quadrature::Midpoint) {
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
          const double c = coverage(space, u, y, x);
          if (c != 0.0) a[u] += space.weight(y) * coef[x] * e(y, x) * c;
        }
    return a;
  }
  // -dE(y, x)/df(u) / w_u: E for u inside the shell of x, -e^{-F} phi'(B) within it
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const auto m = shell_masses(space, f_total, y, x);
      const double within = -std::exp(-m.inner) * phi_prime(m.shell);
      for (std::size_t u = 0; u < n; ++u) {
        const int c = compare_shell(space, y, u, x);
        if (c < 0) a[u] += space.weight(y) * coef[x] * e(y, x);
        if (c == 0) a[u] += space.weight(y) * coef[x] * within;
      }
    }
  return a;
}

double cell_exact_capture(const MetricMeasureSpace& space, std::span<const double> f_total,
                          std::span<const double> f_own) {
  if (!space.exact_1d()) throw ValidationError("cell_exact_capture: needs an exact 1-D space");
  const std::size_t n = space.size();
  const auto prefix = cell_prefix(space, f_total);
  const double h = space.cell_width();
  const bool circle = space.kind() == SpaceKind::Circle;
  const double L = space.upper() - space.lower();

  auto mass_at = [&](double yc, double t) {
    double r = std::abs(t - yc);
    if (circle) {
      r = std::min(r, L - r);
      if (2.0 * r >= L) return prefix[n];
      return cumulative_at(space, f_total, prefix, yc + r) -
             cumulative_at(space, f_total, prefix, yc - r);
    }
    return cumulative_at(space, f_total, prefix, std::min(space.upper(), yc + r)) -
           cumulative_at(space, f_total, prefix, std::max(space.lower(), yc - r));
  };

  // m(y, .) is affine on each half cell, so each half integrates in closed form
  double total = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    const double yc = space.cells()[y].point[0];
    double row = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (f_own[x] == 0.0) continue;
      const double left = space.lower() + static_cast<double>(x) * h;
      const double mid = left + 0.5 * h;
      const double right = left + h;
      for (auto [a, b] : {std::pair{left, mid}, std::pair{mid, right}}) {
        const double m0 = mass_at(yc, a);
        const double m1 = mass_at(yc, b);
        row += f_own[x] * exp_segment(m0, (m1 - m0) / (b - a), b - a);
      }
    }
    total += space.weight(y) * row;
  }
  return total;
}

}  // namespace serial
}  // namespace hotelling::kernels
