#include <algorithm>
#include <cmath>

#include "hotelling/error.hpp"
#include "hotelling/kernels.hpp"
#include "hotelling/parallel.hpp"

namespace hotelling::kernels::parallel {

// Cells seen from a centre y fall into shells of equal distance: integer
// offsets in 1-D, equal-distance groups otherwise. Shell 0 is y alone.
struct Shells {
  std::vector<std::uint32_t> of;  // shell index per cell
  std::size_t count = 0;
  bool antipodal = false;  // even circle: the last shell is the opposite cell
  std::vector<double> mass, inner;

  void build(const MetricMeasureSpace& space, std::size_t y, std::span<const double> f) {
    const std::size_t n = space.size();
    of.resize(n);
    if (space.exact_1d()) {
      std::size_t kmax = 0;
      for (std::size_t x = 0; x < n; ++x) {
        of[x] = static_cast<std::uint32_t>(space.offset(y, x));
        kmax = std::max<std::size_t>(kmax, of[x]);
      }
      count = kmax + 1;
      antipodal = space.kind() == SpaceKind::Circle && n % 2 == 0;
    } else {
      for (std::size_t x = 0; x < n; ++x) of[x] = space.group_of(y, x);
      count = space.group_starts(y).size() - 1;
      antipodal = false;
    }
    mass.assign(count, 0.0);
    for (std::size_t x = 0; x < n; ++x) mass[of[x]] += space.weight(x) * f[x];
    inner.assign(count, 0.0);
    for (std::size_t k = 1; k < count; ++k) inner[k] = inner[k - 1] + mass[k - 1];
  }

  // per-shell capture factor E_k
  void capture(Quadrature rule, std::vector<double>& e) const {
    e.resize(count);
    if (rule == Quadrature::ShellAverage) {
      for (std::size_t k = 0; k < count; ++k) e[k] = std::exp(-inner[k]) * phi(mass[k]);
      return;
    }
    e[0] = 1.0;
    for (std::size_t k = 1; k < count; ++k) e[k] = std::exp(-(inner[k] + 0.5 * mass[k]));
    if (antipodal && count > 1) e[count - 1] = std::exp(-(inner[count - 1] + mass[count - 1]));
  }

  double ball_mass(std::size_t k) const {
    if (k == 0) return 0.0;
    if (antipodal && k == count - 1) return inner[k] + mass[k];
    return inner[k] + 0.5 * mass[k];
  }
};

namespace {

std::vector<std::pair<std::size_t, std::size_t>> blocks(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t nb = std::min(n, kReductionBlocks);
  for (std::size_t b = 0; b < nb; ++b) out.emplace_back(b * n / nb, (b + 1) * n / nb);
  return out;
}

void check_size(const MetricMeasureSpace& space, std::span<const double> f) {
  if (f.size() != space.size()) throw ValidationError("kernel: density size mismatch");
}

}  // namespace

PairMatrix mass_matrix(const MetricMeasureSpace& space, std::span<const double> f) {
  check_size(space, f);
  const std::size_t n = space.size();
  PairMatrix out{n, std::vector<double>(n * n)};
#pragma omp parallel
  {
    Shells s;
    std::vector<double> m;
#pragma omp for schedule(static)
    for (std::size_t y = 0; y < n; ++y) {
      s.build(space, y, f);
      m.resize(s.count);
      for (std::size_t k = 0; k < s.count; ++k) m[k] = s.ball_mass(k);
      double* row = out.e.data() + y * n;
      for (std::size_t x = 0; x < n; ++x) row[x] = m[s.of[x]];
    }
  }
  return out;
}

CaptureMatrix capture_matrix(const MetricMeasureSpace& space, std::span<const double> f_total,
                             Quadrature rule) {
  check_size(space, f_total);
  const std::size_t n = space.size();
  CaptureMatrix out{n, std::vector<double>(n * n)};
#pragma omp parallel
  {
    Shells s;
    std::vector<double> e;
#pragma omp for schedule(static)
    for (std::size_t y = 0; y < n; ++y) {
      s.build(space, y, f_total);
      s.capture(rule, e);
      double* row = out.e.data() + y * n;
      for (std::size_t x = 0; x < n; ++x) row[x] = e[s.of[x]];
    }
  }
  return out;
}

std::vector<double> psi_bar(const MetricMeasureSpace& space, const CaptureMatrix& e) {
  const std::size_t n = space.size();
  std::vector<double> psi(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) acc += space.weight(y) * e(y, x);
    psi[x] = acc;
  }
  return psi;
}

std::vector<double> ball_adjoint(const MetricMeasureSpace& space, std::span<const double> f_total,
                                 std::span<const double> coef, Quadrature rule) {
  check_size(space, f_total);
  check_size(space, coef);
  const std::size_t n = space.size();
  const auto parts = blocks(n);
  std::vector<std::vector<double>> partial(parts.size(), std::vector<double>(n, 0.0));
#pragma omp parallel
  {
    Shells s;
    std::vector<double> e, kb, own, above;
#pragma omp for schedule(dynamic, 1)
    for (std::size_t b = 0; b < parts.size(); ++b) {
      auto& acc = partial[b];
      for (std::size_t y = parts[b].first; y < parts[b].second; ++y) {
        s.build(space, y, f_total);
        s.capture(rule, e);
        // kb[k]: captured own mass in shell k; moving mass into a nearer
        // shell discounts it fully, into the same shell partially
        kb.assign(s.count, 0.0);
        for (std::size_t x = 0; x < n; ++x) kb[s.of[x]] += coef[x];
        own.resize(s.count);
        if (rule == Quadrature::ShellAverage) {
          for (std::size_t k = 0; k < s.count; ++k) {
            own[k] = -kb[k] * std::exp(-s.inner[k]) * phi_prime(s.mass[k]);
            kb[k] *= e[k];
          }
        } else {
          kb[0] = 0.0;
          for (std::size_t k = 1; k < s.count; ++k) {
            kb[k] *= e[k];
            own[k] = 0.5 * kb[k];
          }
          own[0] = 0.0;
          if (s.antipodal && s.count > 1) own[s.count - 1] = kb[s.count - 1];
        }
        above.assign(s.count, 0.0);
        for (std::size_t k = s.count - 1; k > 0; --k) above[k - 1] = above[k] + kb[k];
        const double wy = space.weight(y);
        for (std::size_t u = 0; u < n; ++u) {
          const std::size_t k = s.of[u];
          acc[u] += wy * (above[k] + own[k]);
        }
      }
    }
  }
  std::vector<double> a(n, 0.0);
  for (const auto& p : partial)
    for (std::size_t u = 0; u < n; ++u) a[u] += p[u];
  return a;
}

}  // namespace hotelling::kernels::parallel

namespace hotelling::kernels {

ShellMap shell_map(const MetricMeasureSpace& space) {
  const std::size_t n = space.size();
  ShellMap out{n, std::vector<std::uint32_t>(n * n), std::vector<std::uint32_t>(n), false};
  const std::vector<double> zero(n, 0.0);
#pragma omp parallel
  {
    parallel::Shells s;
#pragma omp for schedule(static)
    for (std::size_t y = 0; y < n; ++y) {
      s.build(space, y, zero);
      std::copy(s.of.begin(), s.of.end(), out.of.begin() + static_cast<std::ptrdiff_t>(y * n));
      out.count[y] = static_cast<std::uint32_t>(s.count);
    }
  }
  out.antipodal = space.kind() == SpaceKind::Circle && n % 2 == 0;
  return out;
}

}  // namespace hotelling::kernels
