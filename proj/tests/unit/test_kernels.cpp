#include <cmath>

#include "doctest.h"
#include "hotelling/kernels.hpp"
#include "hotelling/parallel.hpp"
#include "support.hpp"

using namespace hotelling;
using namespace testing_support;

namespace {

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return m;
}

}  // namespace

TEST_CASE("ball mass equals the coverage-weighted sum") {
  std::mt19937_64 rng(11);
  for (const auto& s : zoo(rng)) {
    auto f = random_density(s, 2.5, rng);
    for (std::size_t y = 0; y < s.size(); y += 3)
      for (std::size_t x = 0; x < s.size(); ++x) {
        double m = 0;
        for (std::size_t u = 0; u < s.size(); ++u)
          m += s.weight(u) * f[u] * kernels::coverage(s, u, y, x);
        CHECK(ball_mass(s, f, y, x) == doctest::Approx(m).epsilon(1e-12));
      }
  }
}

TEST_CASE("serial and parallel kernels agree") {
  std::mt19937_64 rng(5);
  for (auto rule : {Quadrature::Midpoint, Quadrature::ShellAverage})
    for (const auto& s : zoo(rng)) {
      CAPTURE(s.label());
      CAPTURE(s.size());
      CAPTURE(static_cast<int>(rule));
      auto f = random_density(s, 3.0, rng);
      auto mine = random_density(s, 1.0, rng);
      const auto es = kernels::serial::capture_matrix(s, f.values(), rule);
      const auto ep = kernels::parallel::capture_matrix(s, f.values(), rule);
      CHECK(max_rel(es.e, ep.e) < 1e-13);
      const auto ps = kernels::serial::psi_bar(s, es);
      const auto pp = kernels::parallel::psi_bar(s, ep);
      CHECK(max_rel(ps, pp) < 1e-13);
      std::vector<double> coef(s.size());
      for (std::size_t x = 0; x < s.size(); ++x) coef[x] = s.weight(x) * mine[x];
      CHECK(max_rel(kernels::serial::ball_adjoint(s, f.values(), coef, rule),
                    kernels::parallel::ball_adjoint(s, f.values(), coef, rule)) < 1e-12);
    }
}

TEST_CASE("phi and its derivative") {
  for (double s : {0.0, 1e-9, 1e-5, 0.05, 0.0999, 0.1001, 0.7, 3.0, 40.0}) {
    const double ref = s == 0.0 ? 1.0 : -std::expm1(-s) / s;
    CHECK(kernels::phi(s) == doctest::Approx(ref).epsilon(1e-14));
    if (s > 1e-3) {
      const double h = 1e-5 * std::max(1.0, s);
      const double fd = (kernels::phi(s + h) - kernels::phi(s - h)) / (2 * h);
      CHECK(kernels::phi_prime(s) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  CHECK(kernels::phi_prime(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("shell-average capture is the exact cell integral in 1-D") {
  std::mt19937_64 rng(9);
  for (auto s : {MetricMeasureSpace::interval(0, 1, 33), MetricMeasureSpace::circle(2, 32),
                 MetricMeasureSpace::circle(2, 31)}) {
    auto f = random_density(s, 7.0, rng);
    auto mine = random_density(s, 2.0, rng);
    const auto e = kernels::parallel::capture_matrix(s, f.values(), Quadrature::ShellAverage);
    const auto psi = kernels::parallel::psi_bar(s, e);
    double v = 0;
    for (std::size_t x = 0; x < s.size(); ++x) v += s.weight(x) * mine[x] * psi[x];
    const double ref = kernels::serial::cell_exact_capture(s, f.values(), mine.values());
    CHECK(v == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("shell-average capture conserves mass exactly") {
  std::mt19937_64 rng(19);
  for (const auto& s : zoo(rng)) {
    CAPTURE(s.label());
    auto f = random_density(s, 6.0, rng);
    const auto e = kernels::parallel::capture_matrix(s, f.values(), Quadrature::ShellAverage);
    const auto psi = kernels::parallel::psi_bar(s, e);
    double v = 0;
    for (std::size_t x = 0; x < s.size(); ++x) v += s.weight(x) * f[x] * psi[x];
    // per centre, sum over shells of e^{-F}(1 - e^{-B}) telescopes
    const double target = s.total_mass() * -std::expm1(-f.budget());
    CHECK(v == doctest::Approx(target).epsilon(1e-12));
  }
}

TEST_CASE("results do not depend on the worker count") {
  std::mt19937_64 rng(3);
  auto s = MetricMeasureSpace::circle(1.0, 150);
  auto f = random_density(s, 4.0, rng);
  std::vector<double> coef(s.size(), 0.01);
  const int saved = num_threads();
  for (auto rule : {Quadrature::Midpoint, Quadrature::ShellAverage}) {
    set_num_threads(1);
    const auto e1 = kernels::parallel::capture_matrix(s, f.values(), rule);
    const auto a1 = kernels::parallel::ball_adjoint(s, f.values(), coef, rule);
    set_num_threads(4);
    const auto e4 = kernels::parallel::capture_matrix(s, f.values(), rule);
    const auto a4 = kernels::parallel::ball_adjoint(s, f.values(), coef, rule);
    CHECK(e1.e == e4.e);
    CHECK(a1 == a4);
  }
  set_num_threads(saved);
}
