#include <cmath>

#include "doctest.h"
#include "hotelling/error.hpp"
#include "hotelling/solver.hpp"
#include "support.hpp"

using namespace hotelling;
using namespace testing_support;
using doctest::Approx;

namespace {

double objective(const MetricMeasureSpace& s, std::span<const double> scores,
                 std::span<const double> g) {
  double v = 0;
  for (std::size_t x = 0; x < s.size(); ++x) v += s.weight(x) * scores[x] * g[x];
  return v;
}

MetricMeasureSpace two_cells() {
  return MetricMeasureSpace::custom({{0.0}, {1.0}}, {{0, 1}, {1, 0}}, {1, 1});
}

}  // namespace

TEST_CASE("theta power family") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int k = 0; k < 50; ++k) {
    const ThetaSpec th{1.0 + u(rng), u(rng)};
    const double x = u(rng);
    CHECK(th.inverse_derivative(th.derivative(x)) == Approx(x).epsilon(1e-12));
    CHECK(th(th.alpha) == Approx(1.0));
  }
  CHECK(ThetaSpec{2, 1}.inverse_derivative(-1.0) == 0.0);
  CHECK_THROWS_AS(ThetaSpec({1.0, 1.0}).validate(), ValidationError);
  CHECK_THROWS_AS(ThetaSpec({2.0, 0.0}).validate(), ValidationError);
}

TEST_CASE("feasibility is the Jensen bound") {
  auto s = MetricMeasureSpace::interval(0, 2, 16);
  RestrictedActionSet set{1.0, {2, 1}, 0.5};
  CHECK(set.jensen_bound(s) == Approx(0.5));
  CHECK(set.feasible(s));
  set.cap = 0.49;
  CHECK_FALSE(set.feasible(s));
  CHECK_THROWS_AS(set.require_feasible(s), InfeasibleError);
  CHECK(set.theta_integral(s, Density::uniform(s, 1.0).values()) == Approx(0.5));
}

TEST_CASE("nash residual") {
  auto c = MetricMeasureSpace::circle(1, 64);
  CHECK(nash_residual(c, Density::uniform(c, 3.0)) < 1e-10);
  CHECK(nash_residual(c, Density::uniform(c, 3.0), Quadrature::ShellAverage) < 1e-10);
  auto s = MetricMeasureSpace::interval(-0.5, 0.5, 1024);
  CHECK(std::abs(nash_residual(s, Density::uniform(s, 2.0)) - 0.13534) < 1e-2);
  auto t = MetricMeasureSpace::torus(1, 1, 8, 8);
  CHECK(nash_residual(t, Density::uniform(t, 2.0)) < 1e-10);
  std::mt19937_64 rng(4);
  for (const auto& sp : zoo(rng)) CHECK(nash_residual(sp, random_density(sp, 2.0, rng)) >= 0.0);
}

TEST_CASE("lmo examples") {
  const auto s = two_cells();
  const std::vector<double> scores{1.0, 0.0};
  const auto g = lmo_restricted(s, scores, {1.0, {2, 1}, 0.6});
  CHECK(g[0] == Approx((2 + std::sqrt(0.8)) / 4).epsilon(1e-9));
  CHECK(g[1] == Approx(1 - (2 + std::sqrt(0.8)) / 4).epsilon(1e-9));
  const auto h = lmo_restricted(s, scores, {1.0, {2, 1}, 1.0});
  CHECK(h[0] == 1.0);
  CHECK(h[1] == 0.0);
  const std::vector<double> flat{0.3, 0.3};
  const auto u = lmo_restricted(s, flat, {1.0, {2, 1}, 0.6});
  CHECK(u[0] == Approx(0.5));
  CHECK(u[1] == Approx(0.5));
  CHECK_THROWS_AS(lmo_restricted(s, scores, {1.0, {2, 1}, 0.4}), InfeasibleError);
}

TEST_CASE("lmo output is feasible") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = MetricMeasureSpace::interval(0, 0.5 + u(rng), 2 + rng() % 40);
    std::vector<double> scores(s.size());
    for (auto& v : scores) v = u(rng) < 0.2 ? 0.5 : u(rng);
    const double rho = 0.2 + 3 * u(rng);
    RestrictedActionSet set{rho, {1.2 + 2 * u(rng), 0.3 + u(rng)}, 0.0};
    set.cap = set.jensen_bound(s) * (1.0 + 5 * u(rng) * u(rng));
    const auto g = lmo_restricted(s, scores, set);
    CHECK(mass_of(s, g.values()) == Approx(rho).epsilon(1e-10));
    CHECK(set.theta_integral(s, g.values()) <= set.cap * (1 + 1e-10));
    for (double v : g.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("lmo matches a brute-force grid on two and three cells") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pitch = 1e-3;
  for (int trial = 0; trial < 10; ++trial) {
    auto s = MetricMeasureSpace::custom({{0.0}, {1.0}}, {{0, 1}, {1, 0}}, {0.5 + u(rng), 0.5 + u(rng)});
    const std::vector<double> scores{u(rng), u(rng)};
    RestrictedActionSet set{1.0, {2, 1}, 0.0};
    set.cap = set.jensen_bound(s) * (1.0 + u(rng));
    const double got = objective(s, scores, lmo_restricted(s, scores, set).values());
    double best = -1e300;
    for (double m0 = 0; m0 <= 1.0; m0 += pitch) {
      const std::vector<double> g{m0 / s.weight(0), (1 - m0) / s.weight(1)};
      if (set.theta_integral(s, g) <= set.cap) best = std::max(best, objective(s, scores, g));
    }
    CHECK(got >= best - 1e-12);
    CHECK(got <= best + 1e-3);
  }
  for (int trial = 0; trial < 5; ++trial) {
    auto s = MetricMeasureSpace::interval(0, 1, 3);
    const std::vector<double> scores{u(rng), u(rng), u(rng)};
    RestrictedActionSet set{1.0, {1.5 + u(rng), 1}, 0.0};
    set.cap = set.jensen_bound(s) * (1.0 + 2 * u(rng));
    const double got = objective(s, scores, lmo_restricted(s, scores, set).values());
    double best = -1e300;
    for (double m0 = 0; m0 <= 1.0; m0 += pitch)
      for (double m1 = 0; m0 + m1 <= 1.0; m1 += pitch) {
        const std::vector<double> g{3 * m0, 3 * m1, 3 * (1 - m0 - m1)};
        if (set.theta_integral(s, g) <= set.cap) best = std::max(best, objective(s, scores, g));
      }
    CHECK(got >= best - 1e-12);
    CHECK(got <= best + 1e-3);
  }
}

TEST_CASE("lmo beats random feasible points up to twelve cells") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n = 4; n <= 12; ++n) {
    auto s = MetricMeasureSpace::interval(0, 1, n);
    std::vector<double> scores(n);
    for (auto& v : scores) v = u(rng);
    RestrictedActionSet set{1.0, {2.5, 1}, 0.0};
    set.cap = set.jensen_bound(s) * 1.7;
    const double got = objective(s, scores, lmo_restricted(s, scores, set).values());
    const auto uni = Density::uniform(s, 1.0);
    for (int k = 0; k < 2000; ++k) {
      // shrink a random point toward the uniform density until it is feasible
      auto r = random_density(s, 1.0, rng, 0.5);
      double t = 1.0;
      while (set.theta_integral(s, (t * r + (1 - t) * uni).values()) > set.cap) t *= 0.9;
      CHECK(got >= objective(s, scores, (t * r + (1 - t) * uni).values()) - 1e-12);
    }
  }
}

TEST_CASE("best response examples") {
  SUBCASE("circle against a uniform opponent") {
    auto c = MetricMeasureSpace::circle(1, 128);
    const auto br = best_response_restricted(c, Density::uniform(c, 1.0), {2.0, {2, 1}, 100.0},
                                             {1e-6, 500});
    CHECK(br.converged);
    CHECK(br.gap < 1e-6);
    for (double v : br.f.values()) CHECK(v == Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("interval, never worse than uniform") {
    auto s = MetricMeasureSpace::interval(0, 1, 64);
    const auto opp = Density::uniform(s, 2.0);
    const auto br = best_response_restricted(s, opp, {2.0, {2, 1}, 8.0});
    const double uniform = value_vs_aggregate(s, Density::uniform(s, 2.0), opp, kSolverRule);
    CHECK(br.converged);
    CHECK(br.value >= uniform);
    CHECK(br.value >= -std::expm1(-4.0) * 0.5 - 1e-10);
  }
  SUBCASE("one cell") {
    auto s = MetricMeasureSpace::custom({{0.0}}, {{0.0}}, {1.0});
    const auto br = best_response_restricted(s, Density::uniform(s, 1.0), {1.0, {2, 1}, 5.0});
    CHECK(br.iterations == 0);
    CHECK(br.gap == 0.0);
    CHECK(br.f[0] == Approx(1.0));
  }
}

TEST_CASE("best response satisfies the first-order conditions") {
  std::mt19937_64 rng(12);
  for (auto s : {MetricMeasureSpace::interval(0, 1, 24), MetricMeasureSpace::circle(2, 20)}) {
    for (double cap : {1.2, 3.0}) {
      const auto opp = random_density(s, 1.5, rng);
      RestrictedActionSet set{1.0, {2, 1}, 0.0};
      set.cap = cap * set.jensen_bound(s);
      const auto br = best_response_restricted(s, opp, set);
      CHECK(br.converged);
      CHECK(br.gap <= 1e-10);
      // no feasible mix toward a random point improves the value
      const auto uni = Density::uniform(s, 1.0);
      for (int k = 0; k < 10; ++k) {
        auto r = random_density(s, 1.0, rng);
        double t = 1.0;
        while (set.theta_integral(s, (t * r + (1 - t) * uni).values()) > set.cap) t *= 0.8;
        const auto g = t * r + (1 - t) * uni;
        CHECK(value_vs_aggregate(s, g, opp, kSolverRule) <= br.value + 1e-12);
      }
    }
  }
}

TEST_CASE("open-loop Frank-Wolfe improves on its start") {
  auto s = MetricMeasureSpace::interval(0, 1, 32);
  const auto opp = Density::uniform(s, 1.0);
  FrankWolfeOptions o;
  o.step = StepRule::OpenLoop;
  o.polish = false;
  o.max_iters = 300;
  const RestrictedActionSet set{1.0, {2, 1}, 2.0};
  const auto br = best_response_restricted(s, opp, set, o);
  CHECK(br.value > value_vs_aggregate(s, Density::uniform(s, 1.0), opp, kSolverRule));
  CHECK(br.iterations <= 300);
}

TEST_CASE("proportionality check") {
  auto s = MetricMeasureSpace::interval(0, 1, 16);
  std::mt19937_64 rng(2);
  const auto g = random_density(s, 1.0, rng);
  CHECK(check_proportionality(Profile(s, {2.0 * g, 3.0 * g})) < 1e-15);
  std::vector<double> spike(16, 0.0);
  spike[3] = 16.0;
  CHECK(check_proportionality(Profile(s, {Density::uniform(s, 1.0), Density(s, spike)})) > 0.1);
}

TEST_CASE("dynamics on the circle end at the constant profile") {
  auto c = MetricMeasureSpace::circle(1, 24);
  DynamicsOptions o;
  o.tol = 1e-10;
  const auto rep = br_dynamics(c, {1, 2}, 2, 10, o, random_feasible_profile(c, {1, 2}, 2, 10, 3));
  CHECK(rep.converged);
  CHECK(rep.proportionality < 1e-8);
  for (std::size_t x = 0; x < c.size(); ++x) {
    CHECK(rep.profile[0][x] == Approx(1.0).epsilon(1e-7));
    CHECK(rep.profile[1][x] == Approx(2.0).epsilon(1e-7));
  }
  for (double v : rep.improvements) CHECK(v < 1e-10);
  CHECK(rep.nash_residual < 1e-10);
}

TEST_CASE("dynamics from two starts agree on the interval") {
  auto s = MetricMeasureSpace::interval(0, 1, 16);
  DynamicsOptions o;
  o.tol = 1e-10;
  const auto a = br_dynamics(s, {1, 2}, 2, 4, o, random_feasible_profile(s, {1, 2}, 2, 4, 1));
  const auto b = br_dynamics(s, {1, 2}, 2, 4, o, random_feasible_profile(s, {1, 2}, 2, 4, 2));
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  double d = 0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t x = 0; x < s.size(); ++x) d = std::max(d, std::abs(a.profile[i][x] - b.profile[i][x]));
  CHECK(d < 1e-8);
  CHECK(a.proportionality < 1e-8);
  for (double v : a.improvements) CHECK(v < 1e-10);
}

TEST_CASE("dynamics reject infeasible caps") {
  auto s = MetricMeasureSpace::interval(0, 1, 16);
  CHECK_THROWS_AS(br_dynamics(s, {1, 2}, 2, 0.01), InfeasibleError);
  CHECK_THROWS_AS(br_dynamics(s, {1, 2}, 2, 4, {.gamma = 0.0}), ValidationError);
}
