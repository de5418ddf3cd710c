#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hotelling/montecarlo.hpp"
#include "hotelling/parallel.hpp"
#include "support.hpp"

using namespace hotelling;
using namespace testing_support;
using doctest::Approx;

TEST_CASE("Poisson counts") {
  auto s = MetricMeasureSpace::interval(0, 1, 16);
  auto f = Density::uniform(s, 2.0);
  mc::PointSampler sampler(s, f);
  const int reps = 100000;
  double sum = 0, sumsq = 0, zeros = 0;
  for (int r = 0; r < reps; ++r) {
    auto rng = mc::substream(1, r, 0);
    const double k = static_cast<double>(sampler.draw(rng).size());
    sum += k;
    sumsq += k * k;
    zeros += k == 0;
  }
  const double mean = sum / reps;
  CHECK(std::abs(mean - 2.0) < 3 * std::sqrt(2.0 / reps));
  const double p0 = std::exp(-2.0);
  CHECK(std::abs(zeros / reps - p0) < 3 * std::sqrt(p0 * (1 - p0) / reps));

  mc::Rng rng(3);
  auto none = mc::sample_player_points(s, Density::zero(s), rng);
  CHECK(none.size() == 0);
}

TEST_CASE("points stay in the support") {
  auto s = MetricMeasureSpace::interval(-0.5, 0.5, 32);
  std::vector<double> v(32, 0.0);
  for (std::size_t i = 0; i < 16; ++i) v[i] = 1.0;
  Density f = Density::normalized(s, v, 5.0);
  for (int r = 0; r < 2000; ++r) {
    auto rng = mc::substream(9, r, 0);
    for (double t : mc::sample_player_points(s, f, rng).coords) {
      CHECK(t >= -0.5);
      CHECK(t <= 0.0);
    }
  }
}

TEST_CASE("Voronoi payoffs in 1-D") {
  auto s = MetricMeasureSpace::interval(-0.5, 0.5, 8);
  std::vector<mc::PlayerPoints> pts(2);
  pts[0].coords = {-0.25};
  pts[1].coords = {0.25};
  auto r = mc::voronoi_payoffs(s, pts);
  CHECK(r.captured[0] == Approx(0.5));
  CHECK(r.captured[1] == Approx(0.5));

  auto empty = mc::voronoi_payoffs(s, std::vector<mc::PlayerPoints>(2));
  CHECK(empty.captured[0] == 0.0);
  CHECK(empty.uncovered == 0.0);

  auto c = MetricMeasureSpace::circle(2 * std::numbers::pi, 16);
  std::vector<mc::PlayerPoints> lone(2);
  lone[0].coords = {1.234};
  CHECK(mc::voronoi_payoffs(c, lone).captured[0] == Approx(2 * std::numbers::pi));

  std::vector<mc::PlayerPoints> tie(2);
  tie[0].coords = {0.1};
  tie[1].coords = {0.1, 0.3};
  auto t = mc::voronoi_payoffs(s, tie);
  CHECK(t.coincident == 1);
  CHECK(t.captured[0] == Approx(0.7));
  CHECK(t.captured[1] == Approx(0.3));
}

TEST_CASE("conflicting space leaves the empty interval uncovered") {
  auto s = MetricMeasureSpace::two_interval_conflicting(8);
  std::vector<mc::PlayerPoints> pts(2);
  pts[0].cells = {1};
  pts[1].cells = {6};
  auto r = mc::voronoi_payoffs(s, pts);
  CHECK(r.uncovered == Approx(1.0));
  CHECK(r.tie_affected == Approx(1.0));
  auto split = mc::voronoi_payoffs(s, pts, mc::TiePolicy::SplitEqually);
  CHECK(split.uncovered == 0.0);
  CHECK(split.captured[0] + split.captured[1] == Approx(2.0));
}

TEST_CASE("per-replication conservation in 1-D") {
  std::mt19937_64 rng(2);
  for (auto s : {MetricMeasureSpace::interval(0, 1, 64), MetricMeasureSpace::circle(3, 64)}) {
    Profile p(s, {random_density(s, 1.0, rng), random_density(s, 2.0, rng)});
    auto est = mc::estimate_values(p, {.seed = 4, .replications = 20000});
    CHECK(est.max_conservation_error < 1e-12);
    CHECK(est.uncovered_mean == 0.0);
    CHECK(est.coincident == 0);
  }
}

TEST_CASE("uncovered measure is zero in 1-D") {
  auto s = MetricMeasureSpace::circle(1, 50);
  auto u = mc::estimate_uncovered(s, Density::uniform(s, 2.0), {.seed = 1, .replications = 10000});
  CHECK(u.mean == 0.0);
  CHECK(u.nonempty > 8000);
}

TEST_CASE("estimates are reproducible and independent of threads") {
  auto s = MetricMeasureSpace::interval(0, 1, 32);
  Profile p(s, {Density::uniform(s, 1.0), Density::uniform(s, 2.0)});
  const int saved = num_threads();
  set_num_threads(1);
  auto a = mc::estimate_values(p, {.seed = 7, .replications = 5000});
  set_num_threads(3);
  auto b = mc::estimate_values(p, {.seed = 7, .replications = 5000});
  set_num_threads(saved);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  auto c = mc::estimate_values(p, {.seed = 8, .replications = 5000});
  CHECK(a.mean != c.mean);
}

TEST_CASE("constant circle profile matches the closed form") {
  auto s = MetricMeasureSpace::circle(2 * std::numbers::pi, 256);
  Profile p(s, {Density::uniform(s, 1.0), Density::uniform(s, 2.0)});
  auto est = mc::estimate_values(p, {.seed = 7, .replications = 100000});
  CHECK(std::abs(est.mean[0] - 1.99013) < 3 * est.std_error[0]);
}
