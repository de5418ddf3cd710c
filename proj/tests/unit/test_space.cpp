#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hotelling/error.hpp"
#include "hotelling/space.hpp"

using namespace hotelling;
using doctest::Approx;

TEST_CASE("interval cells") {
  auto s = MetricMeasureSpace::interval(-0.5, 0.5, 4);
  CHECK(s.total_mass() == Approx(1.0));
  const double pts[] = {-0.375, -0.125, 0.125, 0.375};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(s.weight(i) == Approx(0.25));
    CHECK(s.cells()[i].point[0] == Approx(pts[i]));
  }
  auto t = MetricMeasureSpace::interval(-0.5, 0.5, 10);
  CHECK(t.distance(0, 9) == Approx(0.9));
  CHECK(MetricMeasureSpace::interval(0, 2, 8).total_mass() == Approx(2.0));
  CHECK_THROWS_AS(MetricMeasureSpace::interval(1, 0, 4), ValidationError);
  CHECK_THROWS_AS(MetricMeasureSpace::interval(0, 1, 1), ValidationError);
}

TEST_CASE("circle geodesics") {
  auto s = MetricMeasureSpace::circle(2 * std::numbers::pi, 4);
  CHECK(s.distance(0, 2) == Approx(std::numbers::pi));
  CHECK(s.total_mass() == Approx(2 * std::numbers::pi));
  auto u = MetricMeasureSpace::circle(1.0, 10);
  double dmax = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) dmax = std::max(dmax, u.distance(i, j));
  CHECK(dmax == Approx(0.5));
  CHECK_THROWS_AS(MetricMeasureSpace::circle(1.0, 2), ValidationError);
}

TEST_CASE("two interval space") {
  auto s = MetricMeasureSpace::two_interval_conflicting(4);
  CHECK(s.size() == 8);
  CHECK(s.total_mass() == Approx(2.0));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 4; j < 8; ++j) CHECK(s.distance(i, j) == 2.0);
  CHECK_NOTHROW(s.validate_metric());
}

TEST_CASE("custom spaces") {
  auto two = MetricMeasureSpace::custom({{0}, {1}}, {{0, 1}, {1, 0}}, {1, 1});
  CHECK(two.total_mass() == Approx(2.0));
  CHECK_THROWS_AS(MetricMeasureSpace::custom({{0}, {1}, {2}}, {{0, 3, 1}, {3, 0, 1}, {1, 1, 0}},
                                             {1, 1, 1}),
                  ValidationError);
  auto line = MetricMeasureSpace::custom({{0}, {1}, {2}}, {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}},
                                         {1, 1, 1});
  CHECK(line.total_mass() == Approx(3.0));
  CHECK_THROWS_AS(MetricMeasureSpace::custom({{0}, {1}}, {{0, 1}, {2, 0}}, {1, 1}),
                  ValidationError);
  CHECK_THROWS_AS(MetricMeasureSpace::custom({{0}, {1}}, {{0, 1}, {1, 0}}, {1, 0}),
                  ValidationError);
}

TEST_CASE("triangle error names the triple") {
  try {
    MetricMeasureSpace::custom({{0}, {1}, {2}}, {{0, 3, 1}, {3, 0, 1}, {1, 1, 0}}, {1, 1, 1});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("triple (0,2,1)") != std::string::npos);
  }
}

TEST_CASE("ball masses") {
  auto s = MetricMeasureSpace::interval(-0.5, 0.5, 8);
  auto f = Density::uniform(s, 1.0);
  // y = -0.0625 (cell 3), x = 0.1875 (cell 5): ball [-0.3125, 0.1875]
  CHECK(ball_mass(s, f, 3, 5) == Approx(0.5));
  CHECK(ball_mass_at(s, f.values(), 0.0, 0.25) == Approx(0.5));
  auto g = Density::uniform(s, 3.0);
  CHECK(ball_mass_at(s, g.values(), -0.5, 0.5) == Approx(3.0));
  CHECK(ball_mass(s, g, 0, 7) == Approx(3.0 * (1.0 - 0.0625)));
  CHECK(ball_mass(s, g, 4, 4) == 0.0);

  auto c = MetricMeasureSpace::circle(2 * std::numbers::pi, 64);
  auto h = Density::uniform(c, 3.0);
  CHECK(ball_mass_at(c, h.values(), 0.0, 1.0) == Approx(3.0 / std::numbers::pi));
  CHECK(ball_mass(c, h, 0, 32) == Approx(3.0));
}

TEST_CASE("ball mass is monotone in the radius") {
  for (auto s : {MetricMeasureSpace::interval(0, 1, 37), MetricMeasureSpace::circle(1, 40)}) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + std::sin(3.0 * i);
    Density f(s, v);
    for (std::size_t y : {0ul, 5ul, 20ul}) {
      std::vector<std::pair<double, double>> by_radius;
      for (std::size_t x = 0; x < s.size(); ++x)
        by_radius.emplace_back(s.distance(x, y), ball_mass(s, f, y, x));
      std::sort(by_radius.begin(), by_radius.end());
      for (std::size_t k = 1; k < by_radius.size(); ++k)
        CHECK(by_radius[k].second >= by_radius[k - 1].second - 1e-15);
    }
  }
}

TEST_CASE("torus quadrature ball") {
  auto s = MetricMeasureSpace::torus(1, 1, 4, 4);
  auto f = Density::uniform(s, 1.0);
  CHECK(ball_mass(s, f, 0, 0) == 0.0);
  // nearest neighbours: centre full, the four at distance 1/4 at half weight
  CHECK(ball_mass(s, f, 0, 1) == Approx(1.0 / 16 + 0.5 * 4.0 / 16));
  CHECK_NOTHROW(s.validate_metric());
}

TEST_CASE("density budgets") {
  auto s = MetricMeasureSpace::interval(0, 2, 4);
  CHECK_THROWS_AS(Density(s, {1, 1, 1, 1}, 3.0), ValidationError);
  CHECK_THROWS_AS(Density(s, {1, -1, 1, 1}), ValidationError);
  auto f = Density::normalized(s, {1, 2, 3, 4}, 5.0);
  CHECK(mass_of(s, f.values()) == Approx(5.0));
  CHECK((2.0 * f).budget() == Approx(10.0));
}

TEST_CASE("tie mass") {
  const std::size_t n = 16;
  auto s = MetricMeasureSpace::two_interval_conflicting(n);
  CHECK(std::abs(tie_mass(s, Density::uniform(s, 2.0)) - 2.0) <= 10.0 / n);

  auto iv = MetricMeasureSpace::interval(-0.5, 0.5, 64);
  CHECK(tie_mass(iv, Density::uniform(iv, 1.0)) <= 3.0 / 64);

  auto one = MetricMeasureSpace::custom({{0}}, {{0}}, {1});
  CHECK(tie_mass(one, Density::uniform(one, 1.0)) == 0.0);
}

TEST_CASE("tie mass shrinks under refinement") {
  for (bool circle : {false, true}) {
    double prev = -1;
    for (std::size_t n : {32, 64, 128, 256}) {
      auto s = circle ? MetricMeasureSpace::circle(1, n) : MetricMeasureSpace::interval(0, 1, n);
      const double t = tie_mass(s, Density::uniform(s, 1.0));
      if (prev >= 0) CHECK(t <= 0.75 * prev);
      prev = t;
    }
  }
}
