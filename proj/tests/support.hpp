#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hotelling/space.hpp"

namespace testing_support {

using hotelling::Density;
using hotelling::MetricMeasureSpace;

inline std::vector<double> random_shape(std::size_t n, std::mt19937_64& rng, double zero_prob = 0.2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng) < zero_prob ? 0.0 : u(rng);
  v[rng() % n] += 0.5;
  return v;
}

inline Density random_density(const MetricMeasureSpace& s, double budget, std::mt19937_64& rng,
                              double zero_prob = 0.2) {
  return Density::normalized(s, random_shape(s.size(), rng, zero_prob), budget);
}

// Random points in the unit square with Euclidean distances.
inline MetricMeasureSpace random_custom(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> pts(n), dist(n, std::vector<double>(n));
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {u(rng), u(rng)};
    w[i] = 0.5 + u(rng);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  return MetricMeasureSpace::custom(pts, dist, w);
}

inline std::vector<MetricMeasureSpace> zoo(std::mt19937_64& rng) {
  std::vector<MetricMeasureSpace> out;
  out.push_back(MetricMeasureSpace::interval(-0.5, 0.5, 17));
  out.push_back(MetricMeasureSpace::interval(0.0, 2.0, 24));
  out.push_back(MetricMeasureSpace::circle(1.0, 15));
  out.push_back(MetricMeasureSpace::circle(6.0, 20));
  out.push_back(MetricMeasureSpace::torus(1.0, 2.0, 4, 6));
  out.push_back(MetricMeasureSpace::two_interval_conflicting(7));
  out.push_back(random_custom(19, rng));
  return out;
}

}  // namespace testing_support
