#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hotelling/analytic.hpp"
#include "hotelling/space.hpp"

namespace hotelling::mc {

/// Name of the generator family, recorded in output metadata.
inline constexpr const char* kRngName = "mt19937_64/splitmix64-substreams";

using Rng = std::mt19937_64;

/// Independent stream for (replication, player): the seed is a splitmix64
/// hash of the triple, so any replication can be regenerated on its own.
Rng substream(std::uint64_t seed, std::uint64_t replication, std::uint64_t player);

enum class TiePolicy { DropTies, SplitEqually };

struct SampleConfig {
  std::uint64_t seed = 0;
  std::size_t replications = 10000;
  TiePolicy tie_policy = TiePolicy::DropTies;
};

/// Points of one player: continuum coordinates on exact 1-D spaces, cell
/// indices otherwise (exactly one of the two is filled).
struct PlayerPoints {
  std::vector<double> coords;
  std::vector<std::size_t> cells;
  std::size_t size() const { return coords.size() + cells.size(); }
};

struct Realization {
  std::vector<PlayerPoints> points;
  std::vector<double> captured;
  double uncovered = 0.0;
  double tie_affected = 0.0;
  /// 1-D only: coincident points of different players (probability zero).
  std::size_t coincident = 0;
  bool empty() const;
};

/// Draws Poisson(rho) points with locations i.i.d. proportional to f * eta.
class PointSampler {
 public:
  PointSampler(const MetricMeasureSpace& space, const Density& f);
  PlayerPoints draw(Rng& rng) const;

 private:
  const MetricMeasureSpace* space_;
  double budget_;
  std::vector<double> cdf_;  // cumulative cell masses
};

PlayerPoints sample_player_points(const MetricMeasureSpace& space, const Density& f, Rng& rng);

/// Voronoi payoffs of one configuration: exact in 1-D, cell-based otherwise.
Realization voronoi_payoffs(const MetricMeasureSpace& space, std::vector<PlayerPoints> points,
                            TiePolicy policy = TiePolicy::DropTies);

struct PayoffEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double uncovered_mean = 0.0;
  double tie_affected_mean = 0.0;
  /// max over replications of |sum captured + uncovered - eta(D) 1(points exist)|
  double max_conservation_error = 0.0;
  std::size_t coincident = 0;
};

PayoffEstimate estimate_values(const Profile& profile, const SampleConfig& config);

struct UncoveredEstimate {
  double mean = 0.0;  // conditional on at least one point
  double std_error = 0.0;
  std::size_t nonempty = 0;
  std::size_t replications = 0;
};

UncoveredEstimate estimate_uncovered(const MetricMeasureSpace& space, const Density& f_total,
                                     const SampleConfig& config);

}  // namespace hotelling::mc
