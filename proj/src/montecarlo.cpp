#include "hotelling/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hotelling/error.hpp"
#include "hotelling/parallel.hpp"

namespace hotelling::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Site {
  double t;
  std::size_t player;
};

void voronoi_1d(const MetricMeasureSpace& space, Realization& r) {
  std::vector<Site> sites;
  for (std::size_t i = 0; i < r.points.size(); ++i)
    for (double t : r.points[i].coords) sites.push_back({t, i});
  if (sites.empty()) return;
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return a.t < b.t || (a.t == b.t && a.player < b.player);
  });
  // coincident points: the lowest player index keeps the location
  std::vector<Site> distinct;
  for (const auto& s : sites) {
    if (!distinct.empty() && distinct.back().t == s.t) {
      if (distinct.back().player != s.player) ++r.coincident;
      continue;
    }
    distinct.push_back(s);
  }
  const std::size_t k = distinct.size();
  if (space.kind() == SpaceKind::Interval) {
    double left = space.lower();
    for (std::size_t j = 0; j < k; ++j) {
      const double right = j + 1 < k ? 0.5 * (distinct[j].t + distinct[j + 1].t) : space.upper();
      r.captured[distinct[j].player] += right - left;
      left = right;
    }
    return;
  }
  const double L = space.upper();
  if (k == 1) {
    r.captured[distinct[0].player] += L;
    return;
  }
  // each point owns half of the gap on either side
  for (std::size_t j = 0; j < k; ++j) {
    const double next = j + 1 < k ? distinct[j + 1].t : distinct[0].t + L;
    const double prev = j > 0 ? distinct[j - 1].t : distinct[k - 1].t - L;
    r.captured[distinct[j].player] += 0.5 * (next - prev);
  }
}

void voronoi_cells(const MetricMeasureSpace& space, Realization& r, TiePolicy policy) {
  // distinct occupied cells, each with the set of players sitting there
  std::vector<std::pair<std::size_t, std::size_t>> occupied;  // (cell, player)
  for (std::size_t i = 0; i < r.points.size(); ++i)
    for (std::size_t c : r.points[i].cells) occupied.emplace_back(c, i);
  if (occupied.empty()) return;
  std::sort(occupied.begin(), occupied.end());
  occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());

  const std::size_t n = space.size();
  std::vector<std::size_t> tied;
  for (std::size_t z = 0; z < n; ++z) {
    double best = INFINITY;
    std::size_t best_cell = n;
    bool tie = false;
    tied.clear();
    for (const auto& [c, player] : occupied) {
      const double d = space.distance(z, c);
      if (d < best) {
        best = d;
        best_cell = c;
        tie = false;
        tied.assign(1, player);
      } else if (d == best) {
        if (c != best_cell || player != tied.front()) tie = true;
        tied.push_back(player);
      }
    }
    const double w = space.weight(z);
    if (!tie) {
      r.captured[tied.front()] += w;
      continue;
    }
    r.tie_affected += w;
    if (policy == TiePolicy::DropTies) {
      r.uncovered += w;
      continue;
    }
    std::sort(tied.begin(), tied.end());
    tied.erase(std::unique(tied.begin(), tied.end()), tied.end());
    for (std::size_t p : tied) r.captured[p] += w / static_cast<double>(tied.size());
  }
}

}  // namespace

Rng substream(std::uint64_t seed, std::uint64_t replication, std::uint64_t player) {
  return Rng(splitmix64(splitmix64(splitmix64(seed) ^ replication) ^ player));
}

bool Realization::empty() const {
  return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.size() == 0; });
}

PointSampler::PointSampler(const MetricMeasureSpace& space, const Density& f)
    : space_(&space), budget_(f.budget()), cdf_(space.size()) {
  if (f.size() != space.size()) throw ValidationError("sampler: density size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    acc += space.weight(i) * f[i];
    cdf_[i] = acc;
  }
}

PlayerPoints PointSampler::draw(Rng& rng) const {
  PlayerPoints out;
  if (budget_ <= 0.0 || cdf_.back() <= 0.0) return out;
  const auto count = std::poisson_distribution<long>(budget_)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool exact = space_->exact_1d();
  for (long k = 0; k < count; ++k) {
    const double u = unit(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    // u can round up to the total; fall back to the last cell carrying mass
    if (it == cdf_.end()) it = std::lower_bound(cdf_.begin(), cdf_.end(), cdf_.back());
    const auto c = static_cast<std::size_t>(it - cdf_.begin());
    if (exact) {
      const double h = space_->cell_width();
      double t = space_->lower() + (static_cast<double>(c) + unit(rng)) * h;
      t = std::min(t, space_->lower() + static_cast<double>(c + 1) * h);
      out.coords.push_back(t);
    } else {
      out.cells.push_back(c);
    }
  }
  return out;
}

PlayerPoints sample_player_points(const MetricMeasureSpace& space, const Density& f, Rng& rng) {
  return PointSampler(space, f).draw(rng);
}

Realization voronoi_payoffs(const MetricMeasureSpace& space, std::vector<PlayerPoints> points,
                            TiePolicy policy) {
  Realization r;
  r.points = std::move(points);
  r.captured.assign(r.points.size(), 0.0);
  if (space.exact_1d())
    voronoi_1d(space, r);
  else
    voronoi_cells(space, r, policy);
  return r;
}

namespace {

struct BlockSums {
  std::vector<double> sum, sumsq;
  double uncovered = 0.0, tie = 0.0, max_err = 0.0;
  std::size_t coincident = 0;
};

std::vector<std::pair<std::size_t, std::size_t>> rep_blocks(std::size_t reps) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t nb = std::max<std::size_t>(1, std::min(reps, kReductionBlocks));
  for (std::size_t b = 0; b < nb; ++b) out.emplace_back(b * reps / nb, (b + 1) * reps / nb);
  return out;
}

}  // namespace

PayoffEstimate estimate_values(const Profile& profile, const SampleConfig& config) {
  if (config.replications < 1) throw ValidationError("replications must be >= 1");
  const auto& space = profile.space();
  const std::size_t np = profile.players();
  std::vector<PointSampler> samplers;
  for (std::size_t i = 0; i < np; ++i) samplers.emplace_back(space, profile[i]);

  const auto blocks = rep_blocks(config.replications);
  std::vector<BlockSums> partial(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockSums s;
    s.sum.assign(np, 0.0);
    s.sumsq.assign(np, 0.0);
    for (std::size_t rep = blocks[b].first; rep < blocks[b].second; ++rep) {
      std::vector<PlayerPoints> pts(np);
      for (std::size_t i = 0; i < np; ++i) {
        auto rng = substream(config.seed, rep, i);
        pts[i] = samplers[i].draw(rng);
      }
      const auto r = voronoi_payoffs(space, std::move(pts), config.tie_policy);
      double total = r.uncovered;
      for (std::size_t i = 0; i < np; ++i) {
        s.sum[i] += r.captured[i];
        s.sumsq[i] += r.captured[i] * r.captured[i];
        total += r.captured[i];
      }
      const double expect = r.empty() ? 0.0 : space.total_mass();
      s.max_err = std::max(s.max_err, std::abs(total - expect));
      s.uncovered += r.uncovered;
      s.tie += r.tie_affected;
      s.coincident += r.coincident;
    }
    partial[b] = std::move(s);
  }

  PayoffEstimate est;
  est.replications = config.replications;
  est.seed = config.seed;
  std::vector<double> sum(np, 0.0), sumsq(np, 0.0);
  for (const auto& s : partial) {
    for (std::size_t i = 0; i < np; ++i) {
      sum[i] += s.sum[i];
      sumsq[i] += s.sumsq[i];
    }
    est.uncovered_mean += s.uncovered;
    est.tie_affected_mean += s.tie;
    est.max_conservation_error = std::max(est.max_conservation_error, s.max_err);
    est.coincident += s.coincident;
  }
  const auto R = static_cast<double>(config.replications);
  for (std::size_t i = 0; i < np; ++i) {
    const double mean = sum[i] / R;
    const double var = R > 1 ? std::max(0.0, (sumsq[i] - R * mean * mean) / (R - 1)) : 0.0;
    est.mean.push_back(mean);
    est.std_error.push_back(std::sqrt(var / R));
  }
  est.uncovered_mean /= R;
  est.tie_affected_mean /= R;
  return est;
}

UncoveredEstimate estimate_uncovered(const MetricMeasureSpace& space, const Density& f_total,
                                     const SampleConfig& config) {
  if (config.replications < 1) throw ValidationError("replications must be >= 1");
  const PointSampler sampler(space, f_total);
  const auto blocks = rep_blocks(config.replications);
  struct Acc {
    double sum = 0.0, sumsq = 0.0;
    std::size_t nonempty = 0;
  };
  std::vector<Acc> partial(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Acc a;
    for (std::size_t rep = blocks[b].first; rep < blocks[b].second; ++rep) {
      auto rng = substream(config.seed, rep, 0);
      std::vector<PlayerPoints> pts{sampler.draw(rng)};
      if (pts[0].size() == 0) continue;
      const auto r = voronoi_payoffs(space, std::move(pts), config.tie_policy);
      ++a.nonempty;
      a.sum += r.uncovered;
      a.sumsq += r.uncovered * r.uncovered;
    }
    partial[b] = a;
  }
  UncoveredEstimate est;
  est.replications = config.replications;
  double sum = 0.0, sumsq = 0.0;
  for (const auto& a : partial) {
    sum += a.sum;
    sumsq += a.sumsq;
    est.nonempty += a.nonempty;
  }
  if (est.nonempty > 0) {
    const auto m = static_cast<double>(est.nonempty);
    est.mean = sum / m;
    const double var = m > 1 ? std::max(0.0, (sumsq - m * est.mean * est.mean) / (m - 1)) : 0.0;
    est.std_error = std::sqrt(var / m);
  }
  return est;
}

}  // namespace hotelling::mc
