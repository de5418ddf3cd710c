#include "hotelling/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <cstdio>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include "hotelling/error.hpp"
#include "hotelling/kernels.hpp"
#include "hotelling/parallel.hpp"

namespace hotelling {

double ThetaSpec::operator()(double x) const { return std::pow(x / alpha, p); }

double ThetaSpec::derivative(double x) const {
  return p / alpha * std::pow(x / alpha, p - 1.0);
}

double ThetaSpec::inverse_derivative(double t) const {
  if (t <= 0.0) return 0.0;
  return alpha * std::pow(t * alpha / p, 1.0 / (p - 1.0));
}

void ThetaSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("theta: need p > 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("theta: need alpha > 0");
}

double RestrictedActionSet::jensen_bound(const MetricMeasureSpace& space) const {
  const double eta = space.total_mass();
  return eta * theta(budget / eta);
}

bool RestrictedActionSet::feasible(const MetricMeasureSpace& space) const {
  return jensen_bound(space) <= cap * (1.0 + 1e-12);
}

void RestrictedActionSet::require_feasible(const MetricMeasureSpace& space) const {
  theta.validate();
  if (!(budget > 0.0)) throw ValidationError("action set: budget must be > 0");
  if (!(cap > 0.0)) throw ValidationError("action set: cap K must be > 0");
  if (!feasible(space)) {
    std::ostringstream os;
    os << "action set is empty: K = " << cap << " is below the Jensen bound eta(D) Theta(rho/eta(D)) = "
       << jensen_bound(space);
    throw InfeasibleError(os.str());
  }
}

double RestrictedActionSet::theta_integral(const MetricMeasureSpace& space,
                                           std::span<const double> g) const {
  double acc = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) acc += space.weight(x) * theta(g[x]);
  return acc;
}

double nash_residual(const MetricMeasureSpace& space, const Density& f, Quadrature rule) {
  const auto psi = psi_bar_all(space, f, rule);
  double best = psi[0], v = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    best = std::max(best, psi[x]);
    v += space.weight(x) * f[x] * psi[x];
  }
  return std::max(0.0, f.budget() * best - v);
}

namespace {

// Solution of the linear problem with its KKT multipliers: on the water-filled
// branch g = c (s - lambda)_+^{1/(p-1)}.
struct WaterLevel {
  std::vector<double> g;
  double lambda = 0.0;
  double c = 0.0;
  bool filled = false;  // false: uniform or concentrated solution
};

WaterLevel water_fill(const MetricMeasureSpace& space, std::span<const double> scores,
                      const RestrictedActionSet& set) {
  set.require_feasible(space);
  const std::size_t n = space.size();
  if (scores.size() != n) throw ValidationError("lmo: score size mismatch");
  const double rho = set.budget;
  WaterLevel out;
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double smin = *lo_it, smax = *hi_it;
  if (smax - smin <= 1e-14 * std::max(1.0, std::abs(smax)) ||
      set.cap - set.jensen_bound(space) <= 1e-12 * set.cap) {
    out.g.assign(n, rho / space.total_mass());
    return out;
  }

  // the Theta cap inactive: spread the budget over the top-score cells
  double top_mass = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    if (scores[x] == smax) top_mass += space.weight(x);
  out.g.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    if (scores[x] == smax) out.g[x] = rho / top_mass;
  if (set.theta_integral(space, out.g) <= set.cap) return out;

  // The Theta integral of the mass-normalised shape increases with lambda,
  // from the Jensen bound (lambda -> -inf) to the concentrated value
  // (lambda -> smax); bisect it onto the cap.
  const double q = 1.0 / (set.theta.p - 1.0);
  auto& g = out.g;
  auto shape = [&](double lambda) {
    const double top = smax - lambda;
    double mass = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double r = std::max(0.0, scores[x] - lambda) / top;
      g[x] = r > 0.0 ? std::pow(r, q) : 0.0;
      mass += space.weight(x) * g[x];
    }
    const double scale = rho / mass;
    for (auto& v : g) v *= scale;
    out.lambda = lambda;
    out.c = scale / std::pow(top, q);
    return set.theta_integral(space, g);
  };
  double spread = smax - smin;
  double lo = smin - spread;
  for (int k = 0; shape(lo) > set.cap; ++k) {
    if (k > 200) throw InternalError("lmo: failed to bracket the water level");
    spread *= 2.0;
    lo = smin - spread;
  }
  double hi = smax;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shape(mid) <= set.cap ? lo : hi) = mid;
  }
  shape(lo);
  out.filled = true;
  return out;
}

}  // namespace

Density lmo_restricted(const MetricMeasureSpace& space, std::span<const double> scores,
                       const RestrictedActionSet& set) {
  return Density(space, water_fill(space, scores, set).g, set.budget);
}

namespace {

// V(f + t d) for the shell-average rule, reduced to per-centre shell sums:
// own coefficient C, total mass B, each affine in t
class LineModel {
 public:
  LineModel(const MetricMeasureSpace& space, const kernels::ShellMap& shells,
            const Density& f_own, const Density& f_opp, const std::vector<double>& d)
      : space_(space), offset_(space.size() + 1, 0) {
    const std::size_t n = space.size();
    for (std::size_t y = 0; y < n; ++y) offset_[y + 1] = offset_[y] + shells.count[y];
    rows_.assign(offset_[n], Row{});
    for (std::size_t y = 0; y < n; ++y) {
      Row* r = rows_.data() + offset_[y];
      for (std::size_t x = 0; x < n; ++x) {
        const double w = space.weight(x);
        Row& k = r[shells(y, x)];
        k.c0 += w * f_own[x];
        k.dc += w * d[x];
        k.b0 += w * (f_own[x] + f_opp[x]);
        k.db += w * d[x];
      }
    }
  }

  double slope(double t) const {
    const std::size_t n = space_.size();
    std::vector<double> rows(n);
#pragma omp parallel for schedule(static)
    for (std::size_t y = 0; y < n; ++y) {
      double inner = 0.0, dinner = 0.0, acc = 0.0;
      for (std::size_t k = offset_[y]; k < offset_[y + 1]; ++k) {
        const Row& r = rows_[k];
        const double b = r.b0 + t * r.db, c = r.c0 + t * r.dc;
        const double ph = kernels::phi(b);
        acc += std::exp(-inner) * (r.dc * ph + c * (r.db * kernels::phi_prime(b) - dinner * ph));
        inner += b;
        dinner += r.db;
      }
      rows[y] = space_.weight(y) * acc;
    }
    double out = 0.0;
    for (double v : rows) out += v;
    return out;
  }

 private:
  struct Row {
    double c0 = 0.0, dc = 0.0, b0 = 0.0, db = 0.0;
  };
  const MetricMeasureSpace& space_;
  std::vector<std::size_t> offset_;
  std::vector<Row> rows_;
};

// exact maximiser of the concave V(f + t d) on [0, 1]
double line_search(const MetricMeasureSpace& space, const kernels::ShellMap& shells,
                   const Density& f_own, const Density& f_opp, const std::vector<double>& d) {
  const LineModel model(space, shells, f_own, f_opp, d);
  if (model.slope(1.0) >= 0.0) return 1.0;
  if (model.slope(0.0) <= 0.0) return 0.0;
  std::uintmax_t iters = 100;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      [&](double t) { return model.slope(t); }, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(50),
      iters);
  return 0.5 * (lo + hi);
}

std::vector<double> scores_from_gradient(const MetricMeasureSpace& space,
                                         const std::vector<double>& g) {
  std::vector<double> s(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) s[x] = g[x] / space.weight(x);
  return s;
}

}  // namespace

namespace {

// s = grad V / w for an arbitrary (possibly slightly negative) own vector
std::vector<double> own_scores(const MetricMeasureSpace& space, std::span<const double> g,
                               std::span<const double> opp) {
  const std::size_t n = space.size();
  std::vector<double> total(n), coef(n);
  for (std::size_t x = 0; x < n; ++x) {
    total[x] = g[x] + opp[x];
    coef[x] = space.weight(x) * g[x];
  }
  const auto e = kernels::parallel::capture_matrix(space, total, kSolverRule);
  auto s = kernels::parallel::psi_bar(space, e);
  const auto adj = kernels::parallel::ball_adjoint(space, total, coef, kSolverRule);
  for (std::size_t x = 0; x < n; ++x) s[x] -= adj[x];
  return s;
}

double gap_at(const MetricMeasureSpace& space, std::span<const double> scores,
              std::span<const double> g, const RestrictedActionSet& set) {
  const auto top = water_fill(space, scores, set);
  double gap = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    gap += space.weight(x) * scores[x] * (top.g[x] - g[x]);
  return std::max(0.0, gap);
}

double fischer(double a, double b) { return a + b - std::hypot(a, b); }

// Semismooth Newton on the KKT system of the best response with multipliers
// lambda (mass) and mu >= 0 (Theta cap):
//   0 <= g  _|_  lambda + mu Theta'(g) - s(g) >= 0,   int g = rho,
//   0 <= mu _|_  1 - int Theta(g) / K >= 0,
// each complementarity written with the Fischer-Burmeister function.
// The Jacobian of the scores s is taken by central differences of the exact
// gradient.
std::optional<std::vector<double>> newton_polish(const MetricMeasureSpace& space,
                                                 std::span<const double> opp,
                                                 const RestrictedActionSet& set,
                                                 std::vector<double> g) {
  const std::size_t n = space.size();
  const double K = set.cap, rho = set.budget, p = set.theta.p, alpha = set.theta.alpha;
  auto theta = [&](double v) { return v > 0.0 ? set.theta(v) : 0.0; };
  auto dtheta = [&](double v) { return v > 0.0 ? set.theta.derivative(v) : 0.0; };
  auto ddtheta = [&](double v) {
    return v > 0.0 ? p * (p - 1.0) / (alpha * alpha) * std::pow(v / alpha, p - 2.0) : 0.0;
  };

  auto scores = own_scores(space, g, opp);
  // multipliers by least squares on the support
  double lambda = 0.0, mu = 0.0;
  {
    double sw = 0.0, ss = 0.0, st = 0.0, stt = 0.0, sst = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (g[x] <= 0.0) continue;
      const double w = space.weight(x), t = dtheta(g[x]);
      sw += w, ss += w * scores[x], st += w * t, stt += w * t * t, sst += w * scores[x] * t;
    }
    const double det = sw * stt - st * st;
    mu = det > 0.0 ? std::max(0.0, (sw * sst - st * ss) / det) : 0.0;
    lambda = (ss - mu * st) / sw;
  }

  auto residual = [&](const std::vector<double>& gg, const std::vector<double>& sc, double lam,
                      double m) {
    Eigen::VectorXd r(n + 2);
    double mass = 0.0, cap = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      r[x] = fischer(gg[x], lam + m * dtheta(gg[x]) - sc[x]);
      mass += space.weight(x) * gg[x];
      cap += space.weight(x) * theta(gg[x]);
    }
    r[n] = mass - rho;
    r[n + 1] = fischer(m, 1.0 - cap / K);
    return r;
  };
  // d phi / da, d phi / db
  auto partials = [](double a, double b) {
    const double h = std::hypot(a, b);
    if (h == 0.0) return std::pair{1.0 - M_SQRT1_2, 1.0 - M_SQRT1_2};
    return std::pair{1.0 - a / h, 1.0 - b / h};
  };

  Eigen::VectorXd r = residual(g, scores, lambda, mu);
  const double scale = rho / space.total_mass();
  for (int it = 0; it < 50; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, scale)) break;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 2, n + 2);
    std::vector<double> pb(n);
    double cap = 0.0;
    for (std::size_t x = 0; x < n; ++x) cap += space.weight(x) * theta(g[x]);
    const auto [ca, cb] = partials(mu, 1.0 - cap / K);
    for (std::size_t x = 0; x < n; ++x) {
      const auto [fa, fb] = partials(g[x], lambda + mu * dtheta(g[x]) - scores[x]);
      pb[x] = fb;
      jac(x, x) += fa + fb * mu * ddtheta(g[x]);
      jac(x, n) = fb;
      jac(x, n + 1) = fb * dtheta(g[x]);
      jac(n, x) = space.weight(x);
      jac(n + 1, x) = -cb * space.weight(x) * dtheta(g[x]) / K;
    }
    jac(n + 1, n + 1) = ca;
    for (std::size_t u = 0; u < n; ++u) {
      const double h = 1e-6 * std::max(scale, std::abs(g[u]));
      auto up = g, dn = g;
      up[u] += h;
      dn[u] -= h;
      const auto su = own_scores(space, up, opp), sd = own_scores(space, dn, opp);
      for (std::size_t x = 0; x < n; ++x) jac(x, u) -= pb[x] * (su[x] - sd[x]) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
    if (!step.allFinite()) return std::nullopt;
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t x = 0; x < n; ++x) trial[x] = g[x] + t * step[x];
      const double lam = lambda + t * step[n], m = mu + t * step[n + 1];
      auto st = own_scores(space, trial, opp);
      auto rt = residual(trial, st, lam, m);
      if (rt.squaredNorm() <= (1.0 - 1e-4 * t) * r.squaredNorm()) {
        g = std::move(trial);
        scores = std::move(st);
        r = std::move(rt);
        lambda = lam;
        mu = m;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, scale))) return std::nullopt;
  for (auto& v : g) v = std::max(0.0, v);
  return g;
}

}  // namespace

BestResponse best_response_restricted(const MetricMeasureSpace& space, const Density& f_opp,
                                      const RestrictedActionSet& set,
                                      const FrankWolfeOptions& options,
                                      std::optional<Density> start) {
  set.require_feasible(space);
  const std::size_t n = space.size();
  BestResponse out;
  out.f = start ? *start : Density::uniform(space, set.budget);
  if (std::abs(out.f.budget() - set.budget) > 1e-10 * set.budget)
    throw ValidationError("best response: start density has the wrong budget");
  const auto shells = kernels::shell_map(space);
  bool polished = !options.polish;
  std::vector<double> gaps;
  for (std::size_t t = 0;; ++t) {
    const auto scores = own_scores(space, out.f.values(), f_opp.values());
    const Density s = lmo_restricted(space, scores, set);
    std::vector<double> d(n);
    double gap = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      d[x] = s[x] - out.f[x];
      gap += space.weight(x) * scores[x] * d[x];
    }
    out.gap = std::max(0.0, gap);
    out.iterations = t;
    gaps.push_back(out.gap);
    if (gaps.size() > 50 && !(gaps.back() <= 0.9 * gaps[gaps.size() - 51])) out.stalled = true;
    if (!polished && (out.gap <= options.polish_below || t >= options.polish_after)) {
      polished = true;
      if (auto g = newton_polish(space, f_opp.values(), set,
                                 std::vector<double>(out.f.values().begin(), out.f.values().end()))) {
        Density cand = Density::normalized(space, std::move(*g), set.budget);
        const double cand_gap =
            gap_at(space, own_scores(space, cand.values(), f_opp.values()), cand.values(), set);
        if (cand_gap <= std::max(out.gap, options.tol)) {
          out.f = std::move(cand);
          out.gap = cand_gap;
          out.converged = cand_gap <= options.tol;
          break;
        }
      }
    }
    if (out.gap <= options.tol) {
      out.converged = true;
      break;
    }
    if (t >= options.max_iters) break;
    const double step = options.step == StepRule::LineSearch
                            ? line_search(space, shells, out.f, f_opp, d)
                            : 2.0 / (static_cast<double>(t) + 2.0);
    std::vector<double> next(n);
    for (std::size_t x = 0; x < n; ++x) next[x] = std::max(0.0, out.f[x] + step * d[x]);
    out.f = Density::normalized(space, std::move(next), set.budget);
  }
  out.value = value_vs_aggregate(space, out.f, f_opp, kSolverRule);
  return out;
}

BestResponse best_response_restricted(const Profile& profile, std::size_t i,
                                      const RestrictedActionSet& set,
                                      const FrankWolfeOptions& options) {
  return best_response_restricted(profile.space(), profile.opponents_of(i), set, options,
                                  profile[i]);
}

double check_proportionality(const Profile& profile) {
  const Density f = profile.total();
  const double rho = f.budget();
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.players(); ++i) {
    const double share = rho > 0.0 ? profile[i].budget() / rho : 0.0;
    for (std::size_t x = 0; x < f.size(); ++x)
      worst = std::max(worst, std::abs(profile[i][x] - share * f[x]));
  }
  return worst;
}

namespace {

std::vector<RestrictedActionSet> player_sets(const std::vector<double>& budgets, double p,
                                             double cap) {
  std::vector<RestrictedActionSet> sets;
  for (double rho : budgets) {
    if (!(rho > 0.0)) throw ValidationError("solver: every budget must be > 0");
    sets.push_back({rho, ThetaSpec{p, rho}, cap});
  }
  return sets;
}

}  // namespace

Profile random_feasible_profile(const MetricMeasureSpace& space, const std::vector<double>& budgets,
                                double p, double cap, std::uint64_t seed) {
  const auto sets = player_sets(budgets, p, cap);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Density> fs;
  for (const auto& set : sets) {
    set.require_feasible(space);
    std::vector<double> shape(space.size());
    for (auto& v : shape) v = unit(rng);
    const Density r = Density::normalized(space, shape, set.budget);
    const Density u = Density::uniform(space, set.budget);
    // the largest mix toward r that keeps half the slack in the cap
    const double target = set.jensen_bound(space) + 0.5 * (cap - set.jensen_bound(space));
    auto mix = [&](double t) { return (1.0 - t) * u + t * r; };
    double lo = 0.0, hi = 1.0;
    if (set.theta_integral(space, mix(1.0).values()) <= target) {
      lo = 1.0;
    } else {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (set.theta_integral(space, mix(mid).values()) <= target ? lo : hi) = mid;
      }
    }
    fs.push_back(mix(lo));
  }
  return Profile(space, std::move(fs));
}

EquilibriumReport br_dynamics(const MetricMeasureSpace& space, const std::vector<double>& budgets,
                              double p, double cap, const DynamicsOptions& options,
                              std::optional<Profile> start) {
  if (!(options.gamma > 0.0 && options.gamma <= 1.0))
    throw ValidationError("br_dynamics: damping must lie in (0, 1]");
  const auto sets = player_sets(budgets, p, cap);
  for (const auto& s : sets) s.require_feasible(space);
  std::vector<Density> init;
  for (const auto& s : sets) init.push_back(Density::uniform(space, s.budget));
  EquilibriumReport rep{start ? *start : Profile(space, init), {}, {}, {}, 0.0, 0.0, 0, false, 0.0, {}};
  if (rep.profile.players() != budgets.size())
    throw ValidationError("br_dynamics: start profile has the wrong number of players");

  const std::size_t np = budgets.size();
  // warm starts for the inner solves
  std::vector<Density> last_br(rep.profile.densities());
  double gamma = options.gamma;
  double window_best = INFINITY, previous_best = INFINITY;
  const std::size_t n = space.size(), dim = np * n;
  // Anderson history: differences of successive residuals and map values
  std::vector<Eigen::VectorXd> d_res, d_map;
  Eigen::VectorXd prev_res, prev_map;
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    std::vector<Density> br(np);
    for (std::size_t i = 0; i < np; ++i)
      br[i] = best_response_restricted(space, rep.profile.opponents_of(i), sets[i], options.inner,
                                       last_br[i])
                  .f;
    // undamped residual max_i |BR_i - f_i|; the applied change is gamma times it
    double residual = 0.0;
    Eigen::VectorXd cur(dim), map(dim);
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t x = 0; x < n; ++x) {
        residual = std::max(residual, std::abs(br[i][x] - rep.profile[i][x]));
        cur[i * n + x] = rep.profile[i][x];
        map[i * n + x] = (1.0 - gamma) * rep.profile[i][x] + gamma * br[i][x];
      }
    rep.trace.push_back(residual);
    rep.iterations = it + 1;
    if (residual < options.tol) {
      rep.converged = true;
      break;
    }
    last_br = std::move(br);

    window_best = std::min(window_best, residual);
    if (options.adaptive && (it + 1) % options.window == 0) {
      if (window_best > 0.9 * previous_best) {
        gamma = std::max(options.min_gamma, 0.5 * gamma);
        d_res.clear();
        d_map.clear();
        prev_res.resize(0);
      }
      previous_best = window_best;
      window_best = INFINITY;
    }

    Eigen::VectorXd res = map - cur, next = map;
    if (options.anderson > 0) {
      if (prev_res.size() == res.size()) {
        d_res.push_back(res - prev_res);
        d_map.push_back(map - prev_map);
        if (d_res.size() > options.anderson) {
          d_res.erase(d_res.begin());
          d_map.erase(d_map.begin());
        }
      }
      prev_res = res;
      prev_map = map;
      if (!d_res.empty()) {
        Eigen::MatrixXd R(dim, d_res.size()), G(dim, d_res.size());
        for (std::size_t j = 0; j < d_res.size(); ++j) {
          R.col(j) = d_res[j];
          G.col(j) = d_map[j];
        }
        const Eigen::VectorXd theta = R.colPivHouseholderQr().solve(res);
        if (theta.allFinite()) next = map - G * theta;
      }
    }
    for (std::size_t i = 0; i < np; ++i) {
      std::vector<double> v(n);
      for (std::size_t x = 0; x < n; ++x) v[x] = std::max(0.0, next[i * n + x]);
      rep.profile.set(i, Density::normalized(space, std::move(v), sets[i].budget));
    }
  }
  rep.gamma = gamma;

  for (std::size_t i = 0; i < np; ++i) {
    const auto opp = rep.profile.opponents_of(i);
    const double v = value_vs_aggregate(space, rep.profile[i], opp, kSolverRule);
    const auto grad = grad_value_own(space, rep.profile[i], opp, kSolverRule);
    const Density s = lmo_restricted(space, scores_from_gradient(space, grad), sets[i]);
    double gap = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) gap += grad[x] * (s[x] - rep.profile[i][x]);
    const auto br = best_response_restricted(space, opp, sets[i], options.inner, rep.profile[i]);
    rep.values.push_back(v);
    rep.fw_gaps.push_back(std::max(0.0, gap));
    rep.improvements.push_back(std::max(0.0, br.value - v));
  }
  rep.nash_residual = nash_residual(space, rep.profile.total());
  rep.proportionality = check_proportionality(rep.profile);
  return rep;
}

}  // namespace hotelling
