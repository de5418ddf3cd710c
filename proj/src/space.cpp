#include "hotelling/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hotelling/error.hpp"
#include "json.hpp"

namespace hotelling {

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Interval:
      return "interval";
    case SpaceKind::Circle:
      return "circle";
    case SpaceKind::Torus2D:
      return "torus";
    case SpaceKind::Custom:
      return "custom";
  }
  return "unknown";
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

MetricMeasureSpace MetricMeasureSpace::interval(double a, double b, std::size_t n) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "interval: need finite a < b");
  require(n >= 2, "interval: need at least 2 cells");
  MetricMeasureSpace s;
  s.kind_ = SpaceKind::Interval;
  s.label_ = "interval";
  s.lower_ = a;
  s.upper_ = b;
  s.width_ = (b - a) / static_cast<double>(n);
  s.cells_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.cells_[i] = {i, {a + (static_cast<double>(i) + 0.5) * s.width_}, s.width_};
  }
  s.finalize();
  return s;
}

MetricMeasureSpace MetricMeasureSpace::circle(double circumference, std::size_t n) {
  require(finite_positive(circumference), "circle: circumference must be positive");
  require(n >= 3, "circle: need at least 3 cells");
  MetricMeasureSpace s;
  s.kind_ = SpaceKind::Circle;
  s.label_ = "circle";
  s.lower_ = 0.0;
  s.upper_ = circumference;
  s.width_ = circumference / static_cast<double>(n);
  s.cells_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.cells_[i] = {i, {(static_cast<double>(i) + 0.5) * s.width_}, s.width_};
  }
  s.finalize();
  return s;
}

MetricMeasureSpace MetricMeasureSpace::torus(double lx, double ly, std::size_t nx,
                                             std::size_t ny) {
  require(finite_positive(lx) && finite_positive(ly), "torus: side lengths must be positive");
  require(nx >= 2 && ny >= 2, "torus: need at least 2 cells per axis");
  MetricMeasureSpace s;
  s.kind_ = SpaceKind::Torus2D;
  s.label_ = "torus";
  s.nx_ = nx;
  s.ny_ = ny;
  const double hx = lx / static_cast<double>(nx);
  const double hy = ly / static_cast<double>(ny);
  const std::size_t n = nx * ny;
  s.cells_.resize(n);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const std::size_t i = ix * ny + iy;
      s.cells_[i] = {i,
                     {(static_cast<double>(ix) + 0.5) * hx, (static_cast<double>(iy) + 0.5) * hy},
                     hx * hy};
    }
  }
  // Distances from integer offsets so that translated pairs compare bitwise equal.
  s.dist_.resize(n * n);
  auto wrap = [](std::size_t a, std::size_t b, std::size_t m) {
    const std::size_t k = a > b ? a - b : b - a;
    return std::min(k, m - k);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = static_cast<double>(wrap(i / ny, j / ny, nx)) * hx;
      const double dy = static_cast<double>(wrap(i % ny, j % ny, ny)) * hy;
      s.dist_[i * n + j] = std::sqrt(dx * dx + dy * dy);
    }
  }
  s.finalize();
  return s;
}

MetricMeasureSpace MetricMeasureSpace::two_interval_conflicting(std::size_t n_per_interval) {
  require(n_per_interval >= 2, "two_interval: need at least 2 cells per interval");
  const std::size_t m = n_per_interval;
  const std::size_t n = 2 * m;
  const double h = 1.0 / static_cast<double>(m);
  MetricMeasureSpace s;
  s.kind_ = SpaceKind::Custom;
  s.label_ = "two_interval";
  s.cells_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double comp = i < m ? 0.0 : 1.0;
    s.cells_[i] = {i, {comp, (static_cast<double>(i % m) + 0.5) * h}, h};
  }
  s.dist_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((i < m) != (j < m)) {
        s.dist_[i * n + j] = 2.0;
      } else {
        const std::size_t a = i % m, b = j % m;
        s.dist_[i * n + j] = static_cast<double>(a > b ? a - b : b - a) * h;
      }
    }
  }
  s.finalize();
  return s;
}

MetricMeasureSpace MetricMeasureSpace::custom(std::vector<std::vector<double>> points,
                                              std::vector<std::vector<double>> dist,
                                              std::vector<double> weights) {
  const std::size_t n = weights.size();
  require(n >= 1, "custom: need at least one cell");
  require(dist.size() == n, "custom: distance matrix must be n x n with n = #weights");
  require(points.empty() || points.size() == n, "custom: need one point per cell");
  MetricMeasureSpace s;
  s.kind_ = SpaceKind::Custom;
  s.label_ = "custom";
  s.dist_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    require(dist[i].size() == n, "custom: distance matrix must be square");
    require(finite_positive(weights[i]),
            "custom: weight " + std::to_string(i) + " must be finite and > 0");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist[i][j];
      require(std::isfinite(d) && d >= 0.0, "custom: negative or non-finite distance d(" +
                                                 std::to_string(i) + "," + std::to_string(j) +
                                                 ")");
      s.dist_[i * n + j] = d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    require(s.dist_[i * n + i] == 0.0, "custom: nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      require(s.dist_[i * n + j] == s.dist_[j * n + i], "custom: asymmetric distance d(" +
                                                            std::to_string(i) + "," +
                                                            std::to_string(j) + ")");
      require(s.dist_[i * n + j] > 0.0, "custom: distinct cells " + std::to_string(i) + "," +
                                            std::to_string(j) + " at distance 0");
    }
  }
  s.cells_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.cells_[i] = {i, points.empty() ? std::vector<double>{} : std::move(points[i]), weights[i]};
  }
  s.finalize();
  s.validate_metric();
  return s;
}

MetricMeasureSpace MetricMeasureSpace::load_custom_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("custom space: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    auto points = j.value("points", std::vector<std::vector<double>>{});
    auto dist = j.at("dist").get<std::vector<std::vector<double>>>();
    auto weights = j.at("weights").get<std::vector<double>>();
    return custom(std::move(points), std::move(dist), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("custom space " + path + ": " + e.what());
  }
}

void MetricMeasureSpace::finalize() {
  weights_.resize(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) weights_[i] = cells_[i].weight;
  total_mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (!exact_1d()) build_distance_order();
}

void MetricMeasureSpace::build_distance_order() {
  const std::size_t n = size();
  order_.resize(n * n);
  group_of_.resize(n * n);
  group_offsets_.assign(n + 1, 0);
  group_starts_.clear();
  std::vector<std::uint32_t> idx(n);
  for (std::size_t y = 0; y < n; ++y) {
    std::iota(idx.begin(), idx.end(), 0u);
    const double* row = &dist_[y * n];
    std::stable_sort(idx.begin(), idx.end(),
                     [row](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
    group_offsets_[y] = static_cast<std::uint32_t>(group_starts_.size());
    std::uint32_t g = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == 0 || row[idx[r]] != row[idx[r - 1]]) {
        group_starts_.push_back(static_cast<std::uint32_t>(r));
        g = static_cast<std::uint32_t>(group_starts_.size() - group_offsets_[y] - 1);
      }
      order_[y * n + r] = idx[r];
      group_of_[y * n + idx[r]] = g;
    }
    group_starts_.push_back(static_cast<std::uint32_t>(n));
  }
  group_offsets_[n] = static_cast<std::uint32_t>(group_starts_.size());
}

double MetricMeasureSpace::distance(std::size_t i, std::size_t j) const {
  if (exact_1d()) return static_cast<double>(offset(i, j)) * width_;
  return dist_[i * size() + j];
}

std::size_t MetricMeasureSpace::offset(std::size_t i, std::size_t j) const {
  const std::size_t k = i > j ? i - j : j - i;
  if (kind_ == SpaceKind::Circle) return std::min(k, size() - k);
  return k;
}

std::size_t MetricMeasureSpace::locate(double t) const {
  const auto n = static_cast<double>(size());
  if (kind_ == SpaceKind::Circle) {
    const double L = upper_;
    t -= std::floor(t / L) * L;
  } else {
    t -= lower_;
  }
  const double c = std::floor(t / width_);
  if (!(c >= 0.0)) return 0;
  if (c >= n) return size() - 1;
  return static_cast<std::size_t>(c);
}

std::span<const std::uint32_t> MetricMeasureSpace::order_from(std::size_t y) const {
  return {order_.data() + y * size(), size()};
}

std::span<const std::uint32_t> MetricMeasureSpace::group_starts(std::size_t y) const {
  const std::uint32_t b = group_offsets_[y];
  const std::uint32_t e = group_offsets_[y + 1];
  return {group_starts_.data() + b, static_cast<std::size_t>(e - b)};
}

void MetricMeasureSpace::validate_metric(double tol) const {
  const std::size_t n = size();
  auto fail = [](std::size_t a, std::size_t b, std::size_t c, double lhs, double rhs) {
    std::ostringstream os;
    os << "triangle inequality violated for triple (" << a << "," << b << "," << c
       << "): d(" << a << "," << c << ")=" << lhs << " > d(" << a << "," << b << ")+d(" << b
       << "," << c << ")=" << rhs;
    throw ValidationError(os.str());
  };
  auto check = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double lhs = distance(a, c);
    const double rhs = distance(a, b) + distance(b, c);
    if (lhs > rhs + tol) fail(a, b, c, lhs, rhs);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(i, i) != 0.0) throw ValidationError("nonzero self-distance");
    for (std::size_t j = 0; j < n; ++j) {
      if (distance(i, j) != distance(j, i)) throw ValidationError("asymmetric distance");
    }
  }
  if (n <= 512) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) check(a, b, c);
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < 100000; ++t) check(pick(rng), pick(rng), pick(rng));
  }
}

// ---------------------------------------------------------------------------

double mass_of(const MetricMeasureSpace& space, std::span<const double> values) {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += space.weight(i) * values[i];
  return m;
}

Density::Density(const MetricMeasureSpace& space, std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() != space.size()) throw ValidationError("density: size mismatch");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("density: negative or non-finite value");
  }
  budget_ = mass_of(space, values_);
}

Density::Density(const MetricMeasureSpace& space, std::vector<double> values, double budget)
    : Density(space, std::move(values)) {
  const double m = budget_;
  if (!(budget >= 0.0) || std::abs(m - budget) > 1e-10 * std::max(std::abs(budget), std::abs(m))) {
    std::ostringstream os;
    os << "density: mass " << m << " does not match budget " << budget;
    throw ValidationError(os.str());
  }
  budget_ = budget;
}

Density Density::uniform(const MetricMeasureSpace& space, double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw ValidationError("density: bad budget");
  Density f;
  f.values_.assign(space.size(), budget / space.total_mass());
  f.budget_ = budget;
  return f;
}

Density Density::normalized(const MetricMeasureSpace& space, std::vector<double> shape,
                            double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw ValidationError("density: bad budget");
  Density f(space, std::move(shape));
  if (f.budget_ <= 0.0) {
    if (budget == 0.0) return f;
    throw ValidationError("density: cannot normalize a shape of zero mass");
  }
  const double s = budget / f.budget_;
  for (double& v : f.values_) v *= s;
  f.budget_ = budget;
  return f;
}

Density& Density::operator+=(const Density& other) {
  if (other.size() != size()) throw ValidationError("density: size mismatch in sum");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  budget_ += other.budget_;
  return *this;
}

Density operator*(double s, Density f) {
  if (!(s >= 0.0)) throw ValidationError("density: negative scale");
  for (double& v : f.values_) v *= s;
  f.budget_ *= s;
  return f;
}

// ---------------------------------------------------------------------------

std::vector<double> cell_prefix(const MetricMeasureSpace& space, std::span<const double> f) {
  std::vector<double> p(space.size() + 1, 0.0);
  for (std::size_t i = 0; i < space.size(); ++i) p[i + 1] = p[i] + space.weight(i) * f[i];
  return p;
}

double cumulative_at(const MetricMeasureSpace& space, std::span<const double> f,
                     std::span<const double> prefix, double t) {
  const std::size_t n = space.size();
  const double h = space.cell_width();
  if (space.kind() == SpaceKind::Circle) {
    const double L = space.upper();
    const double wraps = std::floor(t / L);
    const double tt = t - wraps * L;
    // tt may round up to L; keep it in the last cell rather than wrapping
    const std::size_t j = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, tt / h)));
    return wraps * prefix[n] + prefix[j] + f[j] * (tt - static_cast<double>(j) * h);
  }
  if (t <= space.lower()) return 0.0;
  if (t >= space.upper()) return prefix[n];
  const std::size_t j = space.locate(t);
  return prefix[j] + f[j] * (t - (space.lower() + static_cast<double>(j) * h));
}

namespace {

// Sum of cell masses over the cyclic index range [start, start + len).
double cyclic_sum(std::span<const double> prefix, std::size_t n, std::size_t start,
                  std::size_t len) {
  const std::size_t end = start + len;
  if (end <= n) return prefix[end] - prefix[start];
  return (prefix[n] - prefix[start]) + prefix[end - n];
}

}  // namespace

BallMassQuery::BallMassQuery(const MetricMeasureSpace& space, std::span<const double> f)
    : space_(space), f_(f) {
  if (f.size() != space.size()) throw ValidationError("ball_mass: density size mismatch");
  if (space.exact_1d()) prefix_ = cell_prefix(space, f);
}

double BallMassQuery::operator()(std::size_t y, std::size_t x) const {
  const MetricMeasureSpace& space = space_;
  const auto f = f_;
  const std::size_t n = space.size();
  if (x == y) return 0.0;
  if (space.exact_1d()) {
    const auto& p = prefix_;
    const std::size_t k = space.offset(y, x);
    auto cell_mass = [&](std::size_t u) { return space.weight(u) * f[u]; };
    if (space.kind() == SpaceKind::Interval) {
      const auto lo = static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(k);
      const std::size_t hi = y + k;
      const std::size_t begin = lo + 1 > 0 ? static_cast<std::size_t>(lo + 1) : 0;
      const std::size_t end = std::min(n, hi);
      double m = end > begin ? p[end] - p[begin] : 0.0;
      if (lo >= 0) m += 0.5 * cell_mass(static_cast<std::size_t>(lo));
      if (hi < n) m += 0.5 * cell_mass(hi);
      return m;
    }
    if (2 * k == n) return p[n];
    const std::size_t lo = (y + n - k) % n;
    const std::size_t hi = (y + k) % n;
    return cyclic_sum(p, n, (lo + 1) % n, 2 * k - 1) + 0.5 * (cell_mass(lo) + cell_mass(hi));
  }
  const auto order = space.order_from(y);
  const auto starts = space.group_starts(y);
  const std::uint32_t g = space.group_of(y, x);
  // groups strictly inside the ball count fully, the boundary group at half weight
  double m = 0.0;
  for (std::uint32_t r = 0; r < starts[g]; ++r) m += space.weight(order[r]) * f[order[r]];
  double boundary = 0.0;
  for (std::uint32_t r = starts[g]; r < starts[g + 1]; ++r)
    boundary += space.weight(order[r]) * f[order[r]];
  return m + 0.5 * boundary;
}

double ball_mass(const MetricMeasureSpace& space, std::span<const double> f, std::size_t y,
                 std::size_t x) {
  return BallMassQuery(space, f)(y, x);
}

double ball_mass_at(const MetricMeasureSpace& space, std::span<const double> f, double y,
                    double x) {
  if (!space.exact_1d()) throw ValidationError("ball_mass_at: needs an exact 1-D space");
  const auto p = cell_prefix(space, f);
  if (space.kind() == SpaceKind::Interval) {
    const double r = std::abs(x - y);
    return cumulative_at(space, f, p, std::min(space.upper(), y + r)) -
           cumulative_at(space, f, p, std::max(space.lower(), y - r));
  }
  const double L = space.upper();
  double r = std::abs(x - y);
  r -= std::floor(r / L) * L;
  r = std::min(r, L - r);
  if (2.0 * r >= L) return p[space.size()];
  return cumulative_at(space, f, p, y + r) - cumulative_at(space, f, p, y - r);
}

std::pair<std::size_t, std::size_t> torus_grid(std::size_t n) {
  if (n == 0) throw ValidationError("torus: need at least one cell");
  std::size_t nx = 1;
  for (std::size_t d = 1; d * d <= n; ++d)
    if (n % d == 0) nx = d;
  return {nx, n / nx};
}

double tie_mass(const MetricMeasureSpace& space, const Density& f) {
  const std::size_t n = space.size();
  std::vector<double> per_z(n, 0.0);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = space.weight(i) * f[i];

#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t z = 0; z < n; ++z) {
    std::vector<std::pair<double, double>> row;
    if (space.exact_1d()) {
      row.resize(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = {space.distance(z, i), a[i]};
      std::sort(row.begin(), row.end());
    }
    double acc = 0.0;
    double group_sum = 0.0, group_sq = 0.0;
    auto flush = [&] {
      acc += group_sum * group_sum - group_sq;
      group_sum = group_sq = 0.0;
    };
    if (space.exact_1d()) {
      for (std::size_t r = 0; r < n; ++r) {
        if (r > 0 && row[r].first != row[r - 1].first) flush();
        group_sum += row[r].second;
        group_sq += row[r].second * row[r].second;
      }
      flush();
    } else {
      const auto order = space.order_from(z);
      const auto starts = space.group_starts(z);
      for (std::size_t g = 0; g + 1 < starts.size(); ++g) {
        for (std::uint32_t r = starts[g]; r < starts[g + 1]; ++r) {
          const double v = a[order[r]];
          group_sum += v;
          group_sq += v * v;
        }
        flush();
      }
    }
    per_z[z] = space.weight(z) * acc;
  }
  double total = 0.0;
  for (double v : per_z) total += v;
  return total;
}

}  // namespace hotelling
