#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hotelling {

enum class SpaceKind { Interval, Circle, Torus2D, Custom };

std::string_view to_string(SpaceKind kind);

struct Cell {
  std::size_t index = 0;
  std::vector<double> point;  // native chart: 1 coordinate in 1-D, (x, y) on the torus
  double weight = 0.0;        // eta-measure of the cell
};

class Density;

/// Finite discretization of a metric measure space (D, d, eta).
///
/// Cells carry a representative point and their eta-measure. Interval and
/// Circle spaces are "exact 1-D": ball masses of piecewise-constant densities
/// are computed from the continuum geometry. Torus2D and Custom spaces are
/// quadrature-only and keep a full distance matrix plus, for every centre y,
/// the cells grouped by increasing distance from y.
///
/// Instances are immutable after construction and safe to share across threads.
class MetricMeasureSpace {
 public:
  static MetricMeasureSpace interval(double a, double b, std::size_t n);
  static MetricMeasureSpace circle(double circumference, std::size_t n);
  static MetricMeasureSpace torus(double lx, double ly, std::size_t nx, std::size_t ny);
  /// Two unit intervals at mutual distance 2: the standard conflicting measure.
  static MetricMeasureSpace two_interval_conflicting(std::size_t n_per_interval);
  /// User-supplied finite metric space; validates the metric axioms.
  static MetricMeasureSpace custom(std::vector<std::vector<double>> points,
                                   std::vector<std::vector<double>> dist,
                                   std::vector<double> weights);
  /// Reads {"points": [[...]], "dist": [[...]], "weights": [...]}.
  static MetricMeasureSpace load_custom_json(const std::string& path);

  SpaceKind kind() const { return kind_; }
  /// Short name of the construction ("interval", "circle", "torus", "two_interval", "custom").
  const std::string& label() const { return label_; }
  std::size_t size() const { return cells_.size(); }
  const std::vector<Cell>& cells() const { return cells_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double total_mass() const { return total_mass_; }
  bool exact_1d() const { return kind_ == SpaceKind::Interval || kind_ == SpaceKind::Circle; }

  double distance(std::size_t i, std::size_t j) const;

  // --- 1-D geometry (Interval, Circle) ---
  /// Left end of the interval, 0 on the circle (arc-length chart [0, L)).
  double lower() const { return lower_; }
  /// Right end of the interval, circumference on the circle.
  double upper() const { return upper_; }
  double cell_width() const { return width_; }
  /// Integer offset |i - j| on the interval, geodesic min(|i-j|, n-|i-j|) on the circle.
  std::size_t offset(std::size_t i, std::size_t j) const;
  /// Cell containing continuum coordinate t (circle coordinates are reduced mod L).
  std::size_t locate(double t) const;

  // --- Torus geometry ---
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  // --- Quadrature-only distance structure ---
  /// Cells ordered by distance from y (stable, y first).
  std::span<const std::uint32_t> order_from(std::size_t y) const;
  /// Start ranks of equal-distance groups in order_from(y), plus a final sentinel n.
  std::span<const std::uint32_t> group_starts(std::size_t y) const;
  /// Index of x's equal-distance group relative to centre y (group 0 is y itself).
  std::uint32_t group_of(std::size_t y, std::size_t x) const { return group_of_[y * size() + x]; }

  /// Checks the metric axioms on representatives (all triples for n <= 512,
  /// 1e5 sampled triples otherwise). Throws ValidationError naming the triple.
  void validate_metric(double tol = 1e-9) const;

 private:
  MetricMeasureSpace() = default;
  void finalize();
  void build_distance_order();

  SpaceKind kind_ = SpaceKind::Custom;
  std::string label_;
  std::vector<Cell> cells_;
  std::vector<double> weights_;
  double total_mass_ = 0.0;

  double lower_ = 0.0;
  double upper_ = 0.0;
  double width_ = 0.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;

  std::vector<double> dist_;  // n*n, quadrature-only spaces
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> group_of_;
  std::vector<std::uint32_t> group_offsets_;  // per y: offset into group_starts_
  std::vector<std::uint32_t> group_starts_;
};

/// A pure action f in C(rho): per-cell density w.r.t. eta with mass budget rho.
class Density {
 public:
  Density() = default;
  /// Budget taken as the eta-mass of `values`.
  Density(const MetricMeasureSpace& space, std::vector<double> values);
  /// Validates that the eta-mass of `values` equals `budget` within 1e-10 relative.
  Density(const MetricMeasureSpace& space, std::vector<double> values, double budget);

  static Density uniform(const MetricMeasureSpace& space, double budget);
  /// Rescales a nonnegative shape to the given budget.
  static Density normalized(const MetricMeasureSpace& space, std::vector<double> shape,
                            double budget);
  static Density zero(const MetricMeasureSpace& space) { return uniform(space, 0.0); }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double budget() const { return budget_; }
  std::size_t size() const { return values_.size(); }

  Density& operator+=(const Density& other);
  friend Density operator+(Density lhs, const Density& rhs) { return lhs += rhs; }
  /// Pointwise scaling; the budget scales with it.
  friend Density operator*(double s, Density f);

 private:
  std::vector<double> values_;
  double budget_ = 0.0;
};

/// eta-mass of a per-cell density.
double mass_of(const MetricMeasureSpace& space, std::span<const double> values);

/// Answers repeated ball-mass queries for one density (prefix sums built once).
class BallMassQuery {
 public:
  BallMassQuery(const MetricMeasureSpace& space, std::span<const double> f);
  double operator()(std::size_t y, std::size_t x) const;

 private:
  const MetricMeasureSpace& space_;
  std::span<const double> f_;
  std::vector<double> prefix_;
};

/// Splits n cells into nx x ny with nx the largest divisor of n not above sqrt(n).
std::pair<std::size_t, std::size_t> torus_grid(std::size_t n);

/// f-mass of the closed ball B(y -> x) = {z : d(z, y) <= d(x, y)} with the
/// quadrature convention of the space (see README): exact continuum arcs in
/// 1-D, representatives with boundary ties at half weight otherwise.
double ball_mass(const MetricMeasureSpace& space, std::span<const double> f, std::size_t y,
                 std::size_t x);
inline double ball_mass(const MetricMeasureSpace& space, const Density& f, std::size_t y,
                        std::size_t x) {
  return ball_mass(space, f.values(), y, x);
}

/// Continuum version on exact 1-D spaces: y and x are arbitrary coordinates.
double ball_mass_at(const MetricMeasureSpace& space, std::span<const double> f, double y,
                    double x);

/// Cumulative integral of a piecewise-constant density, F(t) = int_{lower}^{t} f.
/// On the circle t is unwrapped: F(t + L) = F(t) + rho.
double cumulative_at(const MetricMeasureSpace& space, std::span<const double> f,
                     std::span<const double> prefix, double t);
/// prefix[i] = sum_{u < i} w_u f_u, size n+1.
std::vector<double> cell_prefix(const MetricMeasureSpace& space, std::span<const double> f);

/// Discrete analogue of the tie-mass triple integral
/// sum_z sum_{x != y} w_z (w_x f_x)(w_y f_y) 1(d(z,x) == d(z,y)), exact equality.
/// Zero is sufficient (not necessary) for f*eta to be non-conflicting.
double tie_mass(const MetricMeasureSpace& space, const Density& f);

}  // namespace hotelling
