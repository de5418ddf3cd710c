#include "hotelling/generators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hotelling/error.hpp"

namespace hotelling {

namespace {

void require_1d(const MetricMeasureSpace& space, const char* what) {
  if (!space.exact_1d())
    throw ValidationError(std::string(what) + ": only defined on interval and circle spaces");
}

// copies of [a, b] to intersect with the chart: one on the interval, three on the circle
std::vector<std::pair<double, double>> images(const MetricMeasureSpace& space, double a, double b) {
  if (space.kind() != SpaceKind::Circle) return {{a, b}};
  const double L = space.upper();
  const double shift = std::floor(a / L) * L;
  return {{a - shift - L, b - shift - L}, {a - shift, b - shift}, {a - shift + L, b - shift + L}};
}

std::vector<double> parse_pair(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError("density '" + spec + "': bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.size() != 2) throw ValidationError("density '" + spec + "': expected two numbers");
  return out;
}

}  // namespace

std::vector<double> arc_shape(const MetricMeasureSpace& space, double center, double length) {
  require_1d(space, "arc");
  if (!(length > 0.0)) throw ValidationError("arc: length must be positive");
  const std::size_t n = space.size();
  const double h = space.cell_width(), lo = space.lower();
  std::vector<double> shape(n, 0.0);
  for (const auto& [a, b] : images(space, center - 0.5 * length, center + 0.5 * length)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double c0 = lo + static_cast<double>(i) * h, c1 = c0 + h;
      shape[i] += std::max(0.0, std::min(b, c1) - std::max(a, c0)) / h;
    }
  }
  for (auto& v : shape) v = std::min(v, 1.0);
  return shape;
}

std::vector<double> bump_shape(const MetricMeasureSpace& space, double center, double width) {
  require_1d(space, "bump");
  if (!(width > 0.0)) throw ValidationError("bump: width must be positive");
  const std::size_t n = space.size();
  const double h = space.cell_width();
  const bool circle = space.kind() == SpaceKind::Circle;
  const double L = space.upper() - space.lower();
  std::vector<double> shape(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = space.lower() + (static_cast<double>(i) + 0.5) * h;
    double d = std::abs(t - center);
    if (circle) d = std::min(std::fmod(d, L), L - std::fmod(d, L));
    if (d < width) shape[i] = 1.0 + std::cos(M_PI * d / width);
  }
  return shape;
}

Density make_density(const MetricMeasureSpace& space, const std::string& spec, double budget) {
  if (!(budget >= 0.0) || !std::isfinite(budget))
    throw ValidationError("density budget must be finite and >= 0");
  std::vector<double> shape;
  if (spec == "uniform") return Density::uniform(space, budget);
  if (spec.rfind("arc:", 0) == 0) {
    const auto v = parse_pair(spec.substr(4), spec);
    shape = arc_shape(space, v[0], v[1]);
  } else if (spec.rfind("bump:", 0) == 0) {
    const auto v = parse_pair(spec.substr(5), spec);
    shape = bump_shape(space, v[0], v[1]);
  } else {
    std::ifstream in(spec);
    if (!in) throw ValidationError("density '" + spec + "': not a generator and not a readable file");
    nlohmann::json j;
    try {
      in >> j;
      shape = j.get<std::vector<double>>();
    } catch (const std::exception& e) {
      throw ValidationError("density file '" + spec + "': " + e.what());
    }
    if (shape.size() != space.size())
      throw ValidationError("density file '" + spec + "': expected " + std::to_string(space.size()) +
                            " values, got " + std::to_string(shape.size()));
  }
  double total = 0.0;
  for (double v : shape) total += v;
  if (!(total > 0.0)) throw ValidationError("density '" + spec + "' has no mass on this grid");
  if (budget == 0.0) return Density::zero(space);
  return Density::normalized(space, std::move(shape), budget);
}

}  // namespace hotelling
