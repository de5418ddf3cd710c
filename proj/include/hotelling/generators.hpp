#pragma once

#include <string>
#include <vector>

#include "hotelling/space.hpp"

namespace hotelling {

/// Fraction of each cell covered by the arc [c - len/2, c + len/2] (1-D only;
/// wraps on the circle).
std::vector<double> arc_shape(const MetricMeasureSpace& space, double center, double length);

/// Raised cosine 1 + cos(pi (t - c) / w) on |t - c| < w, sampled at cell
/// centres (1-D only; wraps on the circle).
std::vector<double> bump_shape(const MetricMeasureSpace& space, double center, double width);

/// "uniform", "arc:c,len", "bump:c,w" or the path of a JSON array of per-cell
/// values; the result is normalised to `budget`.
Density make_density(const MetricMeasureSpace& space, const std::string& spec, double budget);

}  // namespace hotelling
