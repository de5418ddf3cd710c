#pragma once

namespace hotelling {

/// How exp(-m(y, x)) is evaluated for a centre y and a cell x whose distance
/// shell (cells at the same offset / distance from y) carries mass B on top
/// of the mass F strictly inside it.
///
/// Midpoint: exp(-(F + B/2)), and 1 for x = y. Converges at second order.
///
/// ShellAverage: the average of exp(-m) over m in [F, F + B],
/// e^{-F} (1 - e^{-B}) / B. On 1-D grids this is the exact x-integral within
/// each cell. Players' values then sum to eta(D)(1 - e^{-rho}) exactly and
/// the discrete game keeps the proportional structure of its equilibria.
enum class Quadrature { Midpoint, ShellAverage };

}  // namespace hotelling
