#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hotelling/quadrature.hpp"
#include "hotelling/space.hpp"

// O(n^2) building blocks of the value functional.
//
// `parallel` is the production path (OpenMP over centres/evaluation points,
// fixed-block reductions, results independent of the worker count).
// `serial` is a direct transcription of the definitions kept as the
// reference for tests and for the benchmark.

namespace hotelling::kernels {

/// Dense n x n table indexed by (centre y, cell x).
struct PairMatrix {
  std::size_t n = 0;
  std::vector<double> e;  // row-major, row = centre y

  double operator()(std::size_t y, std::size_t x) const { return e[y * n + x]; }
};

/// E(y, x): probability that the nearest point of a Poisson process of
/// intensity f*eta to y is the one at x, per unit intensity at x.
using CaptureMatrix = PairMatrix;

/// Shell of every cell seen from every centre: integer offsets in 1-D,
/// equal-distance groups otherwise. Shell 0 is the centre alone.
struct ShellMap {
  std::size_t n = 0;
  std::vector<std::uint32_t> of;     // n x n, row = centre
  std::vector<std::uint32_t> count;  // shells per centre
  bool antipodal = false;            // even circle: the last shell is the opposite cell

  std::uint32_t operator()(std::size_t y, std::size_t x) const { return of[y * n + x]; }
};
ShellMap shell_map(const MetricMeasureSpace& space);

/// (1 - e^{-s}) / s and its derivative, stable near 0.
double phi(double s);
double phi_prime(double s);

namespace serial {

CaptureMatrix capture_matrix(const MetricMeasureSpace& space, std::span<const double> f_total,
                             Quadrature rule = Quadrature::Midpoint);
/// psi_bar(x) = sum_y w_y E(y, x).
std::vector<double> psi_bar(const MetricMeasureSpace& space, const CaptureMatrix& e);
/// A(u) with dV/df_own(u) = w_u (psi_bar(u) - A(u)), coef_x = w_x f_own(x).
/// O(n^3): test-sized inputs only.
std::vector<double> ball_adjoint(const MetricMeasureSpace& space, std::span<const double> f_total,
                                 std::span<const double> coef,
                                 Quadrature rule = Quadrature::Midpoint);
/// sum_y w_y int_D f_own(x) exp(-m(y, x)) dx with the x-integral done exactly
/// on the continuum (1-D only).
double cell_exact_capture(const MetricMeasureSpace& space, std::span<const double> f_total,
                          std::span<const double> f_own);

}  // namespace serial

namespace parallel {

/// m(y, x) = ball_mass(f, y, x) for all pairs.
PairMatrix mass_matrix(const MetricMeasureSpace& space, std::span<const double> f);
CaptureMatrix capture_matrix(const MetricMeasureSpace& space, std::span<const double> f_total,
                             Quadrature rule = Quadrature::Midpoint);
std::vector<double> psi_bar(const MetricMeasureSpace& space, const CaptureMatrix& e);
std::vector<double> ball_adjoint(const MetricMeasureSpace& space, std::span<const double> f_total,
                                 std::span<const double> coef,
                                 Quadrature rule = Quadrature::Midpoint);

}  // namespace parallel

/// Coverage of cell u by B(y -> x) under the half-weight boundary convention: 0, 1/2 or 1.
double coverage(const MetricMeasureSpace& space, std::size_t u, std::size_t y, std::size_t x);

}  // namespace hotelling::kernels
