// Serial reference vs OpenMP kernels. Run with --benchmark_counters_tabular=true.
#include <benchmark/benchmark.h>

#include <random>

#include "hotelling/kernels.hpp"
#include "hotelling/parallel.hpp"
#include "hotelling/space.hpp"

using namespace hotelling;

namespace {

std::vector<double> random_density(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::vector<double> f(n);
  for (auto& v : f) v = u(rng);
  return f;
}

MetricMeasureSpace make_space(int kind, std::size_t n) {
  if (kind == 0) return MetricMeasureSpace::interval(0.0, 1.0, n);
  const auto [nx, ny] = torus_grid(n);
  return MetricMeasureSpace::torus(1.0, 1.0, nx, ny);
}

template <bool Parallel>
void BM_capture(benchmark::State& state) {
  const auto space = make_space(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto f = random_density(space.size());
  for (auto _ : state) {
    auto e = Parallel ? kernels::parallel::capture_matrix(space, f)
                      : kernels::serial::capture_matrix(space, f);
    benchmark::DoNotOptimize(e.e.data());
  }
  state.counters["threads"] = Parallel ? num_threads() : 1;
}

template <bool Parallel>
void BM_psi_bar(benchmark::State& state) {
  const auto space = make_space(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto f = random_density(space.size());
  const auto e = kernels::parallel::capture_matrix(space, f);
  for (auto _ : state) {
    auto psi = Parallel ? kernels::parallel::psi_bar(space, e) : kernels::serial::psi_bar(space, e);
    benchmark::DoNotOptimize(psi.data());
  }
}

template <bool Parallel>
void BM_adjoint(benchmark::State& state) {
  const auto space = make_space(0, static_cast<std::size_t>(state.range(0)));
  const auto f = random_density(space.size());
  std::vector<double> coef(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) coef[x] = space.weight(x) * 0.5 * f[x];
  for (auto _ : state) {
    auto a = Parallel ? kernels::parallel::ball_adjoint(space, f, coef)
                      : kernels::serial::ball_adjoint(space, f, coef);
    benchmark::DoNotOptimize(a.data());
  }
}

}  // namespace

// args: {0 = interval / 1 = torus, cells}
BENCHMARK(BM_capture<false>)->Args({0, 256})->Args({0, 1024})->Args({1, 256})->Args({1, 1024})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_capture<true>)->Args({0, 256})->Args({0, 1024})->Args({1, 256})->Args({1, 1024})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_psi_bar<false>)->Args({0, 1024})->Args({1, 1024})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_psi_bar<true>)->Args({0, 1024})->Args({1, 1024})->Unit(benchmark::kMicrosecond);
// the serial adjoint is O(n^3)
BENCHMARK(BM_adjoint<false>)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_adjoint<true>)->Arg(64)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
