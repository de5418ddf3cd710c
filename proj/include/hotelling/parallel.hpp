#pragma once

#include <cstddef>

namespace hotelling {

// Worker count for the OpenMP kernels. Results never depend on it: every
// reduction is done over a fixed block partition in a fixed order.
void set_num_threads(int threads);
int num_threads();
bool openmp_enabled();

/// Number of fixed reduction blocks used by parallel kernels.
inline constexpr std::size_t kReductionBlocks = 64;

}  // namespace hotelling
