#pragma once

#include <cstdint>

#include "smc/kernel.hpp"
#include "smc/trajectory.hpp"

namespace smc {

/// Samples a Markov renewal path from the kernel: each jump draws (j, k) from
/// the categorical law {q_{J_n, j}(k)} by inverse CDF over the flattened row,
/// and generation stops at the first jump whose cumulative time would exceed
/// M (boundary S_n = M still counts). Identical (kernel, i0, M, seed) give a
/// bit-identical trajectory.
Trajectory simulate(const SemiMarkovKernel& kernel, int i0, long long horizon,
                    std::uint64_t seed);

}  // namespace smc
