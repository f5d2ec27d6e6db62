#pragma once

#include <cstdint>
#include <vector>

#include "ddctl/collect.hpp"

namespace ddctl {

/// Unnormalized per-trajectory sums of v v' and v x(k+1)'.
struct TrajectorySums {
  MatrixXd S;
  MatrixXd H;
};

/// Thread count after applying the DDCTL_THREADS cap; requested <= 0 means
/// the machine parallelism.
int resolve_threads(int requested);

/// One restart trajectory: x(0) = z, u(k) = zeta(k) from stream (seed, index),
/// pairs k = 0..n. Throws kDiverged past the divergence guard.
TrajectorySums restart_trajectory(const Plant& plant, const VectorXd& z,
                                  const MatrixXd& noise_factor, std::uint64_t seed,
                                  long index);

/// Serial reference: trajectories 0..N-1 in order.
std::vector<TrajectorySums> restart_sums_serial(const Plant& plant, const VectorXd& z,
                                                const MatrixXd& noise_factor, long N,
                                                std::uint64_t seed);

/// OpenMP version; bit-identical to the serial reference for any thread count.
std::vector<TrajectorySums> restart_sums_parallel(const Plant& plant, const VectorXd& z,
                                                  const MatrixXd& noise_factor, long N,
                                                  std::uint64_t seed, int threads);

}  // namespace ddctl
