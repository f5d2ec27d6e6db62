#include "ddctl/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>

#include <omp.h>

#include "ddctl/errors.hpp"

namespace ddctl {

int resolve_threads(int requested) {
  int cap = 0;
  if (const char* env = std::getenv("DDCTL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<int>(std::min<long>(v, 1 << 16));
  }
  int threads = requested > 0 ? requested : omp_get_max_threads();
  if (cap > 0) threads = std::min(threads, cap);
  return std::max(1, threads);
}

TrajectorySums restart_trajectory(const Plant& plant, const VectorXd& z,
                                  const MatrixXd& noise_factor, std::uint64_t seed,
                                  long index) {
  const int n = plant.n();
  const int m = plant.m();
  RandomStream rng(seed, static_cast<std::uint64_t>(index));
  TrajectorySums sums{MatrixXd::Zero(n + m, n + m), MatrixXd::Zero(n + m, n)};
  VectorXd v(n + m);
  VectorXd x = z;
  for (int k = 0; k <= n; ++k) {
    const VectorXd u = rng.gaussian(noise_factor);
    VectorXd next = plant.step(x, u);
    if (!(next.norm() <= kDivergenceGuard)) {
      throw Failure(Signal::kDiverged, "restart trajectory exceeded divergence guard",
                    std::nullopt, k);
    }
    v << x, u;
    sums.S.noalias() += v * v.transpose();
    sums.H.noalias() += v * next.transpose();
    x = std::move(next);
  }
  return sums;
}

std::vector<TrajectorySums> restart_sums_serial(const Plant& plant, const VectorXd& z,
                                                const MatrixXd& noise_factor, long N,
                                                std::uint64_t seed) {
  std::vector<TrajectorySums> out;
  out.reserve(static_cast<std::size_t>(N));
  for (long i = 0; i < N; ++i) out.push_back(restart_trajectory(plant, z, noise_factor, seed, i));
  return out;
}

std::vector<TrajectorySums> restart_sums_parallel(const Plant& plant, const VectorXd& z,
                                                  const MatrixXd& noise_factor, long N,
                                                  std::uint64_t seed, int threads) {
  std::vector<TrajectorySums> out(static_cast<std::size_t>(N));
  std::atomic<long> first_failure{std::numeric_limits<long>::max()};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(resolve_threads(threads)));

#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (long i = 0; i < N; ++i) {
    if (i > first_failure.load(std::memory_order_relaxed)) continue;
    try {
      out[static_cast<std::size_t>(i)] = restart_trajectory(plant, z, noise_factor, seed, i);
    } catch (...) {
      long prev = first_failure.load();
      while (i < prev && !first_failure.compare_exchange_weak(prev, i)) {
      }
      errors[static_cast<std::size_t>(omp_get_thread_num())] = std::current_exception();
    }
  }

  if (first_failure.load() != std::numeric_limits<long>::max()) {
    // Report the failure of the lowest index, as the serial loop would.
    (void)restart_trajectory(plant, z, noise_factor, seed, first_failure.load());
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

}  // namespace ddctl
