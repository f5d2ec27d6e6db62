#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ddctl {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seeded Gaussian source. Stream `i` of master seed `s` is a pure function of
/// (s, i), so trajectories drawn from distinct streams can be generated in any
/// order or concurrently without changing their values.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform in the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller (both variates are used).
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index size);
  /// Draw from N(0, L L^T) given the lower Cholesky factor L.
  Eigen::VectorXd gaussian(const Eigen::MatrixXd& chol_lower);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Lower Cholesky factor of a covariance; throws kInvalidArgument unless PD.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

}  // namespace ddctl
