#include "ddctl/rng.hpp"

#include <cmath>
#include <numbers>

#include "ddctl/errors.hpp"

namespace ddctl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

double RandomStream::uniform() {
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Eigen::VectorXd RandomStream::normal_vector(Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = normal();
  return v;
}

Eigen::VectorXd RandomStream::gaussian(const Eigen::MatrixXd& chol_lower) {
  return chol_lower * normal_vector(chol_lower.rows());
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw Failure(Signal::kDimensionMismatch, "covariance must be square and non-empty");
  }
  if (!cov.allFinite() || !cov.isApprox(cov.transpose(), 1e-12)) {
    throw Failure(Signal::kInvalidArgument, "covariance must be finite and symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Failure(Signal::kInvalidArgument, "covariance must be positive definite");
  }
  return llt.matrixL();
}

}  // namespace ddctl
