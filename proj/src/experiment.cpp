#include "ddctl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ddctl/errors.hpp"
#include "ddctl/rng.hpp"

namespace ddctl {

namespace {

constexpr int kMaxRejections = 100;

MatrixXd gaussian_matrix(RandomStream& rng, int rows, int cols, double scale) {
  MatrixXd M(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) M(i, j) = scale * rng.normal();
  }
  return M;
}

}  // namespace

MatrixXd controllability_blocks(const MatrixXd& A, const MatrixXd& B, int k) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  MatrixXd O(n, m * k);
  MatrixXd block = B;
  // Columns ordered [A^{k-1} B, ..., B] to match u_k = [u(0); ...; u(k-1)].
  for (int j = k - 1; j >= 0; --j) {
    O.middleCols(m * j, m) = block;
    block = A * block;
  }
  return O;
}

int numerical_rank(const MatrixXd& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > tol ? 1 : 0;
  return r;
}

bool is_controllable(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  return numerical_rank(controllability_blocks(A, B, n)) == n;
}

bool is_detectable(const MatrixXd& A, const MatrixXd& C) {
  using Complex = std::complex<double>;
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1.0) continue;
    Eigen::MatrixXcd pbh(n + C.rows(), n);
    pbh.topRows(n) = lam * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
    pbh.bottomRows(C.rows()) = C.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 1e-10 * std::max(1.0, sv(0))) return false;
  }
  return true;
}

GeneratedSystem gen_system(int n, int m, const GenOptions& opts, std::uint64_t seed) {
  if (n < 1 || m < 1) throw Failure(Signal::kInvalidArgument, "gen_system needs n, m >= 1");
  if (opts.stable_open_loop && !(opts.spectral_radius_cap > 0.0)) {
    throw Failure(Signal::kInvalidArgument, "spectral_radius_cap must be positive");
  }
  RandomStream rng(seed);
  for (int attempt = 0; attempt <= kMaxRejections; ++attempt) {
    MatrixXd A = gaussian_matrix(rng, n, n, 1.0 / std::sqrt(static_cast<double>(n)));
    const MatrixXd B = gaussian_matrix(rng, n, m, 1.0);
    const MatrixXd C = gaussian_matrix(rng, n, n, 1.0);
    const MatrixXd G = gaussian_matrix(rng, m, m, 1.0);
    if (opts.stable_open_loop) {
      const double rho = spectral_radius(A);
      if (rho > opts.spectral_radius_cap) A *= opts.spectral_radius_cap / rho;
    }
    if (!is_controllable(A, B) || numerical_rank(C) != n || !is_detectable(A, C)) continue;
    MatrixXd Q = symmetrize(C.transpose() * C);
    MatrixXd R = symmetrize(MatrixXd::Identity(m, m) + G * G.transpose() / m);
    return GeneratedSystem{LtiSystem(std::move(A), B), CostWeights(std::move(Q), std::move(R)),
                           attempt};
  }
  throw Failure(Signal::kGenerationFailure, "no controllable draw within 100 rejections");
}

MatrixXd restart_mean(const LtiSystem& sys, const VectorXd& z, const MatrixXd& U) {
  const int n = sys.n();
  const int m = sys.m();
  if (z.size() != n) throw Failure(Signal::kDimensionMismatch, "z must have n entries");
  if (U.rows() != m || U.cols() != m) throw Failure(Signal::kDimensionMismatch, "U must be m x m");
  covariance_factor(U);
  MatrixXd M = MatrixXd::Zero(n + m, n + m);
  VectorXd Akz = z;
  for (int k = 0; k <= n; ++k) {
    const MatrixXd O = controllability_blocks(sys.A(), sys.B(), k);
    MatrixXd Uk = MatrixXd::Zero(m * k, m * k);
    for (int j = 0; j < k; ++j) Uk.block(m * j, m * j, m, m) = U;
    M.topLeftCorner(n, n) += Akz * Akz.transpose() + O * Uk * O.transpose();
    M.bottomRightCorner(m, m) += U;
    Akz = sys.A() * Akz;
  }
  return symmetrize(M);
}

double periodic_lower_bound(const LtiSystem& sys, const MatrixXd& K, const MatrixXd& U,
                            double epsilon) {
  const int n = sys.n();
  const int m = sys.m();
  if (K.rows() != m || K.cols() != n) throw Failure(Signal::kDimensionMismatch, "K must be m x n");
  if (U.rows() != m || U.cols() != m) throw Failure(Signal::kDimensionMismatch, "U must be m x m");
  const MatrixXd AK = sys.A() + sys.B() * K;
  MatrixXd X = MatrixXd::Zero(n, n);
  for (int k = 0; k <= n; ++k) {
    const MatrixXd O = controllability_blocks(AK, sys.B(), k);
    MatrixXd Uk = MatrixXd::Zero(m * k, m * k);
    for (int j = 0; j < k; ++j) Uk.block(m * j, m * j, m, m) = U;
    X += O * Uk * O.transpose();
  }
  MatrixXd D = MatrixXd::Zero(n + m, n + m);
  D.topLeftCorner(n, n) = X;
  D.bottomRightCorner(m, m) = U;
  return (1.0 - epsilon) * min_eigenvalue(symmetrize(D));
}

McReport mc_validity(const LtiSystem& sys, const McConfig& config) {
  if (config.N_max < 1) throw Failure(Signal::kInvalidArgument, "N_max must be >= 1");
  if (config.scheme != Scheme::kRestarting && config.scheme != Scheme::kPeriodicExcitation) {
    throw Failure(Signal::kInvalidArgument, "mc_validity supports restarting and periodic schemes");
  }
  McReport report;
  report.scheme = config.scheme;
  report.N_max = config.N_max;
  report.seed = config.seed;
  for (long c : config.checkpoints) {
    if (c >= 1 && c < config.N_max) report.checkpoints.push_back(c);
  }
  report.checkpoints.push_back(config.N_max);
  std::sort(report.checkpoints.begin(), report.checkpoints.end());
  report.checkpoints.erase(std::unique(report.checkpoints.begin(), report.checkpoints.end()),
                           report.checkpoints.end());

  const bool restart = config.scheme == Scheme::kRestarting;
  if (restart) {
    report.mean = restart_mean(sys, config.spec.z, config.spec.U);
    report.analytic_lambda_min = min_eigenvalue(report.mean);
  } else {
    if (!config.spec.K) throw Failure(Signal::kInvalidArgument, "periodic excitation needs a gain K");
    report.analytic_lambda_min =
        periodic_lower_bound(sys, *config.spec.K, config.spec.U, config.spec.epsilon);
  }
  report.convention =
      "S_N averages per-trajectory sums over k = 0..n; the analytic mean is the expected "
      "per-trajectory sum (no division by n+1)";

  std::size_t next = 0;
  const ProgressFn progress = [&](long count, const MatrixXd& S) {
    if (next < report.checkpoints.size() && count == report.checkpoints[next]) {
      const MatrixXd Ss = symmetrize(S);
      report.lambda_min.push_back(min_eigenvalue(Ss));
      if (restart) report.relative_error.push_back((Ss - report.mean).norm() / report.mean.norm());
      ++next;
    }
  };
  const Plant plant(sys);
  const DataRecord rec =
      restart ? off_collect_restart(plant, config.spec, config.N_max, config.seed, config.threads,
                                    progress)
              : off_collect_periodic(plant, config.spec, config.N_max, config.settle_max,
                                     config.seed, progress);
  report.S = rec.S;
  return report;
}

}  // namespace ddctl
