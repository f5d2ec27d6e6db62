#include "ddctl/lti.hpp"

#include <cmath>
#include <sstream>

#include "ddctl/errors.hpp"

namespace ddctl {

namespace {

void require_finite(const MatrixXd& M, const char* name) {
  if (!M.allFinite()) {
    throw Failure(Signal::kInvalidArgument, std::string(name) + " has non-finite entries");
  }
}

void check_gain(const LtiSystem& sys, const Gain& F) {
  if (F.F.rows() != sys.m() || F.F.cols() != sys.n()) {
    std::ostringstream os;
    os << "gain is " << F.F.rows() << "x" << F.F.cols() << ", expected " << sys.m()
       << "x" << sys.n();
    throw Failure(Signal::kDimensionMismatch, os.str());
  }
}

void check_weights(const LtiSystem& sys, const CostWeights& w) {
  if (w.n() != sys.n() || w.m() != sys.m()) {
    throw Failure(Signal::kDimensionMismatch, "weights do not match system dimensions");
  }
}

}  // namespace

LtiSystem::LtiSystem(MatrixXd A, MatrixXd B) : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() < 1 || A_.rows() != A_.cols()) {
    throw Failure(Signal::kDimensionMismatch, "A must be square with n >= 1");
  }
  if (B_.rows() != A_.rows() || B_.cols() < 1) {
    throw Failure(Signal::kDimensionMismatch, "B must be n x m with m >= 1");
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
}

CostWeights::CostWeights(MatrixXd Q, MatrixXd R) : Q_(std::move(Q)), R_(std::move(R)) {
  if (Q_.rows() < 1 || Q_.rows() != Q_.cols() || R_.rows() < 1 || R_.rows() != R_.cols()) {
    throw Failure(Signal::kDimensionMismatch, "Q and R must be square and non-empty");
  }
  require_finite(Q_, "Q");
  require_finite(R_, "R");
  if (!is_symmetric(Q_) || !is_symmetric(R_)) {
    throw Failure(Signal::kInvalidArgument, "Q and R must be symmetric");
  }
  Q_ = symmetrize(Q_);
  R_ = symmetrize(R_);
  if (min_eigenvalue(Q_) < -defect_tol(Q_)) {
    throw Failure(Signal::kInvalidArgument, "Q must be positive semidefinite");
  }
  if (min_eigenvalue(R_) <= 0.0) {
    throw Failure(Signal::kInvalidArgument, "R must be positive definite");
  }
}

CostWeights CostWeights::identity(int n, int m) {
  return CostWeights(MatrixXd::Identity(n, n), MatrixXd::Identity(m, m));
}

MatrixXd CostWeights::lambda() const {
  const int n = this->n();
  const int m = this->m();
  MatrixXd L = MatrixXd::Zero(n + m, n + m);
  L.topLeftCorner(n, n) = Q_;
  L.bottomRightCorner(m, m) = R_;
  return L;
}

double defect_tol(const MatrixXd& M) { return 1e-9 * std::max(1.0, M.norm()); }

double min_eigenvalue(const MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Failure(Signal::kNumericalFailure, "symmetric eigensolver failed");
  }
  return es.eigenvalues()(0);
}

bool is_symmetric(const MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M - M.transpose()).norm() <= tol * std::max(1.0, M.norm());
}

MatrixXd symmetrize(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

MatrixXd augment(const LtiSystem& sys, const Gain& F) {
  check_gain(sys, F);
  const int n = sys.n();
  const int m = sys.m();
  MatrixXd AF(n + m, n + m);
  AF.topLeftCorner(n, n) = sys.A();
  AF.topRightCorner(n, m) = sys.B();
  AF.bottomLeftCorner(m, n) = F.F * sys.A();
  AF.bottomRightCorner(m, m) = F.F * sys.B();
  return AF;
}

double spectral_radius(const MatrixXd& M) {
  if (M.rows() != M.cols()) {
    throw Failure(Signal::kDimensionMismatch, "spectral radius needs a square matrix");
  }
  if (!M.allFinite()) {
    throw Failure(Signal::kNumericalFailure, "spectral radius of a non-finite matrix");
  }
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) {
    throw Failure(Signal::kNumericalFailure, "eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Trajectory simulate(const LtiSystem& sys, const VectorXd& x0, const InputPolicy& input,
                    int steps, RandomStream& rng, bool final_input) {
  if (steps < 1) throw Failure(Signal::kInvalidArgument, "simulate needs N >= 1");
  if (x0.size() != sys.n()) throw Failure(Signal::kDimensionMismatch, "x0 has wrong size");
  const int inputs_needed = steps + (final_input ? 1 : 0);

  Trajectory traj;
  MatrixXd noise_factor;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, policy::FixedGain>) {
          check_gain(sys, Gain{p.F});
          traj.policy = "fixed-gain";
        } else if constexpr (std::is_same_v<P, policy::GainPlusNoise>) {
          check_gain(sys, Gain{p.K});
          noise_factor = covariance_factor(p.U);
          traj.policy = "gain-plus-noise";
        } else if constexpr (std::is_same_v<P, policy::PureNoise>) {
          noise_factor = covariance_factor(p.U);
          traj.policy = "pure-noise";
        } else {
          if (static_cast<int>(p.inputs.size()) < inputs_needed) {
            throw Failure(Signal::kInvalidArgument, "prescribed input list too short");
          }
          traj.policy = "prescribed";
        }
        if (noise_factor.size() != 0 && noise_factor.rows() != sys.m()) {
          throw Failure(Signal::kDimensionMismatch, "noise covariance must be m x m");
        }
      },
      input);

  auto input_at = [&](int k, const VectorXd& x) -> VectorXd {
    return std::visit(
        [&](const auto& p) -> VectorXd {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, policy::FixedGain>) {
            return p.F * x;
          } else if constexpr (std::is_same_v<P, policy::GainPlusNoise>) {
            return p.K * x + rng.gaussian(noise_factor);
          } else if constexpr (std::is_same_v<P, policy::PureNoise>) {
            return rng.gaussian(noise_factor);
          } else {
            if (p.inputs[k].size() != sys.m()) {
              throw Failure(Signal::kDimensionMismatch, "prescribed input has wrong size");
            }
            return p.inputs[k];
          }
        },
        input);
  };

  traj.states.reserve(steps + 1);
  traj.inputs.reserve(inputs_needed);
  traj.states.push_back(x0);
  for (int k = 0; k < steps; ++k) {
    const VectorXd& x = traj.states.back();
    VectorXd u = input_at(k, x);
    VectorXd next = sys.A() * x + sys.B() * u;
    traj.inputs.push_back(std::move(u));
    if (!next.allFinite()) {
      throw Failure(Signal::kDiverged, "state became non-finite", std::nullopt, k);
    }
    traj.states.push_back(std::move(next));
  }
  if (final_input) traj.inputs.push_back(input_at(steps, traj.states.back()));
  return traj;
}

double dare_residual(const LtiSystem& sys, const CostWeights& w, const MatrixXd& X) {
  const MatrixXd& A = sys.A();
  const MatrixXd& B = sys.B();
  const MatrixXd G = w.R() + B.transpose() * X * B;
  const MatrixXd BtXA = B.transpose() * X * A;
  const MatrixXd rhs =
      A.transpose() * X * A - BtXA.transpose() * G.ldlt().solve(BtXA) + w.Q();
  return (X - rhs).norm();
}

RiccatiSolution solve_dare(const LtiSystem& sys, const CostWeights& w, double tol,
                           int max_iter) {
  check_weights(sys, w);
  if (!(tol > 0.0)) throw Failure(Signal::kInvalidArgument, "tol must be positive");
  const MatrixXd& A = sys.A();
  const MatrixXd& B = sys.B();
  const int n = sys.n();
  const int m = sys.m();

  MatrixXd X = w.Q();
  double step = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    Eigen::LLT<MatrixXd> G(w.R() + B.transpose() * X * B);
    if (G.info() != Eigen::Success) {
      throw Failure(Signal::kNumericalFailure, "R + B'XB is not positive definite");
    }
    const MatrixXd BtXA = B.transpose() * X * A;
    MatrixXd next = symmetrize(A.transpose() * X * A - BtXA.transpose() * G.solve(BtXA) + w.Q());
    if (!next.allFinite()) {
      throw Failure(Signal::kNonConvergence, "Riccati iteration diverged", step, it);
    }
    step = (next - X).norm();
    const double scale = 1.0 + X.norm();
    X = std::move(next);
    if (step <= tol * scale) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    throw Failure(Signal::kNonConvergence, "Riccati iteration did not converge", step, it);
  }

  Eigen::LLT<MatrixXd> G(w.R() + B.transpose() * X * B);
  if (G.info() != Eigen::Success) {
    throw Failure(Signal::kNumericalFailure, "R + B'XB is not positive definite");
  }
  RiccatiSolution sol;
  sol.X = X;
  sol.Fstar.F = -G.solve(B.transpose() * X * A);
  sol.Pstar.resize(n + m, n + m);
  sol.Pstar.topLeftCorner(n, n) = w.Q() + A.transpose() * X * A;
  sol.Pstar.topRightCorner(n, m) = A.transpose() * X * B;
  sol.Pstar.bottomLeftCorner(m, n) = B.transpose() * X * A;
  sol.Pstar.bottomRightCorner(m, m) = w.R() + B.transpose() * X * B;
  sol.Pstar = symmetrize(sol.Pstar);
  sol.residual = dare_residual(sys, w, X);
  sol.iterations = it;
  if (spectral_radius(A + B * sol.Fstar.F) >= 1.0) {
    throw Failure(Signal::kNumericalFailure, "Riccati fixed point is not stabilizing");
  }
  return sol;
}

MatrixXd lyapunov_solve(const MatrixXd& M, const MatrixXd& W, double tol) {
  if (M.rows() != M.cols() || W.rows() != M.rows() || W.cols() != M.cols()) {
    throw Failure(Signal::kDimensionMismatch, "lyapunov_solve: dimension mismatch");
  }
  if (!is_symmetric(W, 1e-10)) {
    throw Failure(Signal::kInvalidArgument, "lyapunov_solve: W must be symmetric");
  }
  const double rho = spectral_radius(M);
  if (rho >= 1.0) {
    throw Failure(Signal::kUnstable, "lyapunov_solve: M is not Schur stable", rho);
  }
  const Eigen::Index p = M.rows();
  // vec(M P M') = (M kron M) vec(P) for column-major vec.
  MatrixXd K = MatrixXd::Identity(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      K.block(i * p, j * p, p, p) -= M(i, j) * M;
    }
  }
  const Eigen::PartialPivLU<MatrixXd> lu(K);
  const MatrixXd Wsym = symmetrize(W);
  const VectorXd w = Eigen::Map<const VectorXd>(Wsym.data(), p * p);
  VectorXd v = lu.solve(w);
  v += lu.solve(w - K * v);  // one refinement step
  MatrixXd P = symmetrize(Eigen::Map<const MatrixXd>(v.data(), p, p));

  const double residual = (M * P * M.transpose() + Wsym - P).norm();
  if (!(residual <= tol * (1.0 + P.norm()))) {
    throw Failure(Signal::kNumericalFailure, "lyapunov_solve: residual above tolerance",
                  residual);
  }
  return P;
}

double cost_index(const LtiSystem& sys, const CostWeights& w, const Gain& F, double tol) {
  check_gain(sys, F);
  check_weights(sys, w);
  const MatrixXd Acl = sys.A() + sys.B() * F.F;
  const double rho = spectral_radius(Acl);
  if (rho >= 1.0) throw Failure(Signal::kInfiniteCost, "gain is not stabilizing", rho);
  const MatrixXd XF =
      lyapunov_solve(Acl.transpose(), w.Q() + F.F.transpose() * w.R() * F.F, tol);
  return XF.trace();
}

double augmented_cost(const LtiSystem& sys, const CostWeights& w, const Gain& F,
                      double tol) {
  check_weights(sys, w);
  const MatrixXd AF = augment(sys, F);
  const double rho = spectral_radius(AF);
  if (rho >= 1.0) throw Failure(Signal::kInfiniteCost, "gain is not stabilizing", rho);
  const MatrixXd Phat =
      lyapunov_solve(AF, MatrixXd::Identity(AF.rows(), AF.cols()), tol);
  return (w.lambda() * Phat).trace();
}

}  // namespace ddctl
