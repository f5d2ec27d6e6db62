#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ddctl/rng.hpp"

namespace ddctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// x(k+1) = A x(k) + B u(k). The ground truth: only the simulator and the
/// model-based oracles read A and B.
class LtiSystem {
 public:
  LtiSystem(MatrixXd A, MatrixXd B);

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  const MatrixXd& A() const { return A_; }
  const MatrixXd& B() const { return B_; }

 private:
  MatrixXd A_;
  MatrixXd B_;
};

/// Stage cost weights. Q is PSD, R is PD; Lambda = blockdiag(Q, R) is derived.
class CostWeights {
 public:
  CostWeights(MatrixXd Q, MatrixXd R);
  static CostWeights identity(int n, int m);

  int n() const { return static_cast<int>(Q_.rows()); }
  int m() const { return static_cast<int>(R_.rows()); }
  const MatrixXd& Q() const { return Q_; }
  const MatrixXd& R() const { return R_; }
  MatrixXd lambda() const;

 private:
  MatrixXd Q_;
  MatrixXd R_;
};

/// State feedback u = F x.
struct Gain {
  MatrixXd F;
};

struct RiccatiSolution {
  MatrixXd X;
  Gain Fstar;
  MatrixXd Pstar;
  double residual = 0.0;
  int iterations = 0;
};

struct Trajectory {
  std::vector<VectorXd> states;
  std::vector<VectorXd> inputs;
  std::string policy;
  std::uint64_t seed = 0;
};

namespace policy {
struct FixedGain { MatrixXd F; };
/// u = K x + zeta, zeta ~ N(0, U).
struct GainPlusNoise { MatrixXd K; MatrixXd U; };
struct PureNoise { MatrixXd U; };
struct Prescribed { std::vector<VectorXd> inputs; };
}  // namespace policy

using InputPolicy = std::variant<policy::FixedGain, policy::GainPlusNoise,
                                 policy::PureNoise, policy::Prescribed>;

// --- dense helpers ----------------------------------------------------------

/// Default definiteness threshold 1e-9 * max(1, ||M||_F).
double defect_tol(const MatrixXd& M);
double min_eigenvalue(const MatrixXd& symmetric);
bool is_symmetric(const MatrixXd& M, double tol = 1e-12);
MatrixXd symmetrize(const MatrixXd& M);

// --- operations -------------------------------------------------------------

/// A_F = [[A, B], [F A, F B]].
MatrixXd augment(const LtiSystem& sys, const Gain& F);

/// max |lambda_i(M)|.
double spectral_radius(const MatrixXd& M);

/// Simulates N steps from x0. With `final_input`, u(N) is also drawn so the
/// pair (x(N), u(N)) exists. Throws kDiverged on a non-finite state.
Trajectory simulate(const LtiSystem& sys, const VectorXd& x0,
                    const InputPolicy& input, int steps, RandomStream& rng,
                    bool final_input = false);

/// Riccati fixed-point iteration from X0 = Q.
RiccatiSolution solve_dare(const LtiSystem& sys, const CostWeights& w,
                           double tol = 1e-12, int max_iter = 100000);

/// ||X - (A'XA - A'XB (R + B'XB)^{-1} B'XA + Q)||_F.
double dare_residual(const LtiSystem& sys, const CostWeights& w, const MatrixXd& X);

/// Solves M P M' + W = P for Schur-stable M.
MatrixXd lyapunov_solve(const MatrixXd& M, const MatrixXd& W, double tol = 1e-10);

/// J(F) = Tr(X_F), (A+BF)' X_F (A+BF) + Q + F'RF = X_F.
double cost_index(const LtiSystem& sys, const CostWeights& w, const Gain& F,
                  double tol = 1e-10);

/// Tr(Lambda * sum_k A_F^k (A_F')^k): the cost summed over the n+m
/// augmented basis starts.
double augmented_cost(const LtiSystem& sys, const CostWeights& w, const Gain& F,
                      double tol = 1e-10);

}  // namespace ddctl
