#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ddctl/collect.hpp"
#include "ddctl/lti.hpp"

namespace ddctl {

/// Iterates P_1, P_2, ... of a Q-function matrix and their greedy gains
/// -P22^{-1} P12'. residuals[k] is the Frobenius step that produced
/// iterates[k] (value iteration starts from P_0 = 0; policy iteration
/// records no residual for P_1).
struct DpTrace {
  std::vector<MatrixXd> iterates;
  std::vector<Gain> gains;
  std::vector<double> residuals;
  bool converged = false;
  int iterations = 0;

  const MatrixXd& final_P() const { return iterates.back(); }
  const Gain& final_F() const { return gains.back(); }
};

/// Which way round H enters the policy evaluation equation.
enum class Orientation {
  /// H P H' + S Lambda S = S P S, i.e. P = Lambda + A_F' P A_F.
  kQBellman,
  /// H' P H + S Lambda S = S P S as printed. Kept to reproduce the stall.
  kPrinted,
};

/// P11 - P12 P22^{-1} P12'. P = 0 maps to 0; a singular P22 otherwise
/// throws kSingularBlock.
MatrixXd riccati_update(const MatrixXd& P, int n);

/// -P22^{-1} P12'. Throws kSingularBlock unless P22 is positive definite.
Gain greedy_gain(const MatrixXd& P, int n);

struct ViOptions {
  double eps_stop = 1e-9;
  int max_iter = 10000;
};

/// P_{k+1} = Lambda + Psi riccati_update(P_k) Psi', Psi = S^{-1} H, from
/// P_0 = 0 on off-policy data. Hitting max_iter returns the trace with
/// converged == false.
DpTrace value_iteration(const DataRecord& rec, const CostWeights& w, const ViOptions& opts = {});

/// Supplies fresh on-policy data for the gain of round k.
using Collector = std::function<DataRecord(const Gain& F, int round)>;

/// on_collect on the plant with N samples per start. N <= 0 selects n+m+2.
Collector on_policy_collector(const Plant& plant, int N = 0, std::uint64_t seed = 0);

/// Solves the policy evaluation equation on one on-policy record over
/// symmetric P. Throws kUnstablePolicy when the data closed loop is not
/// Schur or the system is singular or yields an indefinite P.
MatrixXd evaluate_policy(const DataRecord& rec, const MatrixXd& lambda,
                         Orientation orientation = Orientation::kQBellman);

struct PiOptions {
  double eps_stop = 1e-10;
  int max_iter = 50;
  Orientation orientation = Orientation::kQBellman;
};

DpTrace policy_iteration(const Collector& collect, const CostWeights& w, const Gain& F0,
                         const PiOptions& opts = {});

}  // namespace ddctl
