#pragma once

#include <Eigen/Dense>

#include "ddctl/collect.hpp"
#include "ddctl/lmi.hpp"
#include "ddctl/lti.hpp"

namespace ddctl {

struct DesignOptions {
  /// A margin above this counts as strict feasibility.
  double strict_tol = 1e-7;
  /// Ratio of the top-left block shift in the LQR design, (1 + epsilon) I.
  double epsilon = 1e-6;
  double max_condition = 1e12;
  SolverOptions solver;
};

struct StabilityVerdict {
  bool stable = false;
  MatrixXd P;
  double margin = 0.0;
  LmiSolution solution;
};

struct DesignResult {
  Gain F;
  MatrixXd P;
  MatrixXd G;
  MatrixXd X;
  double objective = 0.0;
  double margin = 0.0;
  /// S P S, the Lyapunov matrix of the closed loop.
  MatrixXd lyapunov;
  LmiSolution solution;
};

struct CostCertificate {
  double value = 0.0;
  MatrixXd P;
  LmiSolution solution;
};

/// Strict feasibility of H'PH < SPS, P > 0 for on-policy data, normalized by
/// t I <= S P S <= I.
StabilityVerdict eval_stability(const DataRecord& rec, const DesignOptions& opts = {});

/// Stabilizing gain from off-policy data, normalized by S P S <= I. Throws
/// kInfeasible when no margin above strict_tol exists, kConditioning when G
/// is near singular.
DesignResult design_stabilizing(const DataRecord& rec, const DesignOptions& opts = {});

/// min Tr(Lambda S P S) s.t. H'PH + I <= SPS on on-policy data. Throws
/// kUnstable when the closed loop of the data is not Schur.
CostCertificate eval_cost(const DataRecord& rec, const CostWeights& w,
                          const DesignOptions& opts = {});
/// Same with an explicit (n+m)x(n+m) PSD weight.
CostCertificate eval_cost(const DataRecord& rec, const MatrixXd& lambda,
                          const DesignOptions& opts = {});

/// min Tr(Lambda S P S) over the stabilization LMI with top-left block
/// S P S - (1 + epsilon) I and margin strict_tol. Throws kInfeasible or
/// kConditioning.
DesignResult design_lqr(const DataRecord& rec, const CostWeights& w,
                        const DesignOptions& opts = {});

}  // namespace ddctl
