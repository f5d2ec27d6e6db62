#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddctl/collect.hpp"
#include "ddctl/lti.hpp"

namespace ddctl {

struct GenOptions {
  bool stable_open_loop = false;
  double spectral_radius_cap = 0.95;
};

struct GeneratedSystem {
  LtiSystem sys;
  CostWeights weights;
  /// Draws rejected before the returned pair.
  int rejections = 0;
};

/// A with N(0, 1/n) entries, B with N(0, 1) entries, resampled until (A, B)
/// is controllable; Q = C'C for a random square C, R = I + G G'/m. With
/// stable_open_loop, A is rescaled so rho(A) <= spectral_radius_cap.
/// Throws kGenerationFailure after 100 rejections.
GeneratedSystem gen_system(int n, int m, const GenOptions& opts, std::uint64_t seed);

/// [B, AB, ..., A^{k-1} B]; empty (n x 0) for k = 0.
MatrixXd controllability_blocks(const MatrixXd& A, const MatrixXd& B, int k);

/// Numerical rank with singular values below 1e-10 sigma_max dropped.
int numerical_rank(const MatrixXd& M);
bool is_controllable(const MatrixXd& A, const MatrixXd& B);
/// PBH test on the eigenvalues with |lambda| >= 1.
bool is_detectable(const MatrixXd& A, const MatrixXd& C);

/// Expected per-trajectory sum of the restart scheme,
/// sum_{k=0..n} blockdiag(A^k z z' A'^k + O_k U_k O_k', U).
MatrixXd restart_mean(const LtiSystem& sys, const VectorXd& z, const MatrixXd& U);

/// (1 - epsilon) lambda_min(blockdiag(sum_{k=0..n} O_k U_k O_k', U)) with
/// O_k built from A + B K.
double periodic_lower_bound(const LtiSystem& sys, const MatrixXd& K, const MatrixXd& U,
                            double epsilon);

struct McConfig {
  Scheme scheme = Scheme::kRestarting;
  ExcitationSpec spec;
  long N_max = 10000;
  /// Trajectory counts at which lambda_min(S_N) is recorded; N_max is
  /// always included.
  std::vector<long> checkpoints;
  std::uint64_t seed = 0;
  long settle_max = 100000;
  int threads = 0;
};

struct McReport {
  Scheme scheme = Scheme::kRestarting;
  long N_max = 0;
  std::uint64_t seed = 0;
  std::vector<long> checkpoints;
  std::vector<double> lambda_min;
  /// Restarting: lambda_min of the analytic mean. Periodic: the lower bound.
  double analytic_lambda_min = 0.0;
  /// Restarting only: ||S_N - M||_F / ||M||_F per checkpoint.
  std::vector<double> relative_error;
  MatrixXd mean;
  MatrixXd S;
  std::string convention;
};

/// Runs the scheme to N_max on the plant built from sys. Collection errors
/// propagate.
McReport mc_validity(const LtiSystem& sys, const McConfig& config);

}  // namespace ddctl
