#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ddctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// F0 + sum_i y_i F_i >= 0 over a symmetric p x p block. A 0x0 coefficient
/// stands for the zero matrix (variable absent from the block).
struct AffineBlock {
  MatrixXd constant;
  std::vector<MatrixXd> coefficients;

  Eigen::Index size() const { return constant.rows(); }
  bool has_term(std::size_t i) const {
    return i < coefficients.size() && coefficients[i].size() != 0;
  }
  MatrixXd evaluate(const VectorXd& y) const;
};

/// Builds a block from its constant part and a linear map y -> L(y);
/// coefficient i is L(e_i).
AffineBlock make_block(int dim, MatrixXd constant,
                       const std::function<MatrixXd(const VectorXd&)>& linear);

struct LinearEquality {
  VectorXd a;
  double b = 0.0;
};

/// min c'y  s.t.  every block >= 0 and every equality a'y = b.
struct LmiProblem {
  int dim = 0;
  VectorXd objective;
  std::vector<AffineBlock> blocks;
  std::vector<LinearEquality> equalities;

  /// Throws kDimensionMismatch / kInvalidArgument on malformed data.
  void validate() const;
};

enum class LmiStatus { kOptimal, kInfeasible, kUnbounded, kMaxIterations, kNumericalFailure };

std::string_view status_name(LmiStatus s);

struct LmiSolution {
  LmiStatus status = LmiStatus::kNumericalFailure;
  VectorXd y;
  double objective_value = 0.0;
  /// Lagrange dual bound; objective_value >= dual_objective up to gap_tol.
  double dual_objective = 0.0;
  /// Smallest eigenvalue over all blocks assembled at y.
  double min_block_eigenvalue = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  /// Threshold of the normalized improving-ray tests.
  double infeas_tol = 1e-8;
  /// When progress stops (stall, breakdown, iteration cap) the best iterate
  /// still counts as optimal if all three measures are below this.
  double accept_tol = 1e-6;
};

/// Infeasible-start primal-dual path-following method (HKM direction,
/// Mehrotra predictor-corrector) on the block-diagonal cone.
LmiSolution solve(const LmiProblem& problem, const SolverOptions& opts = {});

struct MarginResult {
  double margin = 0.0;
  VectorXd y;
  LmiSolution solution;
};

/// max t  s.t.  block - t I >= 0 for every block of `strict`, plus the
/// `normalization` blocks (over the same variables) as plain constraints.
/// The objective of `strict` is ignored.
MarginResult max_margin(const LmiProblem& strict, const std::vector<AffineBlock>& normalization,
                        const SolverOptions& opts = {});

/// Embedding of matrix decision variables into the scalar vector y.
class VariableLayout {
 public:
  /// Symmetric p x p matrix from its p(p+1)/2 lower-triangle entries; an
  /// off-diagonal scalar sets both (i,j) and (j,i), so embed/extract are exact
  /// inverses.
  struct Symmetric {
    int offset = 0;
    int size = 0;
    int count() const { return size * (size + 1) / 2; }
    MatrixXd extract(const VectorXd& y) const;
    void embed(const MatrixXd& P, VectorXd& y) const;
  };
  /// General rows x cols matrix, column-major.
  struct Rectangular {
    int offset = 0;
    int rows = 0;
    int cols = 0;
    int count() const { return rows * cols; }
    MatrixXd extract(const VectorXd& y) const;
    void embed(const MatrixXd& M, VectorXd& y) const;
  };

  Symmetric add_symmetric(int p);
  Rectangular add_matrix(int rows, int cols);
  int add_scalar();
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
};

}  // namespace ddctl
