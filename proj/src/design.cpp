#include "ddctl/design.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "ddctl/errors.hpp"

namespace ddctl {

namespace {

struct Data {
  MatrixXd S;
  MatrixXd H;
  MatrixXd Sinv;
};

Data prepare(const DataRecord& rec, DataKind expected) {
  validate_record(rec);
  if (rec.kind != expected) {
    throw Failure(Signal::kInvalidData, std::string("expected ") +
                                            std::string(kind_name(expected)) + " data");
  }
  Eigen::LLT<MatrixXd> llt(rec.S);
  if (llt.info() != Eigen::Success || !is_valid(rec, 0.0)) {
    throw Failure(Signal::kInvalidData, "S is not positive definite");
  }
  Data d{rec.S, rec.H, symmetrize(llt.solve(MatrixXd::Identity(rec.S.rows(), rec.S.cols())))};
  return d;
}

// P is carried as P = S^-1 V S^-1 with V the free symmetric unknown, so the
// solver works in the coordinates of the Lyapunov matrix S P S. The LMIs are
// unchanged; the coordinates of P itself carry cond(S)^2 and ruin the
// Newton systems on poorly excited data.
struct PVariable {
  VariableLayout::Symmetric V;
  MatrixXd P(const Data& d, const VectorXd& y) const { return d.Sinv * V.extract(y) * d.Sinv; }
};

// Variables for the gain design: P (n+m symmetric), G (n x n), X (n x m).
struct DesignLayout {
  VariableLayout layout;
  PVariable P;
  VariableLayout::Rectangular G;
  VariableLayout::Rectangular X;

  DesignLayout(int n, int m) {
    P.V = layout.add_symmetric(n + m);
    G = layout.add_matrix(n, n);
    X = layout.add_matrix(n, m);
  }
};

// [[S P S, -[G X]'], [-[G X], G + G' - H' P H]].
MatrixXd design_block(const Data& d, const DesignLayout& v, const VectorXd& y) {
  const MatrixXd P = v.P.P(d, y);
  const MatrixXd G = v.G.extract(y);
  const MatrixXd X = v.X.extract(y);
  const Eigen::Index q = d.S.rows();
  const Eigen::Index n = G.rows();
  MatrixXd GX(n, q);
  GX << G, X;
  MatrixXd out(q + n, q + n);
  out.topLeftCorner(q, q) = d.S * P * d.S;
  out.topRightCorner(q, n) = -GX.transpose();
  out.bottomLeftCorner(n, q) = -GX;
  out.bottomRightCorner(n, n) = G + G.transpose() - d.H.transpose() * P * d.H;
  return out;
}

// S P S <= I. Capping the Lyapunov matrix rather than P keeps the margin
// independent of how well conditioned S is.
AffineBlock lyapunov_cap(const Data& d, const PVariable& Pv, int dim) {
  const Eigen::Index q = d.S.rows();
  return make_block(dim, MatrixXd::Identity(q, q), [&](const VectorXd& y) {
    return MatrixXd(-d.S * Pv.P(d, y) * d.S);
  });
}

// S P S - H' P H.
MatrixXd lyapunov_decrease(const Data& d, const MatrixXd& P) {
  return d.S * P * d.S - d.H.transpose() * P * d.H;
}

// Tr(Lambda S P S) as a linear objective over the P coordinates.
VectorXd trace_objective(const Data& d, const PVariable& Pv, const MatrixXd& lambda, int dim) {
  VectorXd c = VectorXd::Zero(dim);
  for (int i = 0; i < Pv.V.count(); ++i) {
    const int k = Pv.V.offset + i;
    c(k) = lambda.cwiseProduct(d.S * Pv.P(d, VectorXd::Unit(dim, k)) * d.S).sum();
  }
  return c;
}

Gain recover_gain(const MatrixXd& G, const MatrixXd& X, double max_condition) {
  Eigen::JacobiSVD<MatrixXd> svd(G);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    throw Failure(Signal::kConditioning, "G is ill-conditioned", cond);
  }
  // F = X' (G')^{-1}  <=>  F' = G^{-1} X.
  return Gain{G.fullPivLu().solve(X).transpose()};
}

double weighted_trace(const MatrixXd& lambda, const MatrixXd& M) {
  return lambda.cwiseProduct(M).sum();
}

std::string describe(std::string_view what, const LmiSolution& sol) {
  char buf[160];
  std::snprintf(buf, sizeof buf, " (%s after %d iterations; residuals %.1e/%.1e, gap %.1e)",
                std::string(status_name(sol.status)).c_str(), sol.iterations, sol.primal_residual,
                sol.dual_residual, sol.relative_gap);
  return std::string(what) + buf;
}

void check_weight(const MatrixXd& lambda, int q) {
  if (lambda.rows() != q || lambda.cols() != q) {
    throw Failure(Signal::kDimensionMismatch, "weight must be (n+m) x (n+m)");
  }
  if (!is_symmetric(lambda)) throw Failure(Signal::kInvalidArgument, "weight must be symmetric");
}

}  // namespace

StabilityVerdict eval_stability(const DataRecord& rec, const DesignOptions& opts) {
  const Data d = prepare(rec, DataKind::kOnPolicy);
  const int q = rec.n + rec.m;
  VariableLayout layout;
  const PVariable Pv{layout.add_symmetric(q)};
  const int dim = layout.dim();

  LmiProblem strict;
  strict.dim = dim;
  strict.objective = VectorXd::Zero(dim);
  strict.blocks.push_back(make_block(dim, MatrixXd::Zero(q, q), [&](const VectorXd& y) {
    return lyapunov_decrease(d, Pv.P(d, y));
  }));
  strict.blocks.push_back(make_block(dim, MatrixXd::Zero(q, q), [&](const VectorXd& y) {
    return MatrixXd(d.S * Pv.P(d, y) * d.S);
  }));
  std::vector<AffineBlock> norm{lyapunov_cap(d, Pv, dim)};

  const MarginResult mr = max_margin(strict, norm, opts.solver);
  if (mr.solution.status != LmiStatus::kOptimal) {
    throw Failure(Signal::kNumericalFailure, describe("stability LMI", mr.solution));
  }
  StabilityVerdict out;
  out.margin = mr.margin;
  out.stable = mr.margin > opts.strict_tol;
  out.P = Pv.P(d, mr.y);
  out.solution = mr.solution;
  return out;
}

DesignResult design_stabilizing(const DataRecord& rec, const DesignOptions& opts) {
  const Data d = prepare(rec, DataKind::kOffPolicy);
  const int n = rec.n;
  const int q = rec.n + rec.m;
  const DesignLayout v(n, rec.m);
  const int dim = v.layout.dim();

  LmiProblem strict;
  strict.dim = dim;
  strict.objective = VectorXd::Zero(dim);
  strict.blocks.push_back(make_block(dim, MatrixXd::Zero(q + n, q + n),
                                     [&](const VectorXd& y) { return design_block(d, v, y); }));
  std::vector<AffineBlock> norm{lyapunov_cap(d, v.P, dim)};

  const MarginResult mr = max_margin(strict, norm, opts.solver);
  if (mr.solution.status != LmiStatus::kOptimal) {
    throw Failure(Signal::kNumericalFailure, describe("stabilization LMI", mr.solution));
  }
  if (!(mr.margin > opts.strict_tol)) {
    throw Failure(Signal::kInfeasible, "no stabilizing gain certified by the data", mr.margin);
  }
  DesignResult out;
  out.G = v.G.extract(mr.y);
  out.X = v.X.extract(mr.y);
  out.F = recover_gain(out.G, out.X, opts.max_condition);
  out.P = v.P.P(d, mr.y);
  out.lyapunov = rec.S * out.P * rec.S;
  out.margin = mr.margin;
  out.solution = mr.solution;
  return out;
}

CostCertificate eval_cost(const DataRecord& rec, const CostWeights& w, const DesignOptions& opts) {
  if (w.n() != rec.n || w.m() != rec.m) {
    throw Failure(Signal::kDimensionMismatch, "weights do not match the data dimensions");
  }
  return eval_cost(rec, w.lambda(), opts);
}

CostCertificate eval_cost(const DataRecord& rec, const MatrixXd& lambda, const DesignOptions& opts) {
  const Data d = prepare(rec, DataKind::kOnPolicy);
  const int q = rec.n + rec.m;
  check_weight(lambda, q);

  // With P free in sign the LMI below can be feasible (and unbounded) for a
  // non-Schur closed loop, so stability is decided first.
  const StabilityVerdict verdict = eval_stability(rec, opts);
  if (!verdict.stable) {
    throw Failure(Signal::kUnstable, "closed loop of the data is not Schur stable", verdict.margin);
  }

  VariableLayout layout;
  const PVariable Pv{layout.add_symmetric(q)};
  const int dim = layout.dim();
  LmiProblem prob;
  prob.dim = dim;
  prob.objective = trace_objective(d, Pv, lambda, dim);
  prob.blocks.push_back(make_block(dim, -MatrixXd::Identity(q, q), [&](const VectorXd& y) {
    return lyapunov_decrease(d, Pv.P(d, y));
  }));

  const LmiSolution sol = solve(prob, opts.solver);
  if (sol.status == LmiStatus::kInfeasible) {
    throw Failure(Signal::kUnstable, "cost LMI infeasible");
  }
  if (sol.status != LmiStatus::kOptimal) {
    throw Failure(Signal::kNumericalFailure, describe("cost LMI", sol));
  }
  CostCertificate out;
  out.P = Pv.P(d, sol.y);
  out.value = weighted_trace(lambda, rec.S * out.P * rec.S);
  out.solution = sol;
  return out;
}

DesignResult design_lqr(const DataRecord& rec, const CostWeights& w, const DesignOptions& opts) {
  const Data d = prepare(rec, DataKind::kOffPolicy);
  if (w.n() != rec.n || w.m() != rec.m) {
    throw Failure(Signal::kDimensionMismatch, "weights do not match the data dimensions");
  }
  if (!(opts.epsilon > 0.0)) throw Failure(Signal::kInvalidArgument, "epsilon must be positive");
  const int n = rec.n;
  const int q = rec.n + rec.m;
  const MatrixXd lambda = w.lambda();
  const DesignLayout v(n, rec.m);
  const int dim = v.layout.dim();

  LmiProblem prob;
  prob.dim = dim;
  prob.objective = trace_objective(d, v.P, lambda, dim);
  MatrixXd shift = -opts.strict_tol * MatrixXd::Identity(q + n, q + n);
  shift.topLeftCorner(q, q) -= (1.0 + opts.epsilon) * MatrixXd::Identity(q, q);
  prob.blocks.push_back(
      make_block(dim, shift, [&](const VectorXd& y) { return design_block(d, v, y); }));

  const LmiSolution sol = solve(prob, opts.solver);
  if (sol.status == LmiStatus::kInfeasible) {
    throw Failure(Signal::kInfeasible, "LQR design LMI infeasible");
  }
  if (sol.status != LmiStatus::kOptimal) {
    throw Failure(Signal::kNumericalFailure, describe("LQR design LMI", sol));
  }
  DesignResult out;
  out.G = v.G.extract(sol.y);
  out.X = v.X.extract(sol.y);
  out.F = recover_gain(out.G, out.X, opts.max_condition);
  out.P = v.P.P(d, sol.y);
  out.lyapunov = rec.S * out.P * rec.S;
  out.objective = weighted_trace(lambda, out.lyapunov);
  out.margin = sol.min_block_eigenvalue;
  out.solution = sol;
  return out;
}

}  // namespace ddctl
