#include "ddctl/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddctl/errors.hpp"

namespace ddctl {

MatrixXd AffineBlock::evaluate(const VectorXd& y) const {
  MatrixXd out = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (has_term(i)) out += y(static_cast<Eigen::Index>(i)) * coefficients[i];
  }
  return out;
}

AffineBlock make_block(int dim, MatrixXd constant,
                       const std::function<MatrixXd(const VectorXd&)>& linear) {
  AffineBlock block;
  block.constant = std::move(constant);
  block.coefficients.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    MatrixXd Fi = linear(VectorXd::Unit(dim, i));
    if (Fi.rows() != block.constant.rows() || Fi.cols() != block.constant.cols()) {
      throw Failure(Signal::kDimensionMismatch, "linear map returned a block of the wrong size");
    }
    Fi = MatrixXd(0.5 * (Fi + Fi.transpose()));
    if (Fi.cwiseAbs().maxCoeff() != 0.0) {
      block.coefficients[static_cast<std::size_t>(i)] = std::move(Fi);
    }
  }
  return block;
}

void LmiProblem::validate() const {
  if (dim < 0) throw Failure(Signal::kInvalidArgument, "negative variable count");
  if (objective.size() != dim) {
    throw Failure(Signal::kDimensionMismatch, "objective length differs from variable count");
  }
  if (!objective.allFinite()) throw Failure(Signal::kInvalidArgument, "non-finite objective");
  for (const auto& b : blocks) {
    if (b.constant.rows() != b.constant.cols()) {
      throw Failure(Signal::kDimensionMismatch, "block constant is not square");
    }
    if (b.coefficients.size() > static_cast<std::size_t>(dim)) {
      throw Failure(Signal::kDimensionMismatch, "block has more coefficients than variables");
    }
    auto check = [&](const MatrixXd& M) {
      if (M.rows() != b.constant.rows() || M.cols() != b.constant.cols()) {
        throw Failure(Signal::kDimensionMismatch, "coefficient size differs within a block");
      }
      if (!M.allFinite()) throw Failure(Signal::kInvalidArgument, "non-finite block data");
      if ((M - M.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
        throw Failure(Signal::kInvalidArgument, "block data must be symmetric");
      }
    };
    check(b.constant);
    for (std::size_t i = 0; i < b.coefficients.size(); ++i) {
      if (b.has_term(i)) check(b.coefficients[i]);
    }
  }
  for (const auto& e : equalities) {
    if (e.a.size() != dim) throw Failure(Signal::kDimensionMismatch, "equality has wrong length");
    if (!e.a.allFinite() || !std::isfinite(e.b)) {
      throw Failure(Signal::kInvalidArgument, "non-finite equality data");
    }
  }
}

std::string_view status_name(LmiStatus s) {
  switch (s) {
    case LmiStatus::kOptimal: return "optimal";
    case LmiStatus::kInfeasible: return "infeasible";
    case LmiStatus::kUnbounded: return "unbounded";
    case LmiStatus::kMaxIterations: return "max-iterations";
    case LmiStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

struct Term {
  int var;
  MatrixXd F;
};

struct ConeBlock {
  MatrixXd F0;
  std::vector<Term> terms;
  Eigen::Index size() const { return F0.rows(); }
};

// Equality-free, equilibrated problem: min c'w s.t. F0_b + sum_j w_j F_jb >= 0.
struct Scaled {
  int dim = 0;
  VectorXd c;
  std::vector<ConeBlock> blocks;
};

struct IpmResult {
  LmiStatus status = LmiStatus::kMaxIterations;
  VectorXd w;
  double pobj = 0.0;
  double dobj = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

double res_merit(const IpmResult& r) { return std::max({r.pinf, r.dinf, r.gap}); }

double inner(const MatrixXd& A, const MatrixXd& B) { return A.cwiseProduct(B).sum(); }

MatrixXd sym(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// Largest alpha in (0, inf] with X + alpha dX >= 0, given the Cholesky factor of X.
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dX) {
  const auto L = chol.matrixL();
  const MatrixXd half = L.solve(dX);
  const MatrixXd Tt = L.solve(half.transpose());
  const MatrixXd T = Tt.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(T), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

double min_eig(const MatrixXd& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

IpmResult run_ipm(const Scaled& prob, const SolverOptions& opts) {
  const int d = prob.dim;
  const std::size_t nb = prob.blocks.size();
  IpmResult res;

  double cone_dim = 0.0;
  double f0_norm = 0.0;
  for (const auto& b : prob.blocks) {
    cone_dim += static_cast<double>(b.size());
    f0_norm += b.F0.squaredNorm();
  }
  f0_norm = std::sqrt(f0_norm);
  const double c_norm = prob.c.norm();

  std::vector<MatrixXd> X(nb), Z(nb), Rz(nb), Zinv(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Eigen::Index p = prob.blocks[b].size();
    const double start = std::max(10.0, std::sqrt(static_cast<double>(p)));
    X[b] = start * MatrixXd::Identity(p, p);
    Z[b] = start * MatrixXd::Identity(p, p);
  }
  VectorXd w = VectorXd::Zero(d);

  auto apply_adjoint = [&](const std::vector<MatrixXd>& Y) {
    VectorXd out = VectorXd::Zero(d);
    for (std::size_t b = 0; b < nb; ++b) {
      for (const auto& t : prob.blocks[b].terms) out(t.var) += inner(t.F, Y[b]);
    }
    return out;
  };

  // Best iterate by max(pinf, dinf, gap), handed back when progress stops.
  IpmResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  auto give_up = [&](LmiStatus status) {
    IpmResult out = best_merit <= res_merit(res) ? best : res;
    out.iterations = res.iterations;
    out.status = std::max({out.pinf, out.dinf, out.gap}) <= opts.accept_tol ? LmiStatus::kOptimal
                                                                             : status;
    return out;
  };

  // Gram matrix <F_i, F_j> for projecting X back onto A*(X) = c; rounding in
  // the HKM update lets the dual residual drift on ill-conditioned data.
  MatrixXd gram = MatrixXd::Zero(d, d);
  for (const auto& blk : prob.blocks) {
    for (const auto& ti : blk.terms) {
      for (const auto& tj : blk.terms) gram(ti.var, tj.var) += inner(ti.F, tj.F);
    }
  }
  const Eigen::LDLT<MatrixXd> gram_fact(gram);
  auto project_dual = [&] {
    const VectorXd r = prob.c - apply_adjoint(X);
    const VectorXd lam = gram_fact.solve(r);
    if (!lam.allFinite()) return;
    std::vector<MatrixXd> Xp = X;
    for (std::size_t b = 0; b < nb; ++b) {
      for (const auto& t : prob.blocks[b].terms) Xp[b] += lam(t.var) * t.F;
      Xp[b] = sym(Xp[b]);
      if (Eigen::LLT<MatrixXd>(Xp[b]).info() != Eigen::Success) return;
    }
    if ((prob.c - apply_adjoint(Xp)).norm() < r.norm()) X = std::move(Xp);
  };

  int stalled = 0;
  for (int it = 0;; ++it) {
    res.iterations = it;
    // Residuals and objectives.
    double rz_norm = 0.0;
    double xz = 0.0;
    double dobj = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& blk = prob.blocks[b];
      MatrixXd Fy = blk.F0;
      for (const auto& t : blk.terms) Fy += w(t.var) * t.F;
      Rz[b] = Fy - Z[b];
      rz_norm += Rz[b].squaredNorm();
      xz += inner(X[b], Z[b]);
      dobj -= inner(blk.F0, X[b]);
    }
    rz_norm = std::sqrt(rz_norm);
    const VectorXd AX = apply_adjoint(X);
    const VectorXd rx = prob.c - AX;
    const double pobj = prob.c.dot(w);
    const double mu = xz / cone_dim;

    res.w = w;
    res.pobj = pobj;
    res.dobj = dobj;
    res.pinf = rz_norm / (1.0 + f0_norm);
    res.dinf = rx.norm() / (1.0 + c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    res.gap = std::max(std::abs(pobj - dobj), xz) / denom;

    if (res_merit(res) < best_merit) {
      best = res;
      best_merit = res_merit(res);
      best_iter = it;
    }
    if (res.pinf <= opts.feas_tol && res.dinf <= opts.feas_tol && res.gap <= opts.gap_tol) {
      res.status = LmiStatus::kOptimal;
      return res;
    }
    // Primal infeasibility: X / (-<F0,X>) approaches a ray with A*(X) = 0.
    if (dobj > 0.0 && res.pinf > opts.feas_tol && AX.norm() <= opts.infeas_tol * dobj) {
      res.status = LmiStatus::kInfeasible;
      return res;
    }
    // Unboundedness: w / (-c'w) approaches a ray with sum_j w_j F_j >= 0.
    if (pobj < 0.0 && res.dinf > opts.feas_tol) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        const auto& blk = prob.blocks[b];
        MatrixXd Fw = MatrixXd::Zero(blk.size(), blk.size());
        for (const auto& t : blk.terms) Fw += w(t.var) * t.F;
        worst = std::min(worst, min_eig(Fw / -pobj));
      }
      if (worst >= -opts.infeas_tol) {
        res.status = LmiStatus::kUnbounded;
        return res;
      }
    }
    if (it >= opts.max_iter) return give_up(LmiStatus::kMaxIterations);
    if (it - best_iter > 30) return give_up(LmiStatus::kNumericalFailure);

    // Factorizations.
    std::vector<Eigen::LLT<MatrixXd>> cholX(nb), cholZ(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      cholX[b].compute(X[b]);
      cholZ[b].compute(Z[b]);
      if (cholX[b].info() != Eigen::Success || cholZ[b].info() != Eigen::Success) {
        return give_up(LmiStatus::kNumericalFailure);
      }
      Zinv[b] = cholZ[b].solve(MatrixXd::Identity(Z[b].rows(), Z[b].cols()));
      Zinv[b] = sym(Zinv[b]);
    }

    // Schur complement M_ij = sum_b tr(F_ib X_b F_jb Z_b^{-1}).
    MatrixXd M = MatrixXd::Zero(d, d);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& terms = prob.blocks[b].terms;
      for (std::size_t jj = 0; jj < terms.size(); ++jj) {
        const MatrixXd W = X[b] * terms[jj].F * Zinv[b];
        for (std::size_t ii = 0; ii <= jj; ++ii) {
          const double v = inner(terms[ii].F, W);
          M(terms[ii].var, terms[jj].var) += v;
          if (ii != jj) M(terms[jj].var, terms[ii].var) += v;
        }
      }
    }
    M = sym(M);
    Eigen::LLT<MatrixXd> cholM(M);
    Eigen::LDLT<MatrixXd> ldltM;
    const bool use_ldlt = cholM.info() != Eigen::Success;
    if (use_ldlt) {
      const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      ldltM.compute(M + reg * MatrixXd::Identity(d, d));
      if (ldltM.info() != Eigen::Success) return give_up(LmiStatus::kNumericalFailure);
    }
    auto solveM = [&](const VectorXd& rhs) -> VectorXd {
      return use_ldlt ? VectorXd(ldltM.solve(rhs)) : VectorXd(cholM.solve(rhs));
    };

    // Direction for XZ + ... = sigma mu I - corr, with G0 = sigma mu Z^-1 - X - corr Z^-1.
    std::vector<MatrixXd> dX(nb), dZ(nb);
    VectorXd dw(d);
    auto direction = [&](double sigma, const std::vector<MatrixXd>* cX,
                         const std::vector<MatrixXd>* cZ) {
      std::vector<MatrixXd> G0(nb), rhsMat(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        G0[b] = sigma * mu * Zinv[b] - X[b];
        if (cX) G0[b] -= (*cX)[b] * (*cZ)[b] * Zinv[b];
        rhsMat[b] = G0[b] - X[b] * Rz[b] * Zinv[b];
      }
      dw = solveM(apply_adjoint(rhsMat) - rx);
      auto assemble = [&] {
        for (std::size_t b = 0; b < nb; ++b) {
          dZ[b] = Rz[b];
          for (const auto& t : prob.blocks[b].terms) dZ[b] += dw(t.var) * t.F;
          dZ[b] = sym(dZ[b]);
          dX[b] = sym(G0[b] - X[b] * dZ[b] * Zinv[b]);
        }
      };
      assemble();
      // Refine against the assembled residual A*(dX) = rx; M is ill-conditioned
      // near the optimum.
      VectorXd err = rx - apply_adjoint(dX);
      double e = err.norm();
      for (int pass = 0; pass < 8 && e > 1e-15 * (1.0 + rx.norm()); ++pass) {
        const VectorXd prev = dw;
        dw -= solveM(err);
        assemble();
        VectorXd err2 = rx - apply_adjoint(dX);
        const double e2 = err2.norm();
        if (!(e2 < e)) {
          dw = prev;
          assemble();
          break;
        }
        const bool slow = e2 > 0.5 * e;
        err = std::move(err2);
        e = e2;
        if (slow) break;
      }
    };
    auto step_lengths = [&](double tau, double& ap, double& ad) {
      double mx = std::numeric_limits<double>::infinity();
      double mz = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        mx = std::min(mx, max_step(cholX[b], dX[b]));
        mz = std::min(mz, max_step(cholZ[b], dZ[b]));
      }
      ap = std::min(1.0, tau * mx);
      ad = std::min(1.0, tau * mz);
    };

    // Predictor.
    direction(0.0, nullptr, nullptr);
    double ap = 0.0;
    double ad = 0.0;
    step_lengths(1.0, ap, ad);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += inner(X[b] + ap * dX[b], Z[b] + ad * dZ[b]);
    }
    mu_aff /= cone_dim;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    const std::vector<MatrixXd> dXa = dX;
    const std::vector<MatrixXd> dZa = dZ;
    direction(sigma, &dXa, &dZa);
    const double tau = 0.98;
    step_lengths(tau, ap, ad);
    if (!dw.allFinite()) {
      return give_up(LmiStatus::kNumericalFailure);
    }

    for (std::size_t b = 0; b < nb; ++b) {
      X[b] = sym(X[b] + ap * dX[b]);
      Z[b] = sym(Z[b] + ad * dZ[b]);
    }
    w += ad * dw;
    if (ap == 1.0) project_dual();

    stalled = (ap < 1e-10 && ad < 1e-10) ? stalled + 1 : 0;
    if (stalled >= 5) {
      return give_up(LmiStatus::kNumericalFailure);
    }
  }
}

}  // namespace

LmiSolution solve(const LmiProblem& problem, const SolverOptions& opts) {
  problem.validate();
  const int d = problem.dim;
  LmiSolution sol;

  // Eliminate equalities: y = y0 + N v.
  VectorXd y0 = VectorXd::Zero(d);
  MatrixXd N;
  const bool reduce = !problem.equalities.empty();
  if (reduce) {
    const Eigen::Index e = static_cast<Eigen::Index>(problem.equalities.size());
    MatrixXd A(e, d);
    VectorXd bvec(e);
    for (Eigen::Index i = 0; i < e; ++i) {
      A.row(i) = problem.equalities[static_cast<std::size_t>(i)].a.transpose();
      bvec(i) = problem.equalities[static_cast<std::size_t>(i)].b;
    }
    Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    svd.setThreshold(smax > 0 ? 1e-12 : 1.0);
    const Eigen::Index rank = svd.rank();
    y0 = svd.solve(bvec);
    if ((A * y0 - bvec).norm() > 1e-10 * (1.0 + bvec.norm())) {
      sol.status = LmiStatus::kInfeasible;
      sol.y = y0;
      return sol;
    }
    N = svd.matrixV().rightCols(d - rank);
  }
  const int dr = reduce ? static_cast<int>(N.cols()) : d;

  // Reduced data, then drop variables absent from every block.
  std::vector<std::vector<MatrixXd>> coeff(problem.blocks.size());
  std::vector<MatrixXd> constants(problem.blocks.size());
  VectorXd c_red = reduce ? VectorXd(N.transpose() * problem.objective) : problem.objective;
  VectorXd col_norm = VectorXd::Zero(dr);
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const auto& blk = problem.blocks[b];
    constants[b] = blk.evaluate(y0);
    coeff[b].resize(static_cast<std::size_t>(dr));
    for (int j = 0; j < dr; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (!reduce) {
        if (blk.has_term(uj)) coeff[b][uj] = blk.coefficients[uj];
      } else {
        MatrixXd Fj = MatrixXd::Zero(blk.size(), blk.size());
        for (int i = 0; i < d; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          if (blk.has_term(ui) && N(i, j) != 0.0) Fj += N(i, j) * blk.coefficients[ui];
        }
        if (Fj.cwiseAbs().maxCoeff() > 1e-15) coeff[b][uj] = std::move(Fj);
      }
    }
  }

  // Block equilibration and removal of constant blocks.
  Scaled scaled;
  std::vector<int> var_index(static_cast<std::size_t>(dr), -1);
  std::vector<double> block_scale;
  bool constant_violation = false;
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    double scale = constants[b].size() ? constants[b].norm() : 0.0;
    bool any = false;
    for (int j = 0; j < dr; ++j) {
      const auto& Fj = coeff[b][static_cast<std::size_t>(j)];
      if (Fj.size()) {
        scale = std::max(scale, Fj.norm());
        any = true;
      }
    }
    if (constants[b].size() == 0) continue;
    if (!any) {
      if (min_eig(constants[b]) < -opts.feas_tol * std::max(1.0, constants[b].norm())) {
        constant_violation = true;
      }
      continue;
    }
    const double s = 1.0 / scale;
    ConeBlock cb;
    cb.F0 = s * constants[b];
    for (int j = 0; j < dr; ++j) {
      auto& Fj = coeff[b][static_cast<std::size_t>(j)];
      if (Fj.size()) {
        cb.terms.push_back({j, s * Fj});
        col_norm(j) += cb.terms.back().F.squaredNorm();
      }
    }
    scaled.blocks.push_back(std::move(cb));
  }
  if (constant_violation) {
    sol.status = LmiStatus::kInfeasible;
    sol.y = y0;
    return sol;
  }

  bool free_direction = false;
  int kept = 0;
  for (int j = 0; j < dr; ++j) {
    if (col_norm(j) > 0.0) {
      var_index[static_cast<std::size_t>(j)] = kept++;
    } else if (c_red(j) != 0.0) {
      free_direction = true;
    }
  }
  VectorXd var_scale(kept);
  scaled.dim = kept;
  scaled.c.resize(kept);
  for (int j = 0; j < dr; ++j) {
    const int k = var_index[static_cast<std::size_t>(j)];
    if (k < 0) continue;
    var_scale(k) = 1.0 / std::sqrt(col_norm(j));
    scaled.c(k) = c_red(j) * var_scale(k);
  }
  for (auto& blk : scaled.blocks) {
    for (auto& t : blk.terms) {
      t.var = var_index[static_cast<std::size_t>(t.var)];
      t.F *= var_scale(t.var);
    }
  }
  const double c_inf = scaled.c.size() ? scaled.c.cwiseAbs().maxCoeff() : 0.0;
  const double obj_scale = c_inf > 0.0 ? c_inf : 1.0;
  scaled.c /= obj_scale;

  IpmResult ipm;
  if (scaled.blocks.empty()) {
    ipm.status = LmiStatus::kOptimal;
    ipm.w = VectorXd::Zero(kept);
  } else {
    ipm = run_ipm(scaled, opts);
  }

  // Back-transform.
  VectorXd v = VectorXd::Zero(dr);
  for (int j = 0; j < dr; ++j) {
    const int k = var_index[static_cast<std::size_t>(j)];
    if (k >= 0) v(j) = ipm.w(k) * var_scale(k);
  }
  sol.y = reduce ? VectorXd(y0 + N * v) : v;
  sol.status = ipm.status;
  if (sol.status == LmiStatus::kOptimal && free_direction) sol.status = LmiStatus::kUnbounded;
  sol.iterations = ipm.iterations;
  sol.objective_value = problem.objective.dot(sol.y);
  sol.dual_objective = problem.objective.dot(y0) + obj_scale * ipm.dobj;
  sol.primal_residual = ipm.pinf;
  sol.dual_residual = ipm.dinf;
  sol.relative_gap = ipm.gap;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& blk : problem.blocks) {
    if (blk.size()) worst = std::min(worst, min_eig(blk.evaluate(sol.y)));
  }
  sol.min_block_eigenvalue = std::isfinite(worst) ? worst : 0.0;
  return sol;
}

MarginResult max_margin(const LmiProblem& strict, const std::vector<AffineBlock>& normalization,
                        const SolverOptions& opts) {
  strict.validate();
  const int d = strict.dim;
  LmiProblem prob;
  prob.dim = d + 1;
  prob.objective = VectorXd::Zero(d + 1);
  prob.objective(d) = -1.0;
  for (const auto& b : strict.blocks) {
    AffineBlock nb = b;
    nb.coefficients.resize(static_cast<std::size_t>(d + 1));
    nb.coefficients[static_cast<std::size_t>(d)] = -MatrixXd::Identity(b.size(), b.size());
    prob.blocks.push_back(std::move(nb));
  }
  for (const auto& b : normalization) {
    if (b.coefficients.size() > static_cast<std::size_t>(d)) {
      throw Failure(Signal::kDimensionMismatch, "normalization block has too many coefficients");
    }
    prob.blocks.push_back(b);
  }
  for (const auto& e : strict.equalities) {
    LinearEquality ne{VectorXd::Zero(d + 1), e.b};
    ne.a.head(d) = e.a;
    prob.equalities.push_back(std::move(ne));
  }

  MarginResult out;
  out.solution = solve(prob, opts);
  out.margin = out.solution.y(d);
  out.y = out.solution.y.head(d);
  return out;
}

// --- variable layout --------------------------------------------------------

MatrixXd VariableLayout::Symmetric::extract(const VectorXd& y) const {
  MatrixXd P(size, size);
  int k = offset;
  for (int j = 0; j < size; ++j) {
    for (int i = j; i < size; ++i) {
      P(i, j) = y(k);
      P(j, i) = y(k);
      ++k;
    }
  }
  return P;
}

void VariableLayout::Symmetric::embed(const MatrixXd& P, VectorXd& y) const {
  if (P.rows() != size || P.cols() != size) {
    throw Failure(Signal::kDimensionMismatch, "symmetric variable has wrong size");
  }
  int k = offset;
  for (int j = 0; j < size; ++j) {
    for (int i = j; i < size; ++i) y(k++) = P(i, j);
  }
}

MatrixXd VariableLayout::Rectangular::extract(const VectorXd& y) const {
  return Eigen::Map<const MatrixXd>(y.data() + offset, rows, cols);
}

void VariableLayout::Rectangular::embed(const MatrixXd& M, VectorXd& y) const {
  if (M.rows() != rows || M.cols() != cols) {
    throw Failure(Signal::kDimensionMismatch, "matrix variable has wrong size");
  }
  Eigen::Map<MatrixXd>(y.data() + offset, rows, cols) = M;
}

VariableLayout::Symmetric VariableLayout::add_symmetric(int p) {
  Symmetric s{dim_, p};
  dim_ += s.count();
  return s;
}

VariableLayout::Rectangular VariableLayout::add_matrix(int rows, int cols) {
  Rectangular r{dim_, rows, cols};
  dim_ += r.count();
  return r;
}

int VariableLayout::add_scalar() { return dim_++; }

}  // namespace ddctl
