#include "ddctl/dp.hpp"

#include <string>

#include "ddctl/errors.hpp"

namespace ddctl {

namespace {

void check_weights(const DataRecord& rec, const CostWeights& w) {
  if (w.n() != rec.n || w.m() != rec.m) {
    throw Failure(Signal::kDimensionMismatch, "weights do not match the data dimensions");
  }
}

Eigen::LLT<MatrixXd> factor_S(const DataRecord& rec) {
  Eigen::LLT<MatrixXd> llt(rec.S);
  if (llt.info() != Eigen::Success || !is_valid(rec, 0.0)) {
    throw Failure(Signal::kInvalidData, "S is not positive definite");
  }
  return llt;
}

// Lower-triangle coordinates of a symmetric q x q matrix.
struct SymIndex {
  int q;
  int count() const { return q * (q + 1) / 2; }
  template <class F>
  void for_each(F&& f) const {
    int k = 0;
    for (int j = 0; j < q; ++j) {
      for (int i = j; i < q; ++i) f(k++, i, j);
    }
  }
};

}  // namespace

MatrixXd riccati_update(const MatrixXd& P, int n) {
  const Eigen::Index q = P.rows();
  if (P.cols() != q || n < 1 || n >= q) {
    throw Failure(Signal::kDimensionMismatch, "riccati_update needs a square (n+m) matrix");
  }
  const Eigen::Index m = q - n;
  if (P.isZero(0.0)) return MatrixXd::Zero(n, n);
  const MatrixXd P12 = P.topRightCorner(n, m);
  Eigen::LLT<MatrixXd> llt(P.bottomRightCorner(m, m));
  if (llt.info() != Eigen::Success) {
    throw Failure(Signal::kSingularBlock, "P22 is not positive definite");
  }
  return symmetrize(P.topLeftCorner(n, n) - P12 * llt.solve(P12.transpose()));
}

Gain greedy_gain(const MatrixXd& P, int n) {
  const Eigen::Index q = P.rows();
  if (P.cols() != q || n < 1 || n >= q) {
    throw Failure(Signal::kDimensionMismatch, "greedy_gain needs a square (n+m) matrix");
  }
  const Eigen::Index m = q - n;
  Eigen::LLT<MatrixXd> llt(P.bottomRightCorner(m, m));
  if (llt.info() != Eigen::Success) {
    throw Failure(Signal::kSingularBlock, "P22 is not positive definite");
  }
  return Gain{-llt.solve(P.topRightCorner(n, m).transpose())};
}

DpTrace value_iteration(const DataRecord& rec, const CostWeights& w, const ViOptions& opts) {
  validate_record(rec);
  if (rec.kind != DataKind::kOffPolicy) {
    throw Failure(Signal::kInvalidData, "value iteration needs off-policy data");
  }
  check_weights(rec, w);
  if (!(opts.eps_stop > 0.0)) throw Failure(Signal::kInvalidArgument, "eps_stop must be positive");
  const auto llt = factor_S(rec);
  const MatrixXd psi = llt.solve(rec.H);
  const MatrixXd lambda = w.lambda();

  DpTrace trace;
  MatrixXd P = MatrixXd::Zero(lambda.rows(), lambda.cols());
  for (int k = 0; k < opts.max_iter; ++k) {
    MatrixXd next = symmetrize(lambda + psi * riccati_update(P, rec.n) * psi.transpose());
    const double step = (next - P).norm();
    P = std::move(next);
    trace.iterates.push_back(P);
    trace.gains.push_back(greedy_gain(P, rec.n));
    trace.residuals.push_back(step);
    trace.iterations = k + 1;
    if (step <= opts.eps_stop) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

Collector on_policy_collector(const Plant& plant, int N, std::uint64_t seed) {
  const int samples = N > 0 ? N : plant.n() + plant.m() + 2;
  return [plant, samples, seed](const Gain& F, int round) {
    return on_collect(plant, F, samples, seed + static_cast<std::uint64_t>(round));
  };
}

MatrixXd evaluate_policy(const DataRecord& rec, const MatrixXd& lambda, Orientation orientation) {
  validate_record(rec);
  if (rec.kind != DataKind::kOnPolicy) {
    throw Failure(Signal::kInvalidData, "policy evaluation needs on-policy data");
  }
  const int q = rec.n + rec.m;
  if (lambda.rows() != q || lambda.cols() != q) {
    throw Failure(Signal::kDimensionMismatch, "weight must be (n+m) x (n+m)");
  }
  const auto llt = factor_S(rec);
  // The data determine the closed loop: S A_F' = H.
  const MatrixXd AF = llt.solve(rec.H).transpose();
  const double rho = spectral_radius(AF);
  if (!(rho < 1.0)) {
    throw Failure(Signal::kUnstablePolicy, "closed loop of the data is not Schur stable", rho);
  }

  const MatrixXd& S = rec.S;
  const MatrixXd Ht = orientation == Orientation::kQBellman ? MatrixXd(rec.H)
                                                            : MatrixXd(rec.H.transpose());
  // L(P) = S P S - Ht P Ht' over symmetric P, one column per lower-triangle unknown.
  const SymIndex idx{q};
  MatrixXd L(idx.count(), idx.count());
  idx.for_each([&](int col, int i, int j) {
    MatrixXd E = MatrixXd::Zero(q, q);
    E(i, j) = 1.0;
    E(j, i) = 1.0;
    const MatrixXd image = S * E * S - Ht * E * Ht.transpose();
    idx.for_each([&](int row, int a, int b) { L(row, col) = image(a, b); });
  });
  const MatrixXd rhs_mat = S * lambda * S;
  VectorXd rhs(idx.count());
  idx.for_each([&](int row, int a, int b) { rhs(row) = rhs_mat(a, b); });

  Eigen::FullPivLU<MatrixXd> lu(L);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw Failure(Signal::kUnstablePolicy, "policy evaluation system is singular");
  }
  const VectorXd p = lu.solve(rhs);
  MatrixXd P(q, q);
  idx.for_each([&](int k, int i, int j) {
    P(i, j) = p(k);
    P(j, i) = p(k);
  });
  if (min_eigenvalue(P) < -defect_tol(P)) {
    throw Failure(Signal::kUnstablePolicy, "policy evaluation gave an indefinite P",
                  min_eigenvalue(P));
  }
  return P;
}

DpTrace policy_iteration(const Collector& collect, const CostWeights& w, const Gain& F0,
                         const PiOptions& opts) {
  if (!collect) throw Failure(Signal::kInvalidArgument, "collector is empty");
  if (!(opts.eps_stop > 0.0)) throw Failure(Signal::kInvalidArgument, "eps_stop must be positive");
  if (F0.F.rows() != w.m() || F0.F.cols() != w.n()) {
    throw Failure(Signal::kDimensionMismatch, "initial gain must be m x n");
  }
  const MatrixXd lambda = w.lambda();
  DpTrace trace;
  Gain F = F0;
  for (int k = 0; k < opts.max_iter; ++k) {
    const DataRecord rec = collect(F, k);
    check_weights(rec, w);
    MatrixXd P = evaluate_policy(rec, lambda, opts.orientation);
    F = greedy_gain(P, rec.n);
    trace.iterations = k + 1;
    if (!trace.iterates.empty()) {
      const double step = (P - trace.iterates.back()).norm();
      trace.residuals.push_back(step);
      trace.iterates.push_back(std::move(P));
      trace.gains.push_back(F);
      if (step <= opts.eps_stop) {
        trace.converged = true;
        break;
      }
    } else {
      trace.iterates.push_back(std::move(P));
      trace.gains.push_back(F);
    }
  }
  return trace;
}

}  // namespace ddctl
