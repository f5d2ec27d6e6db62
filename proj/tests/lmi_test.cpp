#include "ddctl/lmi.hpp"

#include <gtest/gtest.h>

#include "ddctl/errors.hpp"
#include "oracles.hpp"
#include "sdp_fixtures.hpp"

namespace ddctl {
namespace {

using testing::random_sdp;

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(Solve, ScalarLowerBound) {
  LmiProblem p;
  p.dim = 1;
  p.objective = VectorXd::Ones(1);
  p.blocks.push_back(make_block(1, scalar(-1.0), [](const VectorXd& y) { return scalar(y(0)); }));
  const LmiSolution sol = solve(p);
  ASSERT_EQ(sol.status, LmiStatus::kOptimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-7);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-7);
}

TEST(Solve, TwoByTwoCoupling) {
  // min y1 s.t. [[y1, 1], [1, y2]] >= 0, y2 <= 4: optimum 1/4.
  LmiProblem p;
  p.dim = 2;
  p.objective = VectorXd::Unit(2, 0);
  MatrixXd C(2, 2);
  C << 0, 1, 1, 0;
  p.blocks.push_back(make_block(2, C, [](const VectorXd& y) {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = y(0);
    M(1, 1) = y(1);
    return M;
  }));
  p.blocks.push_back(make_block(2, scalar(4.0), [](const VectorXd& y) { return scalar(-y(1)); }));
  const LmiSolution sol = solve(p);
  ASSERT_EQ(sol.status, LmiStatus::kOptimal);
  EXPECT_NEAR(sol.objective_value, 0.25, 1e-7);
  EXPECT_NEAR(sol.y(1), 4.0, 1e-6);
}

TEST(Solve, LargestEigenvalue) {
  oracle::Draw draw(41);
  for (int t = 0; t < 10; ++t) {
    const int p = draw.integer(1, 6);
    const MatrixXd M = testing::random_symmetric(draw, p);
    LmiProblem prob;
    prob.dim = 1;
    prob.objective = VectorXd::Ones(1);
    prob.blocks.push_back(make_block(1, -M, [p](const VectorXd& y) {
      return MatrixXd(y(0) * MatrixXd::Identity(p, p));
    }));
    const LmiSolution sol = solve(prob);
    ASSERT_EQ(sol.status, LmiStatus::kOptimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    EXPECT_NEAR(sol.objective_value, es.eigenvalues().maxCoeff(), 1e-7 * (1.0 + M.norm()));
  }
}

TEST(Solve, EqualityConstraint) {
  // min y1 + y2 s.t. [[y1, 1], [1, y2]] >= 0, y1 = y2: optimum y = (1, 1).
  LmiProblem p;
  p.dim = 2;
  p.objective = VectorXd::Ones(2);
  MatrixXd C(2, 2);
  C << 0, 1, 1, 0;
  p.blocks.push_back(make_block(2, C, [](const VectorXd& y) {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = y(0);
    M(1, 1) = y(1);
    return M;
  }));
  LinearEquality eq;
  eq.a = VectorXd(2);
  eq.a << 1, -1;
  p.equalities.push_back(eq);
  const LmiSolution sol = solve(p);
  ASSERT_EQ(sol.status, LmiStatus::kOptimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.y(1), 1.0, 1e-6);
}

TEST(Solve, DetectsInfeasibility) {
  LmiProblem p;
  p.dim = 1;
  p.objective = VectorXd::Zero(1);
  p.blocks.push_back(make_block(1, scalar(-1.0), [](const VectorXd& y) { return scalar(y(0)); }));
  p.blocks.push_back(make_block(1, scalar(0.0), [](const VectorXd& y) { return scalar(-y(0)); }));
  EXPECT_EQ(solve(p).status, LmiStatus::kInfeasible);
}

TEST(Solve, DetectsUnboundedness) {
  LmiProblem p;
  p.dim = 1;
  p.objective = -VectorXd::Ones(1);
  p.blocks.push_back(make_block(1, scalar(0.0), [](const VectorXd& y) { return scalar(y(0)); }));
  EXPECT_EQ(solve(p).status, LmiStatus::kUnbounded);
}

TEST(Solve, RejectsMalformedProblems) {
  LmiProblem p;
  p.dim = 2;
  p.objective = VectorXd::Ones(1);
  EXPECT_THROW(p.validate(), Failure);
  p.objective = VectorXd::Ones(2);
  AffineBlock b;
  b.constant = MatrixXd::Zero(2, 2);
  b.constant(0, 1) = 1.0;
  p.blocks.push_back(b);
  EXPECT_THROW(p.validate(), Failure);
}

TEST(Solve, RandomProblemsRespectDualityBounds) {
  oracle::Draw draw(42);
  for (int t = 0; t < 50; ++t) {
    const auto sdp = random_sdp(draw);
    const LmiSolution sol = solve(sdp.problem);
    ASSERT_EQ(sol.status, LmiStatus::kOptimal) << "problem " << t;
    const double tol = 1e-6 * (1.0 + std::abs(sol.objective_value));
    EXPECT_LE(sol.objective_value, sdp.upper + tol);
    EXPECT_GE(sol.objective_value, sdp.lower - tol);
    EXPECT_LE(sol.dual_objective, sol.objective_value + tol);
    EXPECT_NEAR(sol.dual_objective, sol.objective_value, tol);
    for (const auto& b : sdp.problem.blocks) {
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(b.evaluate(sol.y)).eigenvalues()(0), -1e-7);
    }
  }
}

TEST(Solve, ObjectiveAndBlockScalingInvariance) {
  oracle::Draw draw(43);
  for (int t = 0; t < 30; ++t) {
    const auto sdp = random_sdp(draw);
    const LmiSolution base = solve(sdp.problem);
    ASSERT_EQ(base.status, LmiStatus::kOptimal);
    LmiProblem scaled = sdp.problem;
    const double alpha = std::pow(10.0, draw.uniform(-3, 3));
    scaled.objective *= alpha;
    for (auto& b : scaled.blocks) {
      const double beta = std::pow(10.0, draw.uniform(-3, 3));
      b.constant *= beta;
      for (auto& Fi : b.coefficients) Fi *= beta;
    }
    const LmiSolution sol = solve(scaled);
    ASSERT_EQ(sol.status, LmiStatus::kOptimal);
    EXPECT_NEAR(sol.objective_value / alpha, base.objective_value,
                1e-6 * (1.0 + std::abs(base.objective_value)));
  }
}

TEST(Solve, VariableScalingInvariance) {
  oracle::Draw draw(44);
  for (int t = 0; t < 30; ++t) {
    const auto sdp = random_sdp(draw);
    const LmiSolution base = solve(sdp.problem);
    ASSERT_EQ(base.status, LmiStatus::kOptimal);
    LmiProblem scaled = sdp.problem;
    VectorXd s(scaled.dim);
    for (int i = 0; i < scaled.dim; ++i) {
      s(i) = std::pow(10.0, draw.uniform(-2, 2));
      scaled.objective(i) *= s(i);
      for (auto& b : scaled.blocks) b.coefficients[i] *= s(i);
    }
    const LmiSolution sol = solve(scaled);
    ASSERT_EQ(sol.status, LmiStatus::kOptimal);
    EXPECT_NEAR(sol.objective_value, base.objective_value,
                1e-6 * (1.0 + std::abs(base.objective_value)));
  }
}

TEST(MaxMargin, IntervalMidpoint) {
  // max t s.t. y - t >= 0, 1 - y - t >= 0: t = 1/2 at y = 1/2.
  LmiProblem strict;
  strict.dim = 1;
  strict.objective = VectorXd::Zero(1);
  MatrixXd C = MatrixXd::Zero(2, 2);
  C(1, 1) = 1.0;
  strict.blocks.push_back(make_block(1, C, [](const VectorXd& y) {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = y(0);
    M(1, 1) = -y(0);
    return M;
  }));
  const MarginResult r = max_margin(strict, {});
  ASSERT_EQ(r.solution.status, LmiStatus::kOptimal);
  EXPECT_NEAR(r.margin, 0.5, 1e-7);
  EXPECT_NEAR(r.y(0), 0.5, 1e-6);
}

TEST(MaxMargin, NormalizationBoundsTheMargin) {
  // max t s.t. y - t >= 0 with y <= 2.
  LmiProblem strict;
  strict.dim = 1;
  strict.objective = VectorXd::Zero(1);
  strict.blocks.push_back(make_block(1, scalar(0.0), [](const VectorXd& y) { return scalar(y(0)); }));
  const std::vector<AffineBlock> norm{
      make_block(1, scalar(2.0), [](const VectorXd& y) { return scalar(-y(0)); })};
  const MarginResult r = max_margin(strict, norm);
  ASSERT_EQ(r.solution.status, LmiStatus::kOptimal);
  EXPECT_NEAR(r.margin, 2.0, 1e-7);
}

TEST(VariableLayout, EmbeddingRoundTrip) {
  oracle::Draw draw(45);
  for (int t = 0; t < 50; ++t) {
    VariableLayout layout;
    const int p = draw.integer(1, 6);
    const auto P = layout.add_symmetric(p);
    const auto G = layout.add_matrix(draw.integer(1, 4), draw.integer(1, 4));
    const int s = layout.add_scalar();
    EXPECT_EQ(layout.dim(), P.count() + G.count() + 1);
    const MatrixXd Pm = testing::random_symmetric(draw, p);
    const MatrixXd Gm = draw.matrix(G.rows, G.cols);
    VectorXd y = VectorXd::Zero(layout.dim());
    P.embed(Pm, y);
    G.embed(Gm, y);
    y(s) = 3.0;
    EXPECT_EQ(P.extract(y), Pm);
    EXPECT_EQ(G.extract(y), Gm);
    VectorXd y2 = VectorXd::Zero(layout.dim());
    P.embed(P.extract(y), y2);
    G.embed(G.extract(y), y2);
    y2(s) = 3.0;
    EXPECT_EQ(y, y2);
  }
}

TEST(StatusName, Names) {
  EXPECT_EQ(status_name(LmiStatus::kOptimal), "optimal");
  EXPECT_EQ(status_name(LmiStatus::kInfeasible), "infeasible");
}

}  // namespace
}  // namespace ddctl
