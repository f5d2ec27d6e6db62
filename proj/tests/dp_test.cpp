#include "ddctl/dp.hpp"

#include <gtest/gtest.h>

#include "ddctl/errors.hpp"
#include "ddctl/experiment.hpp"
#include "design_fixtures.hpp"
#include "oracles.hpp"

namespace ddctl {
namespace {

using testing::unit_excitation;

LtiSystem scalar_system(double a = 0.5, double b = 1.0) {
  return LtiSystem(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b));
}

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd M(2, 2);
  M << a, b, c, d;
  return M;
}

TEST(RiccatiUpdate, Examples) {
  MatrixXd P = MatrixXd::Zero(3, 3);
  P.topLeftCorner(2, 2) = mat2(2, 1, 1, 3);
  P(2, 2) = 4;
  EXPECT_EQ(riccati_update(P, 2), P.topLeftCorner(2, 2));
  EXPECT_EQ(riccati_update(MatrixXd::Zero(2, 2), 1), MatrixXd::Zero(1, 1));
  EXPECT_NEAR(riccati_update(mat2(4.0 / 3, 2.0 / 3, 2.0 / 3, 7.0 / 3), 1)(0, 0), 8.0 / 7.0, 1e-15);
}

TEST(RiccatiUpdate, SingularBlock) {
  try {
    riccati_update(mat2(1, 0, 0, 0), 1);
    FAIL();
  } catch (const Failure& e) {
    EXPECT_EQ(e.signal(), Signal::kSingularBlock);
  }
}

TEST(ValueIteration, ScalarIterates) {
  const DataRecord rec =
      off_collect_restart(Plant(scalar_system()), unit_excitation(1, 1), 50, 3, 1);
  const DpTrace t = value_iteration(rec, CostWeights::identity(1, 1));
  ASSERT_GE(t.iterates.size(), 2u);
  EXPECT_LE((t.iterates[0] - MatrixXd::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LE((t.iterates[1] - mat2(1.25, 0.5, 0.5, 2.0)).norm(), 1e-12);
  EXPECT_TRUE(t.converged);
  const double X = oracle::scalar_dare(0.5, 1.0, 1.0, 1.0);
  const MatrixXd Pstar = mat2(1 + 0.25 * X, 0.5 * X, 0.5 * X, 1 + X);
  EXPECT_LE((t.final_P() - Pstar).norm(), 1e-6);
  EXPECT_LE(t.iterations, 200);
}

TEST(ValueIteration, StepMatchesModel) {
  oracle::Draw draw(61);
  for (int s = 0; s < 10; ++s) {
    const int n = draw.integer(1, 4);
    const int m = draw.integer(1, 2);
    const LtiSystem sys(draw.matrix(n, n, 0.5), draw.matrix(n, m));
    const CostWeights w(draw.spd(n), draw.spd(m));
    const DataRecord rec = off_collect_restart(Plant(sys), unit_excitation(n, m), 100, s, 1);
    ViOptions o;
    o.max_iter = 5;
    const DpTrace t = value_iteration(rec, w, o);
    MatrixXd AB(n, n + m);
    AB << sys.A(), sys.B();
    MatrixXd P = MatrixXd::Zero(n + m, n + m);
    for (int k = 0; k < 5; ++k) {
      P = w.lambda() + AB.transpose() * riccati_update(P, n) * AB;
      EXPECT_LE((t.iterates[k] - P).norm(), 1e-10 * (1.0 + P.norm()));
    }
  }
}

TEST(ValueIteration, MonotoneConvergenceToOracle) {
  for (int s = 0; s < 10; ++s) {
    const int n = 1 + s % 3;
    const int m = 1 + s % 2;
    const auto g = gen_system(n, m, {}, 600 + s);
    const DataRecord rec = off_collect_restart(Plant(g.sys), unit_excitation(n, m), 100, s, 1);
    const DpTrace t = value_iteration(rec, g.weights);
    ASSERT_TRUE(t.converged);
    const MatrixXd X = oracle::dare(g.sys.A(), g.sys.B(), g.weights.Q(), g.weights.R());
    const MatrixXd Pstar = oracle::q_matrix(g.sys.A(), g.sys.B(), g.weights.lambda(), X);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& P : t.iterates) {
      const double err = (P - Pstar).norm();
      EXPECT_LE(err, prev + 1e-9 * Pstar.norm());
      prev = err;
    }
    EXPECT_LE(prev, 1e-6 * (1.0 + Pstar.norm()));
  }
}

TEST(ValueIteration, IterationCapLeavesTraceUnconverged) {
  const DataRecord rec =
      off_collect_restart(Plant(scalar_system()), unit_excitation(1, 1), 50, 3, 1);
  ViOptions o;
  o.max_iter = 3;
  const DpTrace t = value_iteration(rec, CostWeights::identity(1, 1), o);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.iterations, 3);
  EXPECT_EQ(t.residuals.size(), 3u);
}

TEST(PolicyEvaluation, ScalarFirstIterate) {
  const DataRecord rec = on_collect(Plant(scalar_system()), Gain{MatrixXd::Zero(1, 1)}, 4);
  const MatrixXd P = evaluate_policy(rec, MatrixXd::Identity(2, 2));
  EXPECT_LE((P - mat2(4.0 / 3, 2.0 / 3, 2.0 / 3, 7.0 / 3)).norm(), 1e-10);
  EXPECT_NEAR(greedy_gain(P, 1).F(0, 0), -2.0 / 7.0, 1e-10);
}

TEST(PolicyEvaluation, PrintedOrientationStalls) {
  const LtiSystem sys = scalar_system();
  DataRecord rec;
  rec.kind = DataKind::kOnPolicy;
  rec.scheme = Scheme::kExploringStarts;
  rec.n = 1;
  rec.m = 1;
  rec.sample_count = 1;
  rec.S = MatrixXd::Identity(2, 2);
  rec.H = oracle::augmented(sys.A(), sys.B(), MatrixXd::Zero(1, 1)).transpose();
  const MatrixXd printed = evaluate_policy(rec, MatrixXd::Identity(2, 2), Orientation::kPrinted);
  EXPECT_NEAR(printed(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(greedy_gain(printed, 1).F(0, 0), 0.0, 1e-12);
  const MatrixXd bellman = evaluate_policy(rec, MatrixXd::Identity(2, 2));
  EXPECT_NEAR(greedy_gain(bellman, 1).F(0, 0), -2.0 / 7.0, 1e-10);
}

TEST(PolicyEvaluation, UnstablePolicy) {
  const DataRecord rec = on_collect(Plant(scalar_system(2.0)), Gain{MatrixXd::Zero(1, 1)}, 3);
  try {
    evaluate_policy(rec, MatrixXd::Identity(2, 2));
    FAIL();
  } catch (const Failure& e) {
    EXPECT_EQ(e.signal(), Signal::kUnstablePolicy);
  }
}

TEST(PolicyIteration, ScalarConvergence) {
  const Plant plant(scalar_system());
  const DpTrace t =
      policy_iteration(on_policy_collector(plant), CostWeights::identity(1, 1), Gain{MatrixXd::Zero(1, 1)});
  ASSERT_TRUE(t.converged);
  EXPECT_NEAR(t.gains[0].F(0, 0), -2.0 / 7.0, 1e-10);
  const double X = oracle::scalar_dare(0.5, 1.0, 1.0, 1.0);
  EXPECT_NEAR(t.final_F().F(0, 0), oracle::scalar_gain(0.5, 1.0, 1.0, X), 1e-6);
  EXPECT_EQ(t.residuals.size() + 1, t.iterates.size());
}

TEST(PolicyIteration, ImprovesAndConverges) {
  for (int s = 0; s < 10; ++s) {
    const int n = 1 + s % 4;
    const int m = 1 + s % 2;
    GenOptions opts;
    opts.stable_open_loop = true;
    const auto g = gen_system(n, m, opts, 700 + s);
    const DpTrace t = policy_iteration(on_policy_collector(Plant(g.sys)), g.weights,
                                       Gain{MatrixXd::Zero(m, n)});
    ASSERT_TRUE(t.converged);
    EXPECT_LE(t.iterations, 20);
    const MatrixXd X = oracle::dare(g.sys.A(), g.sys.B(), g.weights.Q(), g.weights.R());
    const MatrixXd Fstar = oracle::lqr_gain(g.sys.A(), g.sys.B(), g.weights.R(), X);
    EXPECT_LE((t.final_F().F - Fstar).norm(), 1e-6 * (1.0 + Fstar.norm()));
    double prev = oracle::augmented_cost(g.sys.A(), g.sys.B(), MatrixXd::Zero(m, n),
                                         g.weights.lambda());
    for (const Gain& F : t.gains) {
      const double J = oracle::augmented_cost(g.sys.A(), g.sys.B(), F.F, g.weights.lambda());
      EXPECT_LE(J, prev + 1e-8 * (1.0 + prev));
      prev = J;
    }
  }
}

TEST(PolicyIteration, UnstableInitialGain) {
  try {
    policy_iteration(on_policy_collector(Plant(scalar_system(2.0))), CostWeights::identity(1, 1),
                     Gain{MatrixXd::Zero(1, 1)});
    FAIL();
  } catch (const Failure& e) {
    EXPECT_EQ(e.signal(), Signal::kUnstablePolicy);
  }
}

TEST(PolicyIteration, CollectorOwnsThePlant) {
  // The algorithm only sees what the collector returns.
  int calls = 0;
  const Plant plant(scalar_system());
  const Collector counting = [&](const Gain& F, int round) {
    ++calls;
    EXPECT_EQ(round, calls - 1);
    return on_collect(plant, F, 3);
  };
  const DpTrace t =
      policy_iteration(counting, CostWeights::identity(1, 1), Gain{MatrixXd::Zero(1, 1)});
  EXPECT_EQ(calls, t.iterations);
}

}  // namespace
}  // namespace ddctl
