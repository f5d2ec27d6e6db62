// Acceptance gate: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ddctl/collect.hpp"
#include "ddctl/design.hpp"
#include "ddctl/dp.hpp"
#include "ddctl/errors.hpp"
#include "ddctl/experiment.hpp"
#include "ddctl/lmi.hpp"
#include "ddctl/lti.hpp"
#include "design_fixtures.hpp"
#include "oracles.hpp"
#include "sdp_fixtures.hpp"

namespace ddctl {
namespace {

using testing::closed_loop;
using testing::unit_excitation;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;
  std::function<void(Outcome&)> body;
};

LtiSystem scalar_system(double a = 0.5, double b = 1.0) {
  return LtiSystem(MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b));
}

MatrixXd stacked_transpose(const LtiSystem& sys) {
  MatrixXd AB(sys.n(), sys.n() + sys.m());
  AB << sys.A(), sys.B();
  return AB.transpose();
}

double rel_defect(const MatrixXd& lhs, const MatrixXd& H) {
  return (lhs - H).norm() / (1.0 + H.norm());
}

MatrixXd oracle_gain(const GeneratedSystem& g) {
  const MatrixXd X = oracle::dare(g.sys.A(), g.sys.B(), g.weights.Q(), g.weights.R());
  return oracle::lqr_gain(g.sys.A(), g.sys.B(), g.weights.R(), X);
}

void oracle_correctness(Outcome& o) {
  const double Xs = oracle::scalar_dare(0.5, 1.0, 1.0, 1.0);
  const double Fs = oracle::scalar_gain(0.5, 1.0, 1.0, Xs);
  const RiccatiSolution sol = solve_dare(scalar_system(), CostWeights::identity(1, 1));
  const double eX = std::abs(sol.X(0, 0) - Xs);
  const double eF = std::abs(sol.Fstar.F(0, 0) - Fs);
  o.require(eX <= 1e-9, "scalar X*");
  o.require(eF <= 1e-6, "scalar F*");
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto g = gen_system(1 + t % 5, 1 + t % 3, {}, 1000 + t);
    const RiccatiSolution s = solve_dare(g.sys, g.weights);
    const MatrixXd& A = g.sys.A();
    const MatrixXd& B = g.sys.B();
    const MatrixXd& X = s.X;
    const MatrixXd res = A.transpose() * X * A -
                         A.transpose() * X * B *
                             (g.weights.R() + B.transpose() * X * B).ldlt().solve(B.transpose() * X * A) +
                         g.weights.Q() - X;
    worst = std::max(worst, res.norm() / std::max(1.0, X.norm()));
  }
  o.require(worst <= 1e-10, "ARE residual");
  o.detail << "X* err " << eX << ", F* err " << eF << " (F* = " << Fs
           << "), worst relative ARE residual " << worst << " on 50 systems";
}

void data_identities(Outcome& o) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 5;
    const int m = 1 + t % 3;
    const auto g = gen_system(n, m, {}, 2000 + t);
    const Plant plant(g.sys);
    const MatrixXd AB = stacked_transpose(g.sys);
    oracle::Draw draw(t);
    const Gain F{draw.matrix(m, n, 0.3)};
    const DataRecord on = on_collect(plant, F, 3);
    worst = std::max(worst, rel_defect(on.S * oracle::augmented(g.sys.A(), g.sys.B(), F.F).transpose(),
                                       on.H));
    ExcitationSpec spec = unit_excitation(n, m);
    worst = std::max(worst, rel_defect(off_collect(plant, spec, 100000, t).S * AB,
                                       off_collect(plant, spec, 100000, t).H));
    const DataRecord rs = off_collect_restart(plant, spec, 100, t);
    worst = std::max(worst, rel_defect(rs.S * AB, rs.H));
    spec.K = oracle_gain(g);
    spec.epsilon = 1e-6;
    const DataRecord pe = off_collect_periodic(plant, spec, 100, 100000, t);
    worst = std::max(worst, rel_defect(pe.S * AB, pe.H));
  }
  o.require(worst <= 1e-10, "identity defect");
  o.detail << "worst relative defect " << worst << " over 4 schemes x 20 systems";
}

void stability_classification(Outcome& o) {
  oracle::Draw draw(3001);
  int correct = 0;
  for (int t = 0; t < 100; ++t) {
    const bool stable = t % 2 == 0;
    const int n = draw.integer(1, 6);
    const int m = draw.integer(1, std::min(4, 10 - n));
    const double rho = stable ? draw.uniform(0.05, 0.95) : draw.uniform(1.05, 2.0);
    const auto cl = closed_loop(draw, n, m, rho);
    try {
      const bool verdict = eval_stability(on_collect(Plant(cl.sys), cl.F, 2)).stable;
      correct += verdict == stable ? 1 : 0;
    } catch (const Failure& e) {
      o.detail << "trial " << t << ": " << e.what() << "; ";
    }
  }
  o.require(correct == 100, "verdicts");
  o.detail << correct << "/100 correct";
}

void stabilization(Outcome& o) {
  int stabilized = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 5;
    const int m = 1 + (t / 5) % 3;
    const auto g = gen_system(n, m, {}, 4000 + t);
    try {
      const DataRecord rec = off_collect_restart(Plant(g.sys), unit_excitation(n, m), 200, t, 1);
      const DesignResult r = design_stabilizing(rec);
      stabilized += oracle::spectral_radius(g.sys.A() + g.sys.B() * r.F.F) < 1.0 ? 1 : 0;
    } catch (const Failure& e) {
      o.detail << "trial " << t << ": " << e.what() << "; ";
    }
  }
  o.require(stabilized == 100, "stabilized gains");
  int infeasible = 0;
  MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, 0.5;
  MatrixXd B(2, 1);
  B << 0.0, 1.0;
  const LtiSystem fixtures[] = {scalar_system(2.0, 0.0), LtiSystem(A, B)};
  for (const LtiSystem& sys : fixtures) {
    const DataRecord rec =
        off_collect_restart(Plant(sys), unit_excitation(sys.n(), sys.m()), 200, 9, 1);
    try {
      design_stabilizing(rec);
    } catch (const Failure& e) {
      infeasible += e.signal() == Signal::kInfeasible ? 1 : 0;
    }
  }
  o.require(infeasible == 2, "unstabilizable fixtures");
  o.detail << stabilized << "/100 stabilizing, " << infeasible << "/2 unstabilizable fixtures infeasible";
}

void cost_evaluation(Outcome& o) {
  const CostCertificate scalar = eval_cost(
      on_collect(Plant(scalar_system()), Gain{MatrixXd::Zero(1, 1)}, 2), CostWeights::identity(1, 1));
  const double hand = 11.0 / 3.0;
  o.require(std::abs(scalar.value - hand) <= 1e-4 * (1.0 + hand), "scalar 11/3");
  oracle::Draw draw(5001);
  double worst = 0.0;
  for (int t = 0; t < 30; ++t) {
    const int n = draw.integer(1, 4);
    const int m = draw.integer(1, 3);
    const auto cl = closed_loop(draw, n, m, draw.uniform(0.05, 0.95));
    const CostWeights w(draw.spd(n), draw.spd(m));
    const double expected = oracle::augmented_cost(cl.sys.A(), cl.sys.B(), cl.F.F, w.lambda());
    try {
      const double v = eval_cost(on_collect(Plant(cl.sys), cl.F, 2), w).value;
      worst = std::max(worst, std::abs(v - expected) / (1.0 + expected));
    } catch (const Failure& e) {
      o.require(false, e.what());
    }
  }
  o.require(worst <= 1e-4, "random instances");
  o.detail << "scalar value " << scalar.value << " (11/3), worst |LMI - Tr(Lambda P)|/(1+value) "
           << worst << " on 30 instances";
}

void lqr_design(Outcome& o) {
  double worst_gain = 0.0;
  double worst_eps = 0.0;
  int failures = 0;
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 5;
    const int m = 1 + (t / 5) % 3;
    const auto g = gen_system(n, m, {}, 6000 + t);
    const MatrixXd Fstar = oracle_gain(g);
    try {
      const DataRecord rec = off_collect_restart(Plant(g.sys), unit_excitation(n, m), 200, t, 1);
      DesignOptions o1;
      o1.epsilon = 1e-4;
      DesignOptions o2;
      o2.epsilon = 1e-6;
      const MatrixXd F1 = design_lqr(rec, g.weights, o1).F.F;
      const MatrixXd F2 = design_lqr(rec, g.weights, o2).F.F;
      worst_gain = std::max({worst_gain, (F1 - Fstar).norm() / (1.0 + Fstar.norm()),
                             (F2 - Fstar).norm() / (1.0 + Fstar.norm())});
      worst_eps = std::max(worst_eps, (F1 - F2).norm());
    } catch (const Failure& e) {
      ++failures;
      o.detail << "trial " << t << ": " << e.what() << "; ";
    }
  }
  o.require(failures == 0, "design failures");
  o.require(worst_gain <= 1e-3, "gain accuracy");
  o.require(worst_eps <= 1e-4, "epsilon independence");
  o.detail << "worst ||F - F*||/(1+||F*||) " << worst_gain << ", worst ||F(1e-4) - F(1e-6)|| "
           << worst_eps << " on 30 instances";
}

void value_iteration_check(Outcome& o) {
  const DataRecord rec =
      off_collect_restart(Plant(scalar_system()), unit_excitation(1, 1), 50, 1, 1);
  const DpTrace s = value_iteration(rec, CostWeights::identity(1, 1));
  MatrixXd P2(2, 2);
  P2 << 1.25, 0.5, 0.5, 2.0;
  const double e1 = (s.iterates.at(0) - MatrixXd::Identity(2, 2)).norm();
  const double e2 = (s.iterates.at(1) - P2).norm();
  o.require(e1 <= 1e-12 && e2 <= 1e-12, "scalar P1, P2");
  double worst = 0.0;
  int max_iter = 0;
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 5;
    const int m = 1 + (t / 5) % 3;
    const auto g = gen_system(n, m, {}, 7000 + t);
    const DataRecord r = off_collect_restart(Plant(g.sys), unit_excitation(n, m), 200, t, 1);
    ViOptions opts;
    opts.max_iter = 500;
    const DpTrace tr = value_iteration(r, g.weights, opts);
    const MatrixXd X = oracle::dare(g.sys.A(), g.sys.B(), g.weights.Q(), g.weights.R());
    const MatrixXd Pstar = oracle::q_matrix(g.sys.A(), g.sys.B(), g.weights.lambda(), X);
    worst = std::max(worst, (tr.final_P() - Pstar).norm());
    max_iter = std::max(max_iter, tr.iterations);
  }
  o.require(worst <= 1e-6, "VI accuracy within 500 iterations");
  o.detail << "P1 err " << e1 << ", P2 err " << e2 << ", worst ||P_k - P*||_F " << worst
           << ", max iterations " << max_iter;
}

void policy_iteration_check(Outcome& o) {
  const Plant plant(scalar_system());
  const DpTrace s = policy_iteration(on_policy_collector(plant), CostWeights::identity(1, 1),
                                     Gain{MatrixXd::Zero(1, 1)});
  MatrixXd P1(2, 2);
  P1 << 4.0 / 3, 2.0 / 3, 2.0 / 3, 7.0 / 3;
  const double eP = (s.iterates.at(0) - P1).norm();
  const double eF = std::abs(s.gains.at(0).F(0, 0) + 2.0 / 7.0);
  o.require(eP <= 1e-10 && eF <= 1e-10, "scalar P1, F1");

  double worst = 0.0;
  int rounds = 0;
  bool monotone = true;
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 5;
    const int m = 1 + (t / 5) % 3;
    GenOptions opts;
    opts.stable_open_loop = true;
    const auto g = gen_system(n, m, opts, 8000 + t);
    PiOptions po;
    po.max_iter = 20;
    const DpTrace tr = policy_iteration(on_policy_collector(Plant(g.sys)), g.weights,
                                        Gain{MatrixXd::Zero(m, n)}, po);
    worst = std::max(worst, (tr.final_F().F - oracle_gain(g)).norm());
    rounds = std::max(rounds, tr.iterations);
    double prev = oracle::augmented_cost(g.sys.A(), g.sys.B(), MatrixXd::Zero(m, n),
                                         g.weights.lambda());
    for (const Gain& F : tr.gains) {
      const double J = oracle::augmented_cost(g.sys.A(), g.sys.B(), F.F, g.weights.lambda());
      monotone = monotone && J <= prev + 1e-8 * (1.0 + prev);
      prev = J;
    }
  }
  o.require(worst <= 1e-6, "PI gain accuracy");
  o.require(monotone, "monotone cost");

  DataRecord surrogate;
  surrogate.kind = DataKind::kOnPolicy;
  surrogate.scheme = Scheme::kExploringStarts;
  surrogate.n = 1;
  surrogate.m = 1;
  surrogate.sample_count = 1;
  surrogate.S = MatrixXd::Identity(2, 2);
  surrogate.H = oracle::augmented(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Ones(1, 1),
                                  MatrixXd::Zero(1, 1)).transpose();
  const double stalled = greedy_gain(
      evaluate_policy(surrogate, MatrixXd::Identity(2, 2), Orientation::kPrinted), 1).F(0, 0);
  o.require(std::abs(stalled) <= 1e-12, "printed orientation stall");
  o.detail << "P1 err " << eP << ", F1 err " << eF << ", worst ||F_k - F*|| " << worst
           << " in <= " << rounds << " rounds, monotone " << (monotone ? "yes" : "no")
           << ", printed-orientation F1 = " << stalled;
}

void restart_monte_carlo(Outcome& o) {
  McConfig c;
  c.spec = unit_excitation(1, 1);
  c.N_max = 10000;
  c.checkpoints = {100};
  c.seed = 20240601;
  const McReport r = mc_validity(scalar_system(), c);
  const double analytic = min_eigenvalue(
      oracle::blockdiag(MatrixXd::Constant(1, 1, 2.25), MatrixXd::Constant(1, 1, 2.0)));
  const double lam = r.lambda_min.back();
  const double rel = std::abs(lam - analytic) / analytic;
  const double err100 = std::abs(r.lambda_min.front() - analytic) / analytic;
  o.require(std::abs(r.analytic_lambda_min - analytic) <= 1e-12, "analytic mean");
  o.require(rel <= 0.10, "lambda_min within 10%");
  o.require(rel < err100, "error decreases");
  o.detail << "lambda_min(S_N) " << lam << " vs analytic " << analytic << " (rel " << rel
           << "), rel err at N=100 " << err100;
}

void periodic_monte_carlo(Outcome& o) {
  struct Fixture {
    LtiSystem sys;
    MatrixXd K;
  };
  MatrixXd A(2, 2);
  A << 0.5, 0.2, 0.0, 0.7;
  MatrixXd B(2, 1);
  B << 0.0, 1.0;
  const Fixture fixtures[] = {{scalar_system(), MatrixXd::Zero(1, 1)},
                              {LtiSystem(A, B), MatrixXd::Zero(1, 2)}};
  for (const Fixture& f : fixtures) {
    const int n = f.sys.n();
    const int m = f.sys.m();
    McConfig c;
    c.scheme = Scheme::kPeriodicExcitation;
    c.spec = unit_excitation(n, m);
    c.spec.K = f.K;
    c.spec.epsilon = 1e-6;
    c.N_max = 10000;
    c.seed = 77;
    const McReport r = mc_validity(f.sys, c);
    // Bound from the controllability blocks of A + B K.
    const MatrixXd AK = f.sys.A() + f.sys.B() * f.K;
    MatrixXd X = MatrixXd::Zero(n, n);
    MatrixXd Ok = MatrixXd::Zero(n, 0);
    for (int k = 1; k <= n; ++k) {
      MatrixXd next(n, m * k);
      next << f.sys.B(), AK * Ok;
      Ok = next;
      X += Ok * Ok.transpose();
    }
    const double bound =
        (1.0 - 1e-6) * min_eigenvalue(oracle::blockdiag(X, MatrixXd::Identity(m, m)));
    const double lam = r.lambda_min.back();
    o.require(std::abs(r.analytic_lambda_min - bound) <= 1e-12 * (1.0 + bound), "bound formula");
    o.require(lam > 0.0 && lam >= 0.9 * bound, "lambda_min above bound");
    o.detail << "n=" << n << ": lambda_min " << lam << " vs bound " << bound << "; ";
  }
}

void sdp_engine(Outcome& o) {
  oracle::Draw draw(11001);
  int duality = 0;
  int invariance = 0;
  int roundtrip = 0;
  for (int t = 0; t < 200; ++t) {
    const auto sdp = testing::random_sdp(draw);
    const LmiSolution sol = solve(sdp.problem);
    const double tol = 1e-6 * (1.0 + std::abs(sol.objective_value));
    bool ok = sol.status == LmiStatus::kOptimal && sol.dual_objective <= sol.objective_value + tol &&
              sol.objective_value <= sdp.upper + tol && sol.objective_value >= sdp.lower - tol &&
              sol.min_block_eigenvalue >= -1e-7;
    duality += ok ? 1 : 0;

    LmiProblem scaled = sdp.problem;
    const double alpha = std::pow(10.0, draw.uniform(-3, 3));
    scaled.objective *= alpha;
    for (auto& b : scaled.blocks) {
      const double beta = std::pow(10.0, draw.uniform(-3, 3));
      b.constant *= beta;
      for (auto& Fi : b.coefficients) Fi *= beta;
    }
    const LmiSolution ss = solve(scaled);
    invariance += ss.status == LmiStatus::kOptimal &&
                          std::abs(ss.objective_value / alpha - sol.objective_value) <= tol
                      ? 1
                      : 0;

    VariableLayout layout;
    const int p = draw.integer(1, 6);
    const auto P = layout.add_symmetric(p);
    const auto G = layout.add_matrix(draw.integer(1, 4), draw.integer(1, 4));
    const MatrixXd Pm = testing::random_symmetric(draw, p);
    const MatrixXd Gm = draw.matrix(G.rows, G.cols);
    VectorXd y = VectorXd::Zero(layout.dim());
    P.embed(Pm, y);
    G.embed(Gm, y);
    roundtrip += P.extract(y) == Pm && G.extract(y) == Gm ? 1 : 0;
  }
  o.require(duality == 200, "weak duality");
  o.require(invariance == 200, "scale invariance");
  o.require(roundtrip == 200, "embedding round trip");
  o.detail << "weak duality " << duality << "/200, scale invariance " << invariance
           << "/200, embedding round trip " << roundtrip << "/200";
}

}  // namespace
}  // namespace ddctl

int main() {
  using namespace ddctl;
  const std::vector<Criterion> criteria = {
      {1, "oracle correctness", 5, oracle_correctness},
      {2, "data identities", 10, data_identities},
      {3, "stability classification", 60, stability_classification},
      {4, "stabilizing design", 60, stabilization},
      {5, "cost evaluation", 30, cost_evaluation},
      {6, "LQR design", 60, lqr_design},
      {7, "value iteration", 1e30, value_iteration_check},
      {8, "policy iteration", 1e30, policy_iteration_check},
      {9, "restart Monte Carlo", 30, restart_monte_carlo},
      {10, "periodic Monte Carlo", 60, periodic_monte_carlo},
      {11, "SDP engine properties", 60, sdp_engine},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.time_limit) o.require(false, "runtime limit");
    failed += o.pass ? 0 : 1;
    std::printf("[%s] criterion %2d %-26s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
