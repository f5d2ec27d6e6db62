#include "ddctl/collect.hpp"

#include <string>

#include "ddctl/errors.hpp"
#include "ddctl/kernels.hpp"

namespace ddctl {

namespace {

// S <- k/(k+1) S + 1/(k+1) a b'
void running_update(MatrixXd& M, long k, const VectorXd& a, const VectorXd& b) {
  const double kk = static_cast<double>(k);
  M = (kk / (kk + 1.0)) * M + (1.0 / (kk + 1.0)) * (a * b.transpose());
}

void running_update(MatrixXd& M, long k, const MatrixXd& sample) {
  const double kk = static_cast<double>(k);
  M = (kk / (kk + 1.0)) * M + (1.0 / (kk + 1.0)) * sample;
}

void guard(const VectorXd& x, long step) {
  if (!(x.norm() <= kDivergenceGuard)) {
    throw Failure(Signal::kDiverged, "state exceeded divergence guard", std::nullopt, step);
  }
}

void check_spec(const Plant& plant, const ExcitationSpec& spec) {
  if (spec.U.rows() != plant.m() || spec.U.cols() != plant.m()) {
    throw Failure(Signal::kDimensionMismatch, "excitation covariance must be m x m");
  }
  if (spec.z.size() != plant.n()) {
    throw Failure(Signal::kDimensionMismatch, "initial state z must have n entries");
  }
  if (!(spec.epsilon > 0.0)) {
    throw Failure(Signal::kInvalidArgument, "epsilon must be positive");
  }
}

DataRecord off_policy_record(const Plant& plant, Scheme scheme, std::uint64_t seed,
                             const ExcitationSpec& spec) {
  DataRecord rec;
  rec.kind = DataKind::kOffPolicy;
  rec.scheme = scheme;
  rec.n = plant.n();
  rec.m = plant.m();
  rec.S = MatrixXd::Zero(rec.n + rec.m, rec.n + rec.m);
  rec.H = MatrixXd::Zero(rec.n + rec.m, rec.n);
  rec.seed = seed;
  rec.params.z = spec.z;
  rec.params.U = spec.U;
  rec.params.epsilon = spec.epsilon;
  rec.params.K = spec.K;
  return rec;
}

}  // namespace

std::string_view kind_name(DataKind kind) {
  return kind == DataKind::kOnPolicy ? "on-policy" : "off-policy";
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kExploringStarts: return "exploring-starts";
    case Scheme::kExploration: return "exploration";
    case Scheme::kRestarting: return "restarting";
    case Scheme::kPeriodicExcitation: return "periodic-excitation";
  }
  return "unknown";
}

DataKind parse_kind(std::string_view name) {
  if (name == "on-policy") return DataKind::kOnPolicy;
  if (name == "off-policy") return DataKind::kOffPolicy;
  throw Failure(Signal::kConfig, "unknown data kind '" + std::string(name) + "'");
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::kExploringStarts, Scheme::kExploration, Scheme::kRestarting,
                   Scheme::kPeriodicExcitation}) {
    if (scheme_name(s) == name) return s;
  }
  throw Failure(Signal::kConfig, "unknown collection scheme '" + std::string(name) + "'");
}

void validate_record(const DataRecord& rec) {
  const int p = rec.n + rec.m;
  if (rec.n < 1 || rec.m < 1) throw Failure(Signal::kInvalidData, "record dimensions must be positive");
  if (rec.S.rows() != p || rec.S.cols() != p) {
    throw Failure(Signal::kInvalidData, "S must be (n+m)x(n+m)");
  }
  const int h_cols = rec.kind == DataKind::kOnPolicy ? p : rec.n;
  if (rec.H.rows() != p || rec.H.cols() != h_cols) {
    throw Failure(Signal::kInvalidData, "H shape does not match the record kind");
  }
  if (!rec.S.allFinite() || !rec.H.allFinite()) {
    throw Failure(Signal::kInvalidData, "record has non-finite entries");
  }
  if (!is_symmetric(rec.S, 1e-10)) throw Failure(Signal::kInvalidData, "S is not symmetric");
  if (rec.sample_count <= 0) throw Failure(Signal::kInvalidData, "record has no samples");
}

DataRecord on_collect(const Plant& plant, const Gain& F, int N, std::uint64_t seed) {
  const int n = plant.n();
  const int m = plant.m();
  const int p = n + m;
  if (N < 1) throw Failure(Signal::kInvalidArgument, "on_collect needs N >= 1");
  if (F.F.rows() != m || F.F.cols() != n) {
    throw Failure(Signal::kDimensionMismatch, "gain must be m x n");
  }

  DataRecord rec;
  rec.kind = DataKind::kOnPolicy;
  rec.scheme = Scheme::kExploringStarts;
  rec.n = n;
  rec.m = m;
  rec.S = MatrixXd::Zero(p, p);
  rec.H = MatrixXd::Zero(p, p);
  rec.seed = seed;
  rec.params.F = F.F;
  rec.params.N = N;

  long count = 0;
  VectorXd v(p);
  VectorXd v_next(p);
  for (int i = 0; i < p; ++i) {
    v = VectorXd::Unit(p, i);
    for (int k = 0; k < N; ++k) {
      const VectorXd x_next = plant.step(v.head(n), v.tail(m));
      guard(x_next, k);
      v_next << x_next, F.F * x_next;
      running_update(rec.S, count, v, v);
      running_update(rec.H, count, v, v_next);
      ++count;
      v = v_next;
    }
  }
  rec.S = symmetrize(rec.S);
  rec.sample_count = count;
  return rec;
}

DataRecord off_collect(const Plant& plant, const ExcitationSpec& spec, long max_steps,
                       std::uint64_t seed) {
  check_spec(plant, spec);
  if (max_steps < 1) throw Failure(Signal::kInvalidArgument, "max_steps must be >= 1");
  const MatrixXd noise = covariance_factor(spec.U);
  RandomStream rng(seed);
  DataRecord rec = off_policy_record(plant, Scheme::kExploration, seed, spec);

  const int n = plant.n();
  VectorXd v(n + plant.m());
  VectorXd x = spec.z;
  for (long k = 0; k < max_steps; ++k) {
    const VectorXd u = rng.gaussian(noise);
    VectorXd next = plant.step(x, u);
    guard(next, k);
    v << x, u;
    running_update(rec.S, k, v, v);
    running_update(rec.H, k, v, next);
    x = std::move(next);
    rec.S = symmetrize(rec.S);
    if (min_eigenvalue(rec.S) > spec.epsilon) {
      rec.sample_count = k + 1;
      rec.params.N = k + 1;
      return rec;
    }
  }
  throw Failure(Signal::kPersistentExcitationFailure,
                "lambda_min(S) did not exceed epsilon within max_steps",
                min_eigenvalue(rec.S), max_steps);
}

DataRecord off_collect_restart(const Plant& plant, const ExcitationSpec& spec, long N,
                               std::uint64_t seed, int threads,
                               const ProgressFn& progress) {
  check_spec(plant, spec);
  if (N < 1) throw Failure(Signal::kInvalidArgument, "restart scheme needs N >= 1");
  const MatrixXd noise = covariance_factor(spec.U);
  const int workers = resolve_threads(threads);
  const std::vector<TrajectorySums> sums =
      workers == 1 ? restart_sums_serial(plant, spec.z, noise, N, seed)
                   : restart_sums_parallel(plant, spec.z, noise, N, seed, workers);

  DataRecord rec = off_policy_record(plant, Scheme::kRestarting, seed, spec);
  for (long i = 0; i < N; ++i) {
    const auto& t = sums[static_cast<std::size_t>(i)];
    running_update(rec.S, i, t.S);
    running_update(rec.H, i, t.H);
    if (progress) progress(i + 1, rec.S);
  }
  rec.S = symmetrize(rec.S);
  rec.sample_count = N * (plant.n() + 1);
  rec.params.N = N;
  return rec;
}

DataRecord off_collect_periodic(const Plant& plant, const ExcitationSpec& spec, long N,
                                long settle_max, std::uint64_t seed,
                                const ProgressFn& progress) {
  check_spec(plant, spec);
  if (!spec.K) throw Failure(Signal::kInvalidArgument, "periodic excitation needs a gain K");
  const MatrixXd& K = *spec.K;
  if (K.rows() != plant.m() || K.cols() != plant.n()) {
    throw Failure(Signal::kDimensionMismatch, "K must be m x n");
  }
  if (N < 1 || settle_max < 1) {
    throw Failure(Signal::kInvalidArgument, "periodic scheme needs N >= 1 and settle_max >= 1");
  }
  const int n = plant.n();
  const int p = n + plant.m();
  const MatrixXd noise = covariance_factor(spec.U);
  RandomStream rng(seed);
  DataRecord rec = off_policy_record(plant, Scheme::kPeriodicExcitation, seed, spec);

  VectorXd x = spec.z;
  VectorXd v(p);
  long t = 0;
  long settle_total = 0;
  for (long i = 0; i < N; ++i) {
    long settle = 0;
    while (x.norm() > spec.epsilon) {
      if (settle == settle_max) {
        throw Failure(Signal::kSettleTimeout, "settle phase exceeded settle_max",
                      x.norm(), settle);
      }
      x = plant.step(x, K * x);
      guard(x, t);
      ++settle;
      ++t;
    }
    settle_total += settle;
    TrajectorySums window{MatrixXd::Zero(p, p), MatrixXd::Zero(p, n)};
    for (int k = 0; k <= n; ++k) {
      const VectorXd u = K * x + rng.gaussian(noise);
      VectorXd next = plant.step(x, u);
      guard(next, t);
      v << x, u;
      window.S.noalias() += v * v.transpose();
      window.H.noalias() += v * next.transpose();
      x = std::move(next);
      ++t;
    }
    running_update(rec.S, i, window.S);
    running_update(rec.H, i, window.H);
    if (progress) progress(i + 1, rec.S);
  }
  rec.S = symmetrize(rec.S);
  rec.sample_count = N * (n + 1);
  rec.params.N = N;
  rec.params.settle_steps = settle_total;
  return rec;
}

bool is_valid(const DataRecord& rec, double threshold) {
  if (threshold < 0.0) throw Failure(Signal::kInvalidArgument, "threshold must be >= 0");
  if (rec.S.size() == 0) return false;
  return min_eigenvalue(symmetrize(rec.S)) > threshold;
}

}  // namespace ddctl
