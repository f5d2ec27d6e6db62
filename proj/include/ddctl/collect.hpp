#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "ddctl/lti.hpp"

namespace ddctl {

/// Simulation access handed to data-driven code: it can be stepped, but the
/// system matrices are not reachable through it.
class Plant {
 public:
  explicit Plant(LtiSystem sys) : sys_(std::move(sys)) {}

  int n() const { return sys_.n(); }
  int m() const { return sys_.m(); }
  VectorXd step(const VectorXd& x, const VectorXd& u) const {
    return sys_.A() * x + sys_.B() * u;
  }

 private:
  LtiSystem sys_;
};

enum class DataKind { kOnPolicy, kOffPolicy };
enum class Scheme { kExploringStarts, kExploration, kRestarting, kPeriodicExcitation };

/// Parameters a record was collected with; unset fields do not apply.
struct CollectionParams {
  std::optional<MatrixXd> F;
  std::optional<VectorXd> z;
  std::optional<MatrixXd> U;
  std::optional<double> epsilon;
  std::optional<MatrixXd> K;
  std::optional<long> N;
  /// Periodic scheme: total steps spent in settle phases.
  std::optional<long> settle_steps;
};

/// Second-moment data (S, H). On-policy H is (n+m)x(n+m); off-policy H is
/// (n+m)xn.
struct DataRecord {
  DataKind kind = DataKind::kOffPolicy;
  Scheme scheme = Scheme::kExploration;
  int n = 0;
  int m = 0;
  MatrixXd S;
  MatrixXd H;
  long sample_count = 0;
  std::uint64_t seed = 0;
  CollectionParams params;
};

struct ExcitationSpec {
  MatrixXd U;
  VectorXd z;
  double epsilon = 1e-3;
  std::optional<MatrixXd> K;
};

/// Called after each outer averaging update with the number of
/// trajectories (or windows) folded in so far and the current S.
using ProgressFn = std::function<void(long count, const MatrixXd& S)>;

/// States with norm above this abort collection with kDiverged.
inline constexpr double kDivergenceGuard = 1e150;

std::string_view kind_name(DataKind kind);
std::string_view scheme_name(Scheme scheme);
DataKind parse_kind(std::string_view name);
Scheme parse_scheme(std::string_view name);

/// Throws kInvalidData when shapes or symmetry of S/H are inconsistent.
void validate_record(const DataRecord& rec);

/// On-policy exploring starts over the n+m augmented basis vectors: v(0)=e_i,
/// then u(k) = F x(k) for k >= 1, N samples per start.
DataRecord on_collect(const Plant& plant, const Gain& F, int N, std::uint64_t seed = 0);

/// Single trajectory from z with u(k) ~ N(0, U); stops at the first k with
/// lambda_min(S_{k+1}) > epsilon.
DataRecord off_collect(const Plant& plant, const ExcitationSpec& spec, long max_steps,
                       std::uint64_t seed);

/// N restarts from z with pure-noise inputs, n+1 pairs (k = 0..n) each.
/// threads: 0 selects the default (DDCTL_THREADS or machine parallelism),
/// 1 runs the serial reference.
DataRecord off_collect_restart(const Plant& plant, const ExcitationSpec& spec, long N,
                               std::uint64_t seed, int threads = 0,
                               const ProgressFn& progress = {});

/// N excitation windows of n+1 pairs with u = K x + zeta, each preceded by a
/// settle phase u = K x until ||x|| <= epsilon (at most settle_max steps).
DataRecord off_collect_periodic(const Plant& plant, const ExcitationSpec& spec, long N,
                                long settle_max, std::uint64_t seed,
                                const ProgressFn& progress = {});

/// lambda_min(S) > threshold.
bool is_valid(const DataRecord& rec, double threshold);

}  // namespace ddctl
