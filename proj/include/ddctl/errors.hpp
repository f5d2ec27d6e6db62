#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ddctl {

/// Domain signals raised by the library. The CLI maps every signal except
/// `kConfig` to exit code 1; `kConfig` maps to exit code 2.
enum class Signal {
  kDimensionMismatch,
  kInvalidArgument,
  kNumericalFailure,
  kDiverged,
  kNonConvergence,
  kInfiniteCost,
  kUnstable,
  kPersistentExcitationFailure,
  kSettleTimeout,
  kInvalidData,
  kInfeasible,
  kConditioning,
  kSingularBlock,
  kUnstablePolicy,
  kGenerationFailure,
  kConfig,
};

/// Stable lower-case name used in JSON outputs ("infeasible", ...).
std::string_view signal_name(Signal s);

class Failure : public std::runtime_error {
 public:
  Failure(Signal signal, const std::string& what,
          std::optional<double> value = std::nullopt,
          std::optional<long> step = std::nullopt)
      : std::runtime_error(what), signal_(signal), value_(value), step_(step) {}

  Signal signal() const { return signal_; }
  /// Last residual, condition number, ... depending on the signal.
  std::optional<double> value() const { return value_; }
  /// Last finite step index for kDiverged; step count for timeouts.
  std::optional<long> step() const { return step_; }

 private:
  Signal signal_;
  std::optional<double> value_;
  std::optional<long> step_;
};

}  // namespace ddctl
