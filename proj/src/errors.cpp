#include "ddctl/errors.hpp"

namespace ddctl {

std::string_view signal_name(Signal s) {
  switch (s) {
    case Signal::kDimensionMismatch: return "dimension-mismatch";
    case Signal::kInvalidArgument: return "invalid-argument";
    case Signal::kNumericalFailure: return "numerical-failure";
    case Signal::kDiverged: return "diverged";
    case Signal::kNonConvergence: return "non-convergence";
    case Signal::kInfiniteCost: return "infinite-cost";
    case Signal::kUnstable: return "unstable";
    case Signal::kPersistentExcitationFailure: return "persistent-excitation-failure";
    case Signal::kSettleTimeout: return "settle-timeout";
    case Signal::kInvalidData: return "invalid-data";
    case Signal::kInfeasible: return "infeasible";
    case Signal::kConditioning: return "conditioning";
    case Signal::kSingularBlock: return "singular-block";
    case Signal::kUnstablePolicy: return "unstable-policy";
    case Signal::kGenerationFailure: return "generation-failure";
    case Signal::kConfig: return "config-error";
  }
  return "unknown";
}

}  // namespace ddctl
