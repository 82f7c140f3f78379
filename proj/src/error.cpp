#include "gibbslab/error.hpp"

namespace gibbslab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::non_integrable: return "non_integrable";
    case ErrorCode::out_of_support: return "out_of_support";
    case ErrorCode::zero_density: return "zero_density";
    case ErrorCode::support_mismatch: return "support_mismatch";
    case ErrorCode::zero_marginal: return "zero_marginal";
    case ErrorCode::zero_event: return "zero_event";
    case ErrorCode::empty_shell: return "empty_shell";
    case ErrorCode::boundary_evaluation: return "boundary_evaluation";
    case ErrorCode::zero_mass: return "zero_mass";
    case ErrorCode::no_solution: return "no_solution";
    case ErrorCode::degenerate_fit: return "degenerate_fit";
    case ErrorCode::no_stationary_point: return "no_stationary_point";
    case ErrorCode::undefined_at_zero: return "undefined_at_zero";
    case ErrorCode::invalid_shell: return "invalid_shell";
    case ErrorCode::rejection_stall: return "rejection_stall";
    case ErrorCode::empty_sample_set: return "empty_sample_set";
    case ErrorCode::mc_budget_exceeded: return "mc_budget_exceeded";
    case ErrorCode::extinction_before_stationarity: return "extinction_before_stationarity";
    case ErrorCode::insufficient_accepted_snapshots: return "insufficient_accepted_snapshots";
    case ErrorCode::binning_mismatch: return "binning_mismatch";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gibbslab
