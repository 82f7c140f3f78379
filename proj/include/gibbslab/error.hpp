#ifndef GIBBSLAB_ERROR_HPP
#define GIBBSLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gibbslab {

// Failure taxonomy shared by the C++ core and the C API. Every throwing
// operation in the library raises Error with one of these codes so the
// shared-library boundary can translate exceptions losslessly.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument,
  non_integrable,
  out_of_support,
  zero_density,
  support_mismatch,
  zero_marginal,
  zero_event,
  empty_shell,
  boundary_evaluation,
  zero_mass,
  no_solution,
  degenerate_fit,
  no_stationary_point,
  undefined_at_zero,
  invalid_shell,
  rejection_stall,
  empty_sample_set,
  mc_budget_exceeded,
  extinction_before_stationarity,
  insufficient_accepted_snapshots,
  binning_mismatch,
  config_error,
  io_failure,
  internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace gibbslab

#endif
