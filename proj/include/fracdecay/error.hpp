#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracdecay {

enum class ErrorKind {
  inadmissible_params,
  domain_error,
  non_convergence,
  grid_mismatch,
  root_solve_failure,
  quadrature_under_resolved,
  nonpositive_primitive,
  non_finite_state,
  step_divergence,
  positivity_loss,
  unsupported_regime,
  degenerate_trace,
  ambiguous_fit,
  config_error,
  io_error,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type carrying a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace fracdecay
