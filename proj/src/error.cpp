#include "fracdecay/error.hpp"

namespace fracdecay {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::inadmissible_params: return "InadmissibleParams";
    case ErrorKind::domain_error: return "DomainError";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::grid_mismatch: return "GridMismatch";
    case ErrorKind::root_solve_failure: return "RootSolveFailure";
    case ErrorKind::quadrature_under_resolved: return "QuadratureUnderResolved";
    case ErrorKind::nonpositive_primitive: return "NonPositivePrimitive";
    case ErrorKind::non_finite_state: return "NonFiniteState";
    case ErrorKind::step_divergence: return "StepDivergence";
    case ErrorKind::positivity_loss: return "PositivityLoss";
    case ErrorKind::unsupported_regime: return "UnsupportedRegime";
    case ErrorKind::degenerate_trace: return "DegenerateTrace";
    case ErrorKind::ambiguous_fit: return "AmbiguousFit";
    case ErrorKind::config_error: return "ConfigError";
    case ErrorKind::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace fracdecay
