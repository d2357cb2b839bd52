#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracdecay/coefficient.hpp"
#include "fracdecay/decayfit.hpp"
#include "fracdecay/time_grid.hpp"
#include "fracdecay/trace.hpp"

namespace fracdecay::nonlinear {

/// Interior nodes x_i = i h, i = 1..M, of (0, L) with zero Dirichlet values at both ends.
struct SpatialGrid1D {
  double length = 3.141592653589793;
  int interior = 255;

  void validate() const;
  double spacing() const { return length / (interior + 1); }
  double x(int i) const { return (i + 1) * spacing(); }
};

namespace op {
struct Laplace {};
struct PLaplace {
  double p = 2.0;
};
/// div(g(u) Du) with g(u) >= c0 |u|^m; default g = c0 |u|^m.
struct PorousMedium {
  double m = 1.0;
  double c0 = 1.0;
  std::function<double(double)> g;
};
/// f(u) Laplace(u) with f(u) u >= c1 u^{q+1}; default f = c1 |u|^q.
struct Degenerate {
  double q = 1.0;
  double c1 = 1.0;
  std::function<double(double)> f;
};
struct MeanCurvature {};
/// M(||Du||_{L^q}) div(|Du|^{p-2} Du) with M(s) >= b s^gamma; default M = b s^gamma.
struct Kirchhoff {
  double gamma = 1.0;
  double b = 1.0;
  double p = 2.0;
  double q = 2.0;
  std::function<double(double)> m_func;
};
}  // namespace op

using OperatorSpec = std::variant<op::Laplace, op::PLaplace, op::PorousMedium, op::Degenerate, op::MeanCurvature,
                                  op::Kirchhoff>;

std::string operator_name(const OperatorSpec& spec);
void validate_operator(const OperatorSpec& spec);

struct SourceSpec {
  enum class Kind { none, fisher_kpp, power_absorption } kind = Kind::none;
  double mu = 0.0;
  double p = 2.0;

  static SourceSpec none() { return {}; }
  static SourceSpec fisher_kpp() { return {Kind::fisher_kpp, 0.0, 2.0}; }
  static SourceSpec power_absorption(double mu, double p) { return {Kind::power_absorption, mu, p}; }
};

/// A(u) at interior nodes.
std::vector<double> discretize_operator(const OperatorSpec& spec, const SpatialGrid1D& grid, std::span<const double> u);

struct SolverOptions {
  int max_sweeps = 10;
  double sweep_tolerance = 1e-10;
  bool store_fields = true;
  bool require_nonnegative = false;
};

/// d^alpha u - a(t) A(u) + source(u) = 0 with semi-implicit L1 stepping.
SolutionTrace solve_nonlinear(const OperatorSpec& spec, const SourceSpec& source, double alpha,
                              const Coefficient& coeff, std::span<const double> u0, const SpatialGrid1D& space,
                              const TimeGrid& time, const SolverOptions& options = {});

struct EnergyDiagnostic {
  std::vector<double> times;  ///< t_1..t_N
  std::vector<double> lhs;    ///< ||u|| d^alpha ||u||
  std::vector<double> rhs;    ///< (u, d^alpha u)
  double min_margin = 0.0;    ///< min over nodes of rhs - lhs
};

EnergyDiagnostic check_energy_inequality(const SolutionTrace& trace, double alpha);

struct PredictedExponent {
  double value = 0.0;
  std::string tag;
};

PredictedExponent predict_exponent(const OperatorSpec& spec, double alpha, double beta, int dimension = 1);

struct ScenarioParams {
  double alpha = 0.5;
  double beta = 0.5;
  double length = 3.141592653589793;
  int points = 255;
  int steps = 2048;
  double horizon = 100.0;
  double grading = 0.0;  ///< 0 selects the default for alpha
  double amplitude = 0.5;
  double mu = 1.0;
  double m = 1.0;
  double p = 2.0;
};

struct ScenarioResult {
  SolutionTrace trace;
  decayfit::DecayReport report;
  bool order_preserved = true;  ///< 0 < u <= 1 for Fisher-KPP, u >= -1e-10 for porous runs
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Presets: "fisher_kpp", "semilinear_pme", "toy_model".
ScenarioResult run_scenario(const std::string& name, const ScenarioParams& params);

/// Envelope report for a finite-difference trace against the predicted exponent.
decayfit::DecayReport nonlinear_report(const SolutionTrace& trace, const PredictedExponent& predicted,
                                       double scale = 1.0);

}  // namespace fracdecay::nonlinear
