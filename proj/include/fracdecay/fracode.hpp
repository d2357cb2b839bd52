#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fracdecay/time_grid.hpp"

namespace fracdecay::fracode {

/// L1 quadrature of the Caputo derivative on a fixed grid; alpha = 1 gives the
/// backward difference. Weight rows are immutable after construction.
class CaputoL1Operator {
 public:
  CaputoL1Operator(TimeGrid grid, double alpha);

  const TimeGrid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  int steps() const { return grid_.steps(); }

  /// w_{n,1..n}: coefficient of (u_k - u_{k-1}) in the derivative at t_n.
  std::span<const double> row(int n) const;
  double weight(int n, int k) const { return row(n)[k - 1]; }

  /// Discrete derivative at t_1..t_N.
  std::vector<double> apply(std::span<const double> samples) const;
  /// sum_{k<n} w_{n,k} (u_k - u_{k-1}).
  double history(int n, std::span<const double> samples) const;

 private:
  TimeGrid grid_;
  double alpha_;
  std::vector<double> weights_;
};

std::vector<double> caputo_l1_apply(const CaputoL1Operator& op, std::span<const double> samples);

struct ScalarTrace {
  std::vector<double> times;
  std::vector<double> values;
};

/// d^alpha u + lambda t^beta u = 0, u(0) = u0.
ScalarTrace solve_linear_mode(double alpha, double beta, double lambda, double u0, const TimeGrid& grid);
/// d^alpha u + lambda a(t) u = 0 with a user coefficient sampled at right nodes.
ScalarTrace solve_linear_mode(const CaputoL1Operator& op, const std::function<double(double)>& coefficient,
                              double lambda, double u0);

struct SemilinearParams {
  double nu = 1.0;
  double delta = 1.0;
  double beta = 0.0;
  double h0 = 1.0;

  void validate(double alpha) const;
};

/// d^alpha H + nu t^beta H^delta = 0, H(0) = h0.
ScalarTrace solve_semilinear(const SemilinearParams& params, double alpha, const TimeGrid& grid);
ScalarTrace solve_semilinear(const SemilinearParams& params, const CaputoL1Operator& op);

/// Explicit sub- and super-solutions of the semilinear equation.
struct SemilinearEnvelope {
  SemilinearParams params;
  double alpha = 0.5;
  double t1 = 0.0;
  double t2 = 0.0;

  double sub(double t) const;
  double super(double t) const;
  double exponent() const { return (alpha + params.beta) / params.delta; }
};

SemilinearEnvelope semilinear_envelope(const SemilinearParams& params, double alpha);

struct SandwichEnvelope {
  double c1 = 0.0;
  double c2 = 0.0;
  double exponent = 0.0;
};

struct EnvelopeFit {
  double c_sub = 0.0;    ///< largest c with c*sub <= H beyond t_0
  double c_super = 0.0;  ///< smallest C with H <= C*super
  SandwichEnvelope decay;  ///< tightest c1/(1+t^s) <= H <= c2/(1+t^s)
  bool holds = false;
};

EnvelopeFit fit_envelope(const ScalarTrace& trace, const SemilinearEnvelope& envelope);

}  // namespace fracdecay::fracode
