#include "fracdecay/fracode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracdecay/error.hpp"

namespace fracdecay::fracode {

namespace {

std::size_t row_offset(int n) { return static_cast<std::size_t>(n) * (n - 1) / 2; }

void check_samples(const CaputoL1Operator& op, std::span<const double> samples) {
  if (static_cast<int>(samples.size()) != op.steps() + 1)
    fail(ErrorKind::grid_mismatch, "expected one sample per grid node");
}

}  // namespace

CaputoL1Operator::CaputoL1Operator(TimeGrid grid, double alpha) : grid_(std::move(grid)), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::inadmissible_params, "alpha must lie in (0,1]");
  const int n_steps = grid_.steps();
  weights_.assign(row_offset(n_steps + 1), 0.0);
  const auto t = grid_.nodes();
  const double g = std::tgamma(2.0 - alpha);
  const double e = 1.0 - alpha;
  for (int n = 1; n <= n_steps; ++n) {
    double* w = weights_.data() + row_offset(n);
    const double tau_n = t[n] - t[n - 1];
    if (alpha == 1.0) {
      w[n - 1] = 1.0 / tau_n;
      continue;
    }
    w[n - 1] = std::pow(tau_n, -alpha) / g;
    for (int k = 1; k < n; ++k) {
      const double tau = t[k] - t[k - 1];
      const double far = t[n] - t[k - 1];
      const double rho = tau / far;
      w[k - 1] = -std::pow(far, e) * std::expm1(e * std::log1p(-rho)) / (tau * g);
    }
  }
}

std::span<const double> CaputoL1Operator::row(int n) const {
  if (n < 1 || n > steps()) fail(ErrorKind::grid_mismatch, "row index outside the grid");
  return {weights_.data() + row_offset(n), static_cast<std::size_t>(n)};
}

std::vector<double> CaputoL1Operator::apply(std::span<const double> samples) const {
  check_samples(*this, samples);
  std::vector<double> out(steps());
  for (int n = 1; n <= steps(); ++n) {
    const auto w = row(n);
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += w[k - 1] * (samples[k] - samples[k - 1]);
    out[n - 1] = s;
  }
  return out;
}

double CaputoL1Operator::history(int n, std::span<const double> samples) const {
  const auto w = row(n);
  double s = 0.0;
  for (int k = 1; k < n; ++k) s += w[k - 1] * (samples[k] - samples[k - 1]);
  return s;
}

std::vector<double> caputo_l1_apply(const CaputoL1Operator& op, std::span<const double> samples) {
  return op.apply(samples);
}

ScalarTrace solve_linear_mode(double alpha, double beta, double lambda, double u0, const TimeGrid& grid) {
  if (!(beta > -alpha)) fail(ErrorKind::inadmissible_params, "hypothesis (H) requires beta > -alpha");
  const CaputoL1Operator op(grid, alpha);
  return solve_linear_mode(op, [beta](double t) { return std::pow(t, beta); }, lambda, u0);
}

ScalarTrace solve_linear_mode(const CaputoL1Operator& op, const std::function<double(double)>& coefficient,
                              double lambda, double u0) {
  if (!(lambda >= 0.0)) fail(ErrorKind::inadmissible_params, "lambda must be nonnegative");
  const auto t = op.grid().nodes();
  ScalarTrace out{{t.begin(), t.end()}, std::vector<double>(t.size(), 0.0)};
  auto& u = out.values;
  u[0] = u0;
  for (int n = 1; n <= op.steps(); ++n) {
    const double wnn = op.weight(n, n);
    const double hist = op.history(n, u);
    const double a = lambda * coefficient(t[n]);
    u[n] = (wnn * u[n - 1] - hist) / (wnn + a);
  }
  return out;
}

void SemilinearParams::validate(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::inadmissible_params, "alpha must lie in (0,1]");
  if (!(nu > 0.0)) fail(ErrorKind::inadmissible_params, "nu must be positive");
  if (!(delta > 0.0)) fail(ErrorKind::inadmissible_params, "delta must be positive");
  if (!(beta > -alpha)) fail(ErrorKind::inadmissible_params, "hypothesis (H) requires beta > -alpha");
  if (!(h0 > 0.0)) fail(ErrorKind::inadmissible_params, "H0 must be positive");
}

ScalarTrace solve_semilinear(const SemilinearParams& params, double alpha, const TimeGrid& grid) {
  params.validate(alpha);
  return solve_semilinear(params, CaputoL1Operator(grid, alpha));
}

ScalarTrace solve_semilinear(const SemilinearParams& params, const CaputoL1Operator& op) {
  params.validate(op.alpha());
  const auto t = op.grid().nodes();
  ScalarTrace out{{t.begin(), t.end()}, std::vector<double>(t.size(), 0.0)};
  auto& h = out.values;
  h[0] = params.h0;
  for (int n = 1; n <= op.steps(); ++n) {
    const double wnn = op.weight(n, n);
    const double rhs = h[n - 1] - op.history(n, h) / wnn;
    const double c = params.nu * std::pow(t[n], params.beta) / wnn;
    if (!(rhs > 0.0) || !std::isfinite(rhs) || !std::isfinite(c))
      fail(ErrorKind::root_solve_failure, "no positive root bracket at step " + std::to_string(n));
    // w + c w^delta = rhs is strictly increasing in w, so the root lies in [0, rhs].
    double lo = 0.0;
    double hi = rhs;
    const double tol = 1e-14 * std::max(1.0, rhs);
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid + c * std::pow(mid, params.delta) > rhs)
        hi = mid;
      else
        lo = mid;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    if (hi - lo > tol) fail(ErrorKind::root_solve_failure, "bisection did not converge at step " + std::to_string(n));
    h[n] = 0.5 * (lo + hi);
  }
  return out;
}

double SemilinearEnvelope::sub(double t) const {
  const double s = alpha + params.beta;
  if (t <= t1) return params.h0 - params.nu * std::tgamma(1.0 - alpha) * std::pow(params.h0, params.delta) * std::pow(t, s);
  return 0.5 * params.h0 * std::pow(t1 / t, s / params.delta);
}

double SemilinearEnvelope::super(double t) const {
  if (t <= t2) return params.h0;
  return params.h0 * std::pow(t2 / t, exponent());
}

SemilinearEnvelope semilinear_envelope(const SemilinearParams& params, double alpha) {
  params.validate(alpha);
  if (!(alpha < 1.0)) fail(ErrorKind::inadmissible_params, "the explicit envelopes need alpha < 1");
  SemilinearEnvelope env;
  env.params = params;
  env.alpha = alpha;
  const double s = alpha + params.beta;
  const double lift = std::pow(params.h0, 1.0 - params.delta);
  env.t1 = std::pow(lift / (2.0 * params.nu * std::tgamma(1.0 - alpha)), 1.0 / s);
  const double k = s / params.delta;
  const double bracket = std::pow(2.0, alpha) / std::tgamma(1.0 - alpha) +
                         k * std::pow(2.0, alpha + k) / std::tgamma(2.0 - alpha);
  env.t2 = std::pow(lift / params.nu * bracket, 1.0 / s);
  return env;
}

EnvelopeFit fit_envelope(const ScalarTrace& trace, const SemilinearEnvelope& envelope) {
  EnvelopeFit fit;
  fit.c_sub = std::numeric_limits<double>::infinity();
  fit.decay.exponent = envelope.exponent();
  fit.decay.c1 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    const double t = trace.times[j];
    const double h = trace.values[j];
    fit.c_sub = std::min(fit.c_sub, h / envelope.sub(t));
    fit.c_super = std::max(fit.c_super, h / envelope.super(t));
    const double profile = h * (1.0 + std::pow(t, fit.decay.exponent));
    fit.decay.c1 = std::min(fit.decay.c1, profile);
    fit.decay.c2 = std::max(fit.decay.c2, profile);
  }
  fit.holds = fit.c_sub > 0.0 && std::isfinite(fit.c_super) && fit.c_sub <= fit.c_super &&
              fit.decay.c1 > 0.0 && std::isfinite(fit.decay.c2);
  return fit;
}

}  // namespace fracdecay::fracode
