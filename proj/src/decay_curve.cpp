#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>

#include "fracdecay/error.hpp"
#include "fracdecay/specfun.hpp"
#include "series.hpp"

namespace fracdecay::specfun {

namespace {

constexpr double kCurveStart = 1e-6;

/// int_0^h (D-u)^{alpha-1} (u - h/2) du for rho = h/D < 1/4, by binomial expansion.
double centered_moment_series(double alpha, double D, double rho) {
  double b = 1.0;
  double sum = 0.0;
  double rho_pow = rho * rho;
  for (int k = 1; k < 200; ++k) {
    b *= (k - alpha) / k;
    rho_pow *= rho;
    const double term = b * rho_pow * k / (2.0 * (k + 1) * (k + 2));
    sum += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
  }
  return std::pow(D, alpha + 1.0) * sum;
}

double step_for(const SeriesAccuracy& acc) {
  return std::clamp(0.01 * std::cbrt(acc.rel_tol / 1e-10), 0.003, 0.25);
}

}  // namespace

DecayCurve::DecayCurve(double alpha, double m, double x_max, const SeriesAccuracy& acc)
    : alpha_(alpha), m_(m), x_min_(kCurveStart), x_max_(x_max), acc_(acc) {
  acc.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain_error, "decay curve needs 0 < alpha < 1");
  if (!(m > 0.0)) fail(ErrorKind::domain_error, "decay curve needs m > 0");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) fail(ErrorKind::domain_error, "decay curve needs finite x_max > 0");
  x_max_ = std::max(x_max, 2.0 * x_min_);

  const KilbasSaigoParams params{alpha, m, m - 1.0};
  auto start = detail::plain_series(params, -x_min_, acc);
  if (!start) fail(ErrorKind::non_convergence, "series failed at the curve start point");
  y_min_ = start->value;

  const double span = std::log(x_max_ / x_min_);
  const int n = std::clamp(static_cast<int>(std::ceil(span / step_for(acc))), 16, 20000);
  step_ = span / n;

  const std::vector<double> coarse = solve(n);
  const std::vector<double> fine = solve(2 * n);
  log_values_.resize(n + 1);
  error_ = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
    if (!(r > 0.0) || !std::isfinite(r))
      fail(ErrorKind::non_convergence, "integral-equation solution lost positivity");
    log_values_[i] = std::log(r);
    error_ = std::max(error_, std::fabs(fine[2 * i] - r) / r);
  }
}

std::vector<double> DecayCurve::solve(int n) const {
  const double a = alpha_ * m_;
  const double beta = alpha_ * (m_ - 1.0);
  const double lq = std::log(x_max_ / x_min_) / (a * n);
  const double t1 = std::pow(x_min_, 1.0 / a);
  const double inv_gamma = 1.0 / std::tgamma(alpha_);
  const double qm1 = std::expm1(lq);

  // Product-integration weights of a hat basis, for t_n = 1 and offset d = n - j.
  std::vector<double> wl(n + 2, 0.0), wr(n + 2, 0.0);
  for (int d = 1; d <= n; ++d) {
    const double h = std::exp(-d * lq) * qm1;
    double a0, a1;
    if (d == 1) {
      a0 = std::pow(h, alpha_) / alpha_;
      a1 = std::pow(h, alpha_ + 1.0) / (alpha_ * (alpha_ + 1.0));
    } else {
      const double D = -std::expm1(-d * lq);
      const double rest = -std::expm1(-(d - 1) * lq);
      const double rho = h / D;
      a0 = std::pow(D, alpha_) * (-std::expm1(alpha_ * std::log1p(-rho))) / alpha_;
      if (rho < 0.25) {
        a1 = 0.5 * h * a0 + centered_moment_series(alpha_, D, rho);
      } else {
        a1 = -h * std::pow(rest, alpha_) / alpha_ +
             (std::pow(D, alpha_ + 1.0) - std::pow(rest, alpha_ + 1.0)) / (alpha_ * (alpha_ + 1.0));
      }
    }
    wr[d] = a1 / h;
    wl[d] = a0 - wr[d];
  }
  std::vector<double> w(n + 1, 0.0);
  for (int d = 1; d < n; ++d) w[d] = wl[d] + wr[d + 1];

  // Near t = 0 the solution is replaced by its two-term Taylor polynomial in s^a.
  const double c0 = boost::math::tgamma_ratio(alpha_ * (m_ - 1.0) + 1.0, alpha_ * m_ + 1.0);
  const double c1 = c0 * boost::math::tgamma_ratio(alpha_ * (2.0 * m_ - 1.0) + 1.0, alpha_ * 2.0 * m_ + 1.0);

  std::vector<double> y(n + 1), g(n + 1);
  y[0] = y_min_;
  g[0] = std::pow(t1, beta) * y[0];
  for (int k = 1; k <= n; ++k) {
    const double tn = t1 * std::exp(k * lq);
    const double ratio = t1 / tn;
    const double f1 = std::pow(tn, alpha_ + beta) *
                      (boost::math::beta(beta + 1.0, alpha_, ratio) -
                       c0 * std::pow(tn, a) * boost::math::beta(beta + a + 1.0, alpha_, ratio) +
                       c1 * std::pow(tn, 2.0 * a) * boost::math::beta(beta + 2.0 * a + 1.0, alpha_, ratio));
    double s = wl[k] * g[0];
    const double* wp = w.data() + k;
    for (int i = 1; i < k; ++i) s += wp[-i] * g[i];
    const double tna = std::pow(tn, alpha_);
    const double tnb = std::pow(tn, beta);
    y[k] = (1.0 - (f1 + tna * s) * inv_gamma) / (1.0 + tna * tnb * wr[1] * inv_gamma);
    g[k] = tnb * y[k];
  }
  return y;
}

double DecayCurve::operator()(double x) const {
  if (!(x >= 0.0)) fail(ErrorKind::domain_error, "decay curve argument must be nonnegative");
  if (x <= x_min_) {
    auto e = detail::plain_series(KilbasSaigoParams{alpha_, m_, m_ - 1.0}, -x, acc_);
    if (e) return e->value;
    return y_min_;
  }
  if (x > x_max_ * (1.0 + 1e-12)) fail(ErrorKind::domain_error, "decay curve argument beyond tabulated range");
  const int n = static_cast<int>(log_values_.size()) - 1;
  const double u = std::min(std::log(x / x_min_) / step_, static_cast<double>(n));
  int i0 = static_cast<int>(std::floor(u)) - 1;
  i0 = std::clamp(i0, 0, n - 3);
  double result = 0.0;
  for (int i = i0; i < i0 + 4; ++i) {
    double basis = 1.0;
    for (int j = i0; j < i0 + 4; ++j)
      if (j != i) basis *= (u - j) / static_cast<double>(i - j);
    result += basis * log_values_[i];
  }
  return std::exp(result);
}

DecayEvaluator::DecayEvaluator(double alpha, double m, double x_max, const SeriesAccuracy& acc)
    : alpha_(alpha), m_(m), x_max_(x_max), acc_(acc) {
  acc.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain_error, "decay evaluator needs 0 < alpha <= 1");
  if (!(m > 0.0)) fail(ErrorKind::domain_error, "decay evaluator needs m > 0");
  if (!(x_max >= 0.0) || !std::isfinite(x_max)) fail(ErrorKind::domain_error, "decay evaluator needs finite x_max");
  if (alpha == 1.0) return;
  const KilbasSaigoParams params{alpha, m, m - 1.0};
  params.validate(acc.max_terms);
  double x = std::min(x_max, 1.0);
  while (x > 1e-7 && !detail::plain_series(params, -x, acc)) x *= 0.5;
  series_limit_ = x;
  if (x_max > series_limit_) curve_.emplace(alpha, m, x_max, acc);
}

double DecayEvaluator::operator()(double x) const {
  if (!(x >= 0.0)) fail(ErrorKind::domain_error, "decay evaluator argument must be nonnegative");
  if (alpha_ == 1.0) return std::exp(-x / m_);
  if (x <= series_limit_) {
    if (auto e = detail::plain_series(KilbasSaigoParams{alpha_, m_, m_ - 1.0}, -x, acc_)) return e->value;
  }
  if (!curve_) fail(ErrorKind::domain_error, "decay evaluator argument beyond its range");
  return (*curve_)(x);
}

EvalMethod DecayEvaluator::method_at(double x) const {
  if (alpha_ == 1.0) return EvalMethod::closed_form;
  return x <= series_limit_ ? EvalMethod::series : EvalMethod::integral_equation;
}

double DecayEvaluator::error_estimate() const {
  if (alpha_ == 1.0) return 1e-15;
  return curve_ ? std::max(curve_->error_estimate(), acc_.rel_tol) : acc_.rel_tol;
}

}  // namespace fracdecay::specfun
