#include "fracdecay/specfun.hpp"

#include <mpfr.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracdecay/error.hpp"
#include "series.hpp"

namespace fracdecay::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxBits = 1 << 14;

bool is_pole(double x) { return x <= 0.0 && x == std::floor(x); }

struct SignedLog {
  double log_abs = 0.0;
  int sign = 1;  // 0 encodes an exact zero
};

/// log|Gamma(x)/Gamma(y)| with sign; Gamma(x) must be finite.
SignedLog gamma_ratio(double x, double y) {
  if (is_pole(y)) return {-std::numeric_limits<double>::infinity(), 0};
  try {
    const double r = boost::math::tgamma_ratio(x, y);
    if (r != 0.0 && std::isfinite(r)) return {std::log(std::fabs(r)), r > 0 ? 1 : -1};
  } catch (const std::exception&) {
  }
  int sx = 1;
  int sy = 1;
  const double lx = ::lgamma_r(x, &sx);
  const double ly = ::lgamma_r(y, &sy);
  return {lx - ly, sx * sy};
}

double rgamma(double x) {
  if (is_pole(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

/// Power series 1 + sum_k prod_{j<k} Gamma(x_j)/Gamma(y_j) z^k.
struct RatioSeries {
  enum class Kind { kilbas_saigo, mittag_leffler } kind;
  double alpha;
  double m;
  double l;     // Kilbas-Saigo third index
  double beta;  // Mittag-Leffler second index

  std::pair<double, double> args(int j) const {
    if (kind == Kind::kilbas_saigo) {
      const double x = alpha * (j * m + l) + 1.0;
      return {x, alpha * (j * m + l + 1.0) + 1.0};
    }
    return {alpha * j + beta, alpha * (j + 1) + beta};
  }
};

struct Scan {
  double sum = 1.0;
  int terms = 0;
  bool converged = false;
  bool terminated = false;
  double max_log_term = 0.0;
};

Scan scan_double(const RatioSeries& s, double z, const SeriesAccuracy& acc) {
  Scan out;
  const double log_z = std::log(std::fabs(z));
  const int z_sign = z < 0 ? -1 : 1;
  double log_t = 0.0;
  int sign = 1;
  int small = 0;
  for (int k = 1; k <= acc.max_terms; ++k) {
    const auto [x, y] = s.args(k - 1);
    const SignedLog r = gamma_ratio(x, y);
    if (r.sign == 0) {
      out.converged = out.terminated = true;
      out.terms = k;
      return out;
    }
    log_t += r.log_abs + log_z;
    sign *= r.sign * z_sign;
    out.max_log_term = std::max(out.max_log_term, log_t);
    if (log_t > 700.0) {
      out.terms = k;
      return out;
    }
    const double term = sign * std::exp(log_t);
    out.sum += term;
    if (std::fabs(term) < acc.abs_tol + acc.rel_tol * std::fabs(out.sum)) {
      if (++small == 3) {
        out.converged = true;
        out.terms = k;
        return out;
      }
    } else {
      small = 0;
    }
  }
  out.terms = acc.max_terms;
  return out;
}

double roundoff_bound(const Scan& s) { return 8.0 * kEps * std::exp(s.max_log_term); }

bool double_is_safe(const Scan& s, const SeriesAccuracy& acc) {
  if (!s.converged || !std::isfinite(s.sum)) return false;
  return roundoff_bound(s) <= 0.25 * (acc.abs_tol + acc.rel_tol * std::fabs(s.sum));
}

double term_target(const SeriesAccuracy& acc) {
  return acc.abs_tol > 0.0 ? acc.abs_tol : acc.rel_tol * 1e-6;
}

struct ExtendedPlan {
  bool feasible = false;
  int bits = 0;
  double max_log_term = 0.0;
};

/// Decides from log-magnitudes alone whether an extended-precision sum can finish.
ExtendedPlan plan_extended(const RatioSeries& s, double z, const SeriesAccuracy& acc) {
  ExtendedPlan plan;
  const double log_z = std::log(std::fabs(z));
  const double log_target = std::log(term_target(acc));
  double log_t = 0.0;
  int small = 0;
  for (int k = 1; k <= acc.max_terms; ++k) {
    const auto [x, y] = s.args(k - 1);
    const SignedLog r = gamma_ratio(x, y);
    if (r.sign == 0) {
      plan.feasible = true;
      break;
    }
    log_t += r.log_abs + log_z;
    plan.max_log_term = std::max(plan.max_log_term, log_t);
    if (log_t < log_target) {
      if (++small == 3) {
        plan.feasible = true;
        break;
      }
    } else {
      small = 0;
    }
  }
  const double needed = (plan.max_log_term - std::log(0.01 * term_target(acc))) / std::log(2.0);
  plan.bits = std::max(64, static_cast<int>(std::ceil(needed)) + 16);
  if (plan.bits > kMaxBits) plan.feasible = false;
  return plan;
}

class Mp {
 public:
  explicit Mp(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
  ~Mp() { mpfr_clear(v_); }
  Mp(const Mp&) = delete;
  Mp& operator=(const Mp&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

struct ExtendedResult {
  double value = 0.0;
  int terms = 0;
  double tail = 0.0;
  bool converged = false;
};

ExtendedResult sum_extended(const RatioSeries& s, double z, int bits, const SeriesAccuracy& acc) {
  const auto rnd = MPFR_RNDN;
  Mp alpha(bits), m(bits), l(bits), beta(bits), zz(bits);
  Mp x(bits), y(bits), lx(bits), ly(bits), ratio(bits), term(bits), sum(bits), mag(bits), tmp(bits);
  mpfr_set_d(alpha.get(), s.alpha, rnd);
  mpfr_set_d(m.get(), s.m, rnd);
  mpfr_set_d(l.get(), s.l, rnd);
  mpfr_set_d(beta.get(), s.beta, rnd);
  mpfr_set_d(zz.get(), z, rnd);
  mpfr_set_ui(term.get(), 1, rnd);
  mpfr_set_ui(sum.get(), 1, rnd);

  ExtendedResult out;
  int small = 0;
  for (int k = 1; k <= acc.max_terms; ++k) {
    const int j = k - 1;
    if (s.kind == RatioSeries::Kind::kilbas_saigo) {
      mpfr_mul_si(tmp.get(), m.get(), j, rnd);
      mpfr_add(tmp.get(), tmp.get(), l.get(), rnd);
      mpfr_mul(x.get(), alpha.get(), tmp.get(), rnd);
      mpfr_add_ui(x.get(), x.get(), 1, rnd);
      mpfr_add(y.get(), x.get(), alpha.get(), rnd);
    } else {
      mpfr_mul_si(x.get(), alpha.get(), j, rnd);
      mpfr_add(x.get(), x.get(), beta.get(), rnd);
      mpfr_add(y.get(), x.get(), alpha.get(), rnd);
    }
    if (mpfr_integer_p(y.get()) && mpfr_sgn(y.get()) <= 0) {
      out.converged = true;
      out.terms = k;
      break;
    }
    int sx = 1;
    int sy = 1;
    mpfr_lgamma(lx.get(), &sx, x.get(), rnd);
    mpfr_lgamma(ly.get(), &sy, y.get(), rnd);
    mpfr_sub(ratio.get(), lx.get(), ly.get(), rnd);
    mpfr_exp(ratio.get(), ratio.get(), rnd);
    if (sx * sy < 0) mpfr_neg(ratio.get(), ratio.get(), rnd);
    mpfr_mul(term.get(), term.get(), ratio.get(), rnd);
    mpfr_mul(term.get(), term.get(), zz.get(), rnd);
    mpfr_add(sum.get(), sum.get(), term.get(), rnd);

    const double t_abs = std::fabs(mpfr_get_d(term.get(), rnd));
    const double s_abs = std::fabs(mpfr_get_d(sum.get(), rnd));
    if (t_abs < acc.abs_tol + acc.rel_tol * s_abs) {
      if (++small == 3) {
        out.converged = true;
        out.terms = k;
        out.tail = t_abs;
        break;
      }
    } else {
      small = 0;
    }
  }
  out.value = mpfr_get_d(sum.get(), rnd);
  return out;
}

std::optional<Evaluation> try_series(const RatioSeries& s, double z, const SeriesAccuracy& acc,
                                     bool allow_extended) {
  if (z == 0.0) return Evaluation{1.0, EvalMethod::series, 0.0, 0};
  const Scan scan = scan_double(s, z, acc);
  if (double_is_safe(scan, acc)) {
    const double err = (roundoff_bound(scan) + acc.abs_tol + acc.rel_tol * std::fabs(scan.sum)) /
                       std::max(std::fabs(scan.sum), std::numeric_limits<double>::min());
    return Evaluation{scan.sum, EvalMethod::series, scan.terminated ? roundoff_bound(scan) : err, scan.terms};
  }
  if (!allow_extended) return std::nullopt;
  const ExtendedPlan plan = plan_extended(s, z, acc);
  if (!plan.feasible) return std::nullopt;
  const ExtendedResult ext = sum_extended(s, z, plan.bits, acc);
  if (!ext.converged || !std::isfinite(ext.value)) return std::nullopt;
  const double err = (3.0 * ext.tail + acc.abs_tol) / std::max(std::fabs(ext.value), 1e-300);
  return Evaluation{ext.value, EvalMethod::extended_series, err, ext.terms};
}

RatioSeries ks_series(const KilbasSaigoParams& p) {
  return {RatioSeries::Kind::kilbas_saigo, p.alpha, p.m, p.l, 0.0};
}

std::string describe(const KilbasSaigoParams& p, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "E(alpha=" << p.alpha << ", m=" << p.m << ", l=" << p.l << ") at z=" << z;
  return os.str();
}

}  // namespace

const char* to_string(EvalMethod method) {
  switch (method) {
    case EvalMethod::series: return "series";
    case EvalMethod::extended_series: return "extended_series";
    case EvalMethod::integral_equation: return "integral_equation";
    case EvalMethod::asymptotic: return "asymptotic";
    case EvalMethod::closed_form: return "closed_form";
  }
  return "unknown";
}

void SeriesAccuracy::validate() const {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || !(abs_tol + rel_tol > 0.0))
    fail(ErrorKind::inadmissible_params, "series tolerances must be nonnegative with positive sum");
  if (max_terms < 8) fail(ErrorKind::inadmissible_params, "max_terms must be at least 8");
}

SeriesAccuracy SeriesAccuracy::loosened(double factor) const {
  SeriesAccuracy out = *this;
  out.abs_tol *= factor;
  out.rel_tol *= factor;
  return out;
}

void KilbasSaigoParams::validate(int terms) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::inadmissible_params, "alpha must be positive");
  if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorKind::inadmissible_params, "m must be positive");
  if (!std::isfinite(l)) fail(ErrorKind::inadmissible_params, "l must be finite");
  for (int j = 0; j < terms; ++j) {
    const double x = alpha * (j * m + l) + 1.0;
    const double nearest = std::round(x);
    if (nearest <= 0.0 && std::fabs(x - nearest) <= 1e-12 * std::max(1.0, std::fabs(x))) {
      std::ostringstream os;
      os << "alpha*(j*m+l)+1 hits the Gamma pole " << nearest << " at j=" << j;
      fail(ErrorKind::inadmissible_params, os.str());
    }
  }
}

bool KilbasSaigoParams::is_decay_family() const {
  return std::fabs(l - (m - 1.0)) <= 1e-12 * std::max(1.0, std::fabs(m));
}

namespace detail {

std::optional<Evaluation> plain_series(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc) {
  return try_series(ks_series(params), z, acc, false);
}

}  // namespace detail

Evaluation kilbas_saigo_eval(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc) {
  acc.validate();
  params.validate(acc.max_terms);
  if (!std::isfinite(z)) fail(ErrorKind::domain_error, "argument must be finite");
  if (auto e = try_series(ks_series(params), z, acc, true)) return *e;

  if (z < 0.0 && params.is_decay_family()) {
    if (params.alpha < 1.0) {
      const DecayCurve curve(params.alpha, params.m, -z, acc);
      return Evaluation{curve(-z), EvalMethod::integral_equation, curve.error_estimate(), curve.intervals()};
    }
    if (params.alpha == 1.0) return Evaluation{std::exp(z / params.m), EvalMethod::closed_form, kEps, 0};
  }
  fail(ErrorKind::non_convergence,
       describe(params, z) + ": series did not reach the requested accuracy within max_terms");
}

double kilbas_saigo(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc) {
  return kilbas_saigo_eval(params, z, acc).value;
}

BoundPair kilbas_saigo_bounds(double alpha, double m, double z) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain_error, "bounds need 0 < alpha < 1");
  if (!(m > 1.0)) fail(ErrorKind::domain_error, "bounds need m > 1");
  if (!(z >= 0.0) || !std::isfinite(z)) fail(ErrorKind::domain_error, "bounds need z >= 0");
  const double c_low = std::tgamma(1.0 - alpha);
  const double c_up = boost::math::tgamma_ratio(1.0 + (m - 1.0) * alpha, 1.0 + m * alpha);
  return {1.0 / (1.0 + c_low * z), 1.0 / (1.0 + c_up * z)};
}

Evaluation mittag_leffler_eval(double alpha, double beta, double z, const SeriesAccuracy& acc) {
  acc.validate();
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(ErrorKind::inadmissible_params, "alpha and beta must be positive");
  if (!std::isfinite(z)) fail(ErrorKind::domain_error, "argument must be finite");
  const double lead = rgamma(beta);
  if (z < -10.0 && alpha < 1.0) {
    double sum = 0.0;
    double zk = 1.0;
    for (int k = 1; k <= 5; ++k) {
      zk /= z;
      sum -= zk * rgamma(beta - alpha * k);
    }
    const double next = std::fabs(std::pow(z, -6.0) * rgamma(beta - 6.0 * alpha));
    return Evaluation{sum, EvalMethod::asymptotic, next / std::max(std::fabs(sum), 1e-300), 5};
  }
  const RatioSeries s{RatioSeries::Kind::mittag_leffler, alpha, 0.0, 0.0, beta};
  SeriesAccuracy scaled = acc;
  scaled.abs_tol = acc.abs_tol / lead;
  if (auto e = try_series(s, z, scaled, true)) {
    e->value *= lead;
    return *e;
  }
  std::ostringstream os;
  os << "Mittag-Leffler(alpha=" << alpha << ", beta=" << beta << ") at z=" << z
     << ": series did not reach the requested accuracy within max_terms";
  fail(ErrorKind::non_convergence, os.str());
}

double mittag_leffler(double alpha, double beta, double z, const SeriesAccuracy& acc) {
  return mittag_leffler_eval(alpha, beta, z, acc).value;
}

std::optional<MittagLefflerReduction> reduce_to_mittag_leffler(const KilbasSaigoParams& params) {
  if (std::fabs(params.m - 1.0) > 1e-12) return std::nullopt;
  const double b = params.alpha * params.l + 1.0;
  return MittagLefflerReduction{std::tgamma(b), params.alpha, b};
}

}  // namespace fracdecay::specfun
