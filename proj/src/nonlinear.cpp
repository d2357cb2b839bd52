#include "fracdecay/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracdecay/error.hpp"
#include "fracdecay/fracode.hpp"

namespace fracdecay::nonlinear {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Tridiagonal {
  std::vector<double> lower, diag, upper;
  explicit Tridiagonal(int n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
};

/// Thomas algorithm; the systems built here are diagonally dominant M-matrices.
void solve_tridiagonal(const Tridiagonal& a, std::vector<double>& rhs, std::vector<double>& scratch) {
  const int n = static_cast<int>(rhs.size());
  scratch.resize(n);
  double denom = a.diag[0];
  scratch[0] = a.upper[0] / denom;
  rhs[0] /= denom;
  for (int i = 1; i < n; ++i) {
    denom = a.diag[i] - a.lower[i] * scratch[i - 1];
    scratch[i] = a.upper[i] / denom;
    rhs[i] = (rhs[i] - a.lower[i] * rhs[i - 1]) / denom;
  }
  for (int i = n - 2; i >= 0; --i) rhs[i] -= scratch[i] * rhs[i + 1];
}

double signed_abs_pow(double u, double e) { return std::pow(std::fabs(u), e); }

/// Frozen-coefficient matrix L(u*) with L(u*) u* = A(u*).
Tridiagonal linearize(const OperatorSpec& spec, const SpatialGrid1D& grid, std::span<const double> u) {
  const int n = grid.interior;
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  auto at = [&](int i) { return (i < 0 || i >= n) ? 0.0 : u[i]; };
  Tridiagonal mat(n);

  if (const auto* d = std::get_if<op::Degenerate>(&spec)) {
    for (int i = 0; i < n; ++i) {
      const double f = d->f ? d->f(u[i]) : d->c1 * signed_abs_pow(u[i], d->q);
      mat.lower[i] = f * inv_h2;
      mat.upper[i] = f * inv_h2;
      mat.diag[i] = -2.0 * f * inv_h2;
    }
    return mat;
  }

  // Flux forms: kappa at half points i+1/2, i = -1..n-1 (index shifted by one).
  std::vector<double> kappa(n + 1);
  std::vector<double> grad(n + 1);
  for (int i = -1; i < n; ++i) grad[i + 1] = (at(i + 1) - at(i)) / h;
  std::visit(Overloaded{
                 [&](const op::Laplace&) { std::fill(kappa.begin(), kappa.end(), 1.0); },
                 [&](const op::PLaplace& p) {
                   for (int k = 0; k <= n; ++k) kappa[k] = std::pow(std::fabs(grad[k]), p.p - 2.0);
                   if (p.p < 2.0)
                     for (int k = 0; k <= n; ++k)
                       kappa[k] = std::pow(grad[k] * grad[k] + 1e-24, 0.5 * (p.p - 2.0));
                 },
                 [&](const op::PorousMedium& pm) {
                   for (int i = -1; i < n; ++i) {
                     const double mid = 0.5 * (at(i) + at(i + 1));
                     kappa[i + 1] = pm.g ? pm.g(mid) : pm.c0 * signed_abs_pow(mid, pm.m);
                   }
                 },
                 [&](const op::Degenerate&) {},
                 [&](const op::MeanCurvature&) {
                   for (int k = 0; k <= n; ++k) kappa[k] = 1.0 / std::sqrt(1.0 + grad[k] * grad[k]);
                 },
                 [&](const op::Kirchhoff& kf) {
                   double norm_q = 0.0;
                   for (int k = 0; k <= n; ++k) norm_q += h * std::pow(std::fabs(grad[k]), kf.q);
                   norm_q = std::pow(norm_q, 1.0 / kf.q);
                   const double mval = kf.m_func ? kf.m_func(norm_q) : kf.b * std::pow(norm_q, kf.gamma);
                   for (int k = 0; k <= n; ++k) kappa[k] = mval * std::pow(std::fabs(grad[k]), kf.p - 2.0);
                 },
             },
             spec);
  for (int i = 0; i < n; ++i) {
    mat.lower[i] = kappa[i] * inv_h2;
    mat.upper[i] = kappa[i + 1] * inv_h2;
    mat.diag[i] = -(kappa[i] + kappa[i + 1]) * inv_h2;
  }
  return mat;
}

double max_gradient(std::span<const double> u, double h) {
  double g = std::fabs(u.front()) / h;
  for (std::size_t i = 1; i < u.size(); ++i) g = std::max(g, std::fabs(u[i] - u[i - 1]) / h);
  return std::max(g, std::fabs(u.back()) / h);
}

double energy_of(std::span<const double> u, double h) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(h * s);
}

}  // namespace

void SpatialGrid1D::validate() const {
  if (!(length > 0.0)) fail(ErrorKind::inadmissible_params, "domain length must be positive");
  if (interior < 3) fail(ErrorKind::inadmissible_params, "spatial grid needs at least 3 interior points");
}

std::string operator_name(const OperatorSpec& spec) {
  return std::visit(Overloaded{
                        [](const op::Laplace&) { return std::string("laplace"); },
                        [](const op::PLaplace&) { return std::string("p_laplace"); },
                        [](const op::PorousMedium&) { return std::string("porous_medium"); },
                        [](const op::Degenerate&) { return std::string("degenerate"); },
                        [](const op::MeanCurvature&) { return std::string("mean_curvature"); },
                        [](const op::Kirchhoff&) { return std::string("kirchhoff"); },
                    },
                    spec);
}

void validate_operator(const OperatorSpec& spec) {
  std::visit(Overloaded{
                 [](const op::Laplace&) {},
                 [](const op::PLaplace& p) {
                   if (!(p.p > 1.0)) fail(ErrorKind::inadmissible_params, "p-Laplacian needs p > 1");
                 },
                 [](const op::PorousMedium& pm) {
                   if (!(pm.m >= 0.0) || !(pm.c0 > 0.0))
                     fail(ErrorKind::inadmissible_params, "porous medium needs m >= 0 and c0 > 0");
                 },
                 [](const op::Degenerate& d) {
                   if (!(d.q >= 0.0) || !(d.c1 > 0.0))
                     fail(ErrorKind::inadmissible_params, "degenerate operator needs q >= 0 and c1 > 0");
                 },
                 [](const op::MeanCurvature&) {},
                 [](const op::Kirchhoff& k) {
                   if (!(k.b > 0.0) || !(k.gamma >= 0.0) || !(k.p > 1.0) || !(k.q >= 1.0))
                     fail(ErrorKind::inadmissible_params, "Kirchhoff operator needs b > 0, gamma >= 0, p > 1, q >= 1");
                 },
             },
             spec);
}

std::vector<double> discretize_operator(const OperatorSpec& spec, const SpatialGrid1D& grid, std::span<const double> u) {
  grid.validate();
  validate_operator(spec);
  if (static_cast<int>(u.size()) != grid.interior) fail(ErrorKind::grid_mismatch, "state size differs from the grid");
  for (double v : u)
    if (!std::isfinite(v)) fail(ErrorKind::non_finite_state, "state contains non-finite values");
  const Tridiagonal mat = linearize(spec, grid, u);
  const int n = grid.interior;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double v = mat.diag[i] * u[i];
    if (i > 0) v += mat.lower[i] * u[i - 1];
    if (i + 1 < n) v += mat.upper[i] * u[i + 1];
    out[i] = v;
  }
  for (double v : out)
    if (!std::isfinite(v)) fail(ErrorKind::non_finite_state, "operator produced non-finite values");
  return out;
}

SolutionTrace solve_nonlinear(const OperatorSpec& spec, const SourceSpec& source, double alpha,
                              const Coefficient& coeff, std::span<const double> u0, const SpatialGrid1D& space,
                              const TimeGrid& time, const SolverOptions& options) {
  space.validate();
  validate_operator(spec);
  if (static_cast<int>(u0.size()) != space.interior) fail(ErrorKind::grid_mismatch, "initial state size differs from the grid");
  if (options.max_sweeps < 1 || options.max_sweeps > 10)
    fail(ErrorKind::inadmissible_params, "fixed-point sweeps must be between 1 and 10");
  if (source.kind == SourceSpec::Kind::power_absorption && !(source.p > 1.0))
    fail(ErrorKind::inadmissible_params, "absorption exponent must exceed 1");

  const fracode::CaputoL1Operator l1(time, alpha);
  const int n_space = space.interior;
  const int n_time = time.steps();
  const double h = space.spacing();
  const auto t = time.nodes();
  bool require_nonnegative = options.require_nonnegative;
  if (std::holds_alternative<op::PorousMedium>(spec))
    require_nonnegative = require_nonnegative || std::all_of(u0.begin(), u0.end(), [](double v) { return v >= 0.0; });

  SolutionTrace trace;
  trace.origin = TraceOrigin::finite_difference;
  trace.times.assign(t.begin(), t.end());
  trace.spacing = h;
  trace.alpha = alpha;
  if (auto p = coeff.as_power()) trace.beta = p->beta;
  trace.energy.reserve(n_time + 1);
  if (options.store_fields) trace.fields.reserve(n_time + 1);

  std::vector<double> u(u0.begin(), u0.end());
  std::vector<double> diffs(static_cast<std::size_t>(n_time) * n_space, 0.0);
  std::vector<double> history(n_space), base(n_space), rhs(n_space), scratch, iterate(n_space);
  trace.energy.push_back(energy_of(u, h));
  if (options.store_fields) trace.fields.push_back(u);
  trace.max_gradient = max_gradient(u, h);

  for (int n = 1; n <= n_time; ++n) {
    const auto w = l1.row(n);
    const double wnn = w[n - 1];
    std::fill(history.begin(), history.end(), 0.0);
    if (alpha < 1.0) {
      for (int k = 1; k < n; ++k) {
        const double wk = w[k - 1];
        const double* d = diffs.data() + static_cast<std::size_t>(k - 1) * n_space;
        for (int i = 0; i < n_space; ++i) history[i] += wk * d[i];
      }
    }
    for (int i = 0; i < n_space; ++i) base[i] = wnn * u[i] - history[i];
    const double a_n = coeff.value(t[n]);
    if (!std::isfinite(a_n)) fail(ErrorKind::non_finite_state, "coefficient is not finite at t=" + std::to_string(t[n]));

    iterate = u;
    double previous_update = 0.0;
    int sweeps = 0;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      Tridiagonal mat = linearize(spec, space, iterate);
      for (int i = 0; i < n_space; ++i) {
        mat.lower[i] *= -a_n;
        mat.upper[i] *= -a_n;
        mat.diag[i] = wnn - a_n * mat.diag[i];
        if (source.kind == SourceSpec::Kind::fisher_kpp)
          mat.diag[i] += 1.0 - iterate[i];
        else if (source.kind == SourceSpec::Kind::power_absorption)
          mat.diag[i] += source.mu * std::pow(std::fabs(iterate[i]), source.p);
      }
      rhs = base;
      solve_tridiagonal(mat, rhs, scratch);
      double update = 0.0;
      double scale = 1.0;
      for (int i = 0; i < n_space; ++i) {
        if (!std::isfinite(rhs[i])) fail(ErrorKind::non_finite_state, "state became non-finite at step " + std::to_string(n));
        update = std::max(update, std::fabs(rhs[i] - iterate[i]));
        scale = std::max(scale, std::fabs(rhs[i]));
      }
      iterate.swap(rhs);
      sweeps = sweep + 1;
      if (update <= options.sweep_tolerance * scale) break;
      if (sweep >= 2 && update > previous_update && sweep + 1 == options.max_sweeps)
        fail(ErrorKind::step_divergence, "fixed-point sweeps diverge at step " + std::to_string(n));
      previous_update = update;
    }
    trace.max_sweeps_used = std::max(trace.max_sweeps_used, sweeps);

    double* d = diffs.data() + static_cast<std::size_t>(n - 1) * n_space;
    for (int i = 0; i < n_space; ++i) {
      d[i] = iterate[i] - u[i];
      u[i] = iterate[i];
    }
    if (require_nonnegative) {
      const double lowest = *std::min_element(u.begin(), u.end());
      if (lowest < -1e-10) {
        std::ostringstream os;
        os << "porous-medium state reached " << lowest << " at t=" << t[n];
        fail(ErrorKind::positivity_loss, os.str());
      }
    }
    trace.energy.push_back(energy_of(u, h));
    trace.max_gradient = std::max(trace.max_gradient, max_gradient(u, h));
    if (options.store_fields) trace.fields.push_back(u);
  }
  return trace;
}

EnergyDiagnostic check_energy_inequality(const SolutionTrace& trace, double alpha) {
  if (trace.fields.size() != trace.times.size() || trace.fields.empty())
    fail(ErrorKind::grid_mismatch, "energy diagnostic needs stored fields at every time node");
  const fracode::CaputoL1Operator l1(TimeGrid::from_nodes(trace.times), alpha);
  const int n_time = l1.steps();
  const double h = trace.spacing > 0.0 ? trace.spacing : 1.0;
  const std::size_t n_space = trace.fields[0].size();
  std::vector<double> energy(n_time + 1);
  for (int j = 0; j <= n_time; ++j) energy[j] = energy_of(trace.fields[j], h);

  EnergyDiagnostic out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_time; ++n) {
    const auto w = l1.row(n);
    const auto& un = trace.fields[n];
    double lhs = 0.0;
    double rhs = 0.0;
    for (int k = 1; k <= n; ++k) {
      const auto& a = trace.fields[k];
      const auto& b = trace.fields[k - 1];
      double inner = 0.0;
      for (std::size_t i = 0; i < n_space; ++i) inner += un[i] * (a[i] - b[i]);
      rhs += w[k - 1] * h * inner;
      lhs += w[k - 1] * (energy[k] - energy[k - 1]);
    }
    lhs *= energy[n];
    out.times.push_back(trace.times[n]);
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    out.min_margin = std::min(out.min_margin, rhs - lhs);
  }
  if (n_time == 0) out.min_margin = 0.0;
  return out;
}

PredictedExponent predict_exponent(const OperatorSpec& spec, double alpha, double beta, int dimension) {
  validate_operator(spec);
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::inadmissible_params, "alpha must lie in (0,1]");
  if (!(beta > -alpha)) fail(ErrorKind::inadmissible_params, "hypothesis (H) requires beta > -alpha");
  const double s = alpha + beta;
  const double sobolev = 2.0 * dimension / (dimension + 2.0);
  auto check_p = [&](double p) {
    if (p < sobolev) {
      std::ostringstream os;
      os << "p=" << p << " lies below 2n/(n+2)=" << sobolev;
      fail(ErrorKind::unsupported_regime, os.str());
    }
  };
  return std::visit(Overloaded{
                        [&](const op::Laplace&) { return PredictedExponent{s, "alpha+beta"}; },
                        [&](const op::PLaplace& p) {
                          check_p(p.p);
                          return PredictedExponent{s / (p.p - 1.0), "(alpha+beta)/(p-1)"};
                        },
                        [&](const op::PorousMedium& pm) {
                          return PredictedExponent{s / (pm.m + 1.0), "(alpha+beta)/(m+1)"};
                        },
                        [&](const op::Degenerate& d) {
                          return PredictedExponent{s / (d.q + 1.0), "(alpha+beta)/(q+1)"};
                        },
                        [&](const op::MeanCurvature&) { return PredictedExponent{s, "alpha+beta"}; },
                        [&](const op::Kirchhoff& k) {
                          check_p(k.p);
                          return PredictedExponent{s / (k.gamma + k.p - 1.0), "(alpha+beta)/(gamma+p-1)"};
                        },
                    },
                    spec);
}

decayfit::DecayReport nonlinear_report(const SolutionTrace& trace, const PredictedExponent& predicted, double scale) {
  double t_min = 1e-2;
  if (trace.times.size() > 1) t_min = std::max(t_min, trace.times[1]);
  decayfit::Series series;
  series.t.push_back(0.0);
  series.e.push_back(trace.energy.front());
  if (trace.times.back() > t_min) {
    const auto tail = decayfit::resample_log(trace.times, trace.energy, t_min);
    series.t.insert(series.t.end(), tail.t.begin(), tail.t.end());
    series.e.insert(series.e.end(), tail.e.begin(), tail.e.end());
  }
  auto report = decayfit::check_envelope(series.t, series.e, predicted.value, false, scale);
  report.predicted_exponent = predicted.value;
  report.predicted_tag = predicted.tag;
  if (report.verdict == decayfit::Verdict::degenerate) return report;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    const double g = trace.energy[j] * (1.0 + scale * std::pow(trace.times[j], predicted.value));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  report.lower_constant = lo;
  report.upper_constant = hi;
  if (!std::isfinite(hi)) {
    report.upper_ok = false;
    report.verdict = decayfit::Verdict::violated;
  }
  return report;
}

ScenarioResult run_scenario(const std::string& name, const ScenarioParams& params) {
  if (!(params.beta > -params.alpha)) fail(ErrorKind::inadmissible_params, "hypothesis (H) requires beta > -alpha");
  const SpatialGrid1D space{params.length, params.points};
  space.validate();
  const double grading = params.grading > 0.0 ? params.grading : TimeGrid::default_grading(params.alpha);
  const TimeGrid time = TimeGrid::graded(params.horizon, params.steps, grading);
  const Coefficient coeff = Coefficient::power(1.0, params.beta);
  const double k1 = std::numbers::pi / params.length;
  std::vector<double> u0(space.interior);
  for (int i = 0; i < space.interior; ++i) u0[i] = params.amplitude * std::sin(k1 * space.x(i));

  OperatorSpec spec = op::Laplace{};
  SourceSpec source = SourceSpec::none();
  PredictedExponent predicted{params.alpha + params.beta, "alpha+beta"};
  double scale = 1.0;
  bool two_sided = false;
  if (name == "fisher_kpp") {
    if (!(params.amplitude > 0.0 && params.amplitude <= 1.0))
      fail(ErrorKind::inadmissible_params, "Fisher-KPP needs 0 < u0 <= 1");
    source = SourceSpec::fisher_kpp();
    scale = k1 * k1;
  } else if (name == "semilinear_pme") {
    if (!(params.m >= 0.0)) fail(ErrorKind::inadmissible_params, "porous medium exponent m must be nonnegative");
    if (!(params.p > 1.0)) fail(ErrorKind::inadmissible_params, "absorption exponent p must exceed 1");
    if (!(params.mu >= 0.0)) fail(ErrorKind::inadmissible_params, "absorption coefficient mu must be nonnegative");
    const double m = params.m;
    spec = op::PorousMedium{m, m + 1.0, [m](double v) { return (m + 1.0) * std::pow(std::fabs(v), m); }};
    if (params.mu > 0.0) source = SourceSpec::power_absorption(params.mu, params.p);
    predicted = predict_exponent(spec, params.alpha, params.beta);
  } else if (name == "toy_model") {
    scale = k1 * k1;
    two_sided = true;
  } else {
    fail(ErrorKind::config_error, "unknown scenario '" + name + "'");
  }

  ScenarioResult result;
  result.trace = solve_nonlinear(spec, source, params.alpha, coeff, u0, space, time);
  result.report = nonlinear_report(result.trace, predicted, scale);
  if (two_sided) {
    auto full = decayfit::check_envelope(result.trace.times, result.trace.energy, predicted.value, true, scale);
    const auto resampled = decayfit::resample_log(result.trace.times, result.trace.energy,
                                                  std::max(1e-2, result.trace.times[1]));
    auto tail = decayfit::check_envelope(resampled.t, resampled.e, predicted.value, true, scale);
    result.report.lower_constant = full.lower_constant;
    result.report.lower_ok = full.lower_constant > 0.0 && tail.lower_ok;
    result.report.two_sided = true;
    result.report.verdict = result.report.upper_ok && result.report.lower_ok ? decayfit::Verdict::sandwich_ok
                                                                             : decayfit::Verdict::violated;
  }

  result.min_value = std::numeric_limits<double>::infinity();
  result.max_value = -std::numeric_limits<double>::infinity();
  for (const auto& field : result.trace.fields)
    for (double v : field) {
      result.min_value = std::min(result.min_value, v);
      result.max_value = std::max(result.max_value, v);
    }
  if (name == "fisher_kpp") {
    result.order_preserved = result.min_value > 0.0 && result.max_value <= 1.0;
    if (!result.order_preserved) result.report.notes.push_back("Fisher-KPP state left (0, 1]");
  } else if (name == "semilinear_pme") {
    result.order_preserved = result.min_value >= -1e-10;
  }
  return result;
}

}  // namespace fracdecay::nonlinear
