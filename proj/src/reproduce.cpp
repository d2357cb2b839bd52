#include "fracdecay/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracdecay/coefficient.hpp"
#include "fracdecay/csv.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/fracode.hpp"
#include "fracdecay/nonlinear.hpp"
#include "fracdecay/specfun.hpp"
#include "fracdecay/spectral.hpp"

namespace fracdecay::app {

namespace {

constexpr double pi = std::numbers::pi;

struct Context {
  specfun::SeriesAccuracy acc;
  std::filesystem::path dir;
  std::vector<std::pair<std::string, double>> energy_margins;  ///< filled by the operator row
};

struct Outcome {
  bool passed = false;
  std::string detail;
  std::vector<std::filesystem::path> files;
};

using Row = Outcome (*)(Context&);

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void emit(Context& ctx, Outcome& out, const std::string& name, const csv::Table& table) {
  const auto path = ctx.dir / name;
  csv::write_atomic(path, csv::format(table));
  out.files.push_back(path);
}

void add_row(csv::Table& t, std::initializer_list<double> values) {
  std::size_t c = 0;
  for (double v : values) t.columns[c++].push_back(v);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return v;
}

Outcome exponential_identity(Context& ctx) {
  Outcome out;
  csv::Table t{{"m", "z", "value", "exact", "abs_error", "method"}, std::vector<std::vector<double>>(6)};
  double worst = 0.0;
  for (double m : {1.5, 2.0, 3.0}) {
    for (double z : linspace(-5.0, 5.0, 41)) {
      const auto ev = specfun::kilbas_saigo_eval({1.0, m, m - 1.0}, z, ctx.acc);
      const double exact = std::exp(z / m);
      const double err = std::fabs(ev.value - exact);
      worst = std::max(worst, err);
      add_row(t, {m, z, ev.value, exact, err, static_cast<double>(ev.method)});
    }
  }
  emit(ctx, out, "row01_identity.csv", t);
  out.passed = worst <= 1e-10;
  out.detail = "max |E - exp(z/m)| = " + sci(worst) + " (tol 1e-10)";
  return out;
}

Outcome bound_sandwich(Context& ctx) {
  Outcome out;
  csv::Table t{{"alpha", "m", "z", "value", "lower", "upper"}, std::vector<std::vector<double>>(6)};
  int outside = 0, total = 0;
  double worst = 0.0;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double m : {1.5, 2.0, 5.0}) {
      for (double z : logspace(1e-3, 10.0, 30)) {
        const double v = specfun::kilbas_saigo({alpha, m, m - 1.0}, -z, ctx.acc);
        const auto b = specfun::kilbas_saigo_bounds(alpha, m, z);
        const double excess = std::max(b.lower - v, v - b.upper);
        worst = std::max(worst, excess);
        ++total;
        if (!(v >= b.lower - 1e-9 && v <= b.upper + 1e-9)) ++outside;
        add_row(t, {alpha, m, z, v, b.lower, b.upper});
      }
    }
  }
  emit(ctx, out, "row02_bounds.csv", t);
  out.passed = outside == 0;
  out.detail = std::to_string(total - outside) + "/" + std::to_string(total) +
               " inside bounds, worst excess " + sci(worst) + " (tol 1e-9)";
  return out;
}

Outcome l1_closed_form(Context& ctx) {
  Outcome out;
  const auto grid = TimeGrid::graded(10.0, 4096, 3.0);
  const auto trace = fracode::solve_linear_mode(0.5, 0.5, 1.0, 1.0, grid);
  const specfun::DecayEvaluator exact(0.5, 2.0, 10.0, ctx.acc);
  csv::Table t{{"t", "l1", "exact", "rel_error"}, std::vector<std::vector<double>>(4)};
  double worst = 0.0;
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    const double ref = exact(trace.times[j]);
    const double rel = std::fabs(trace.values[j] - ref) / std::fabs(ref);
    if (trace.times[j] >= 0.1) worst = std::max(worst, rel);
    add_row(t, {trace.times[j], trace.values[j], ref, rel});
  }
  emit(ctx, out, "row03_l1.csv", t);
  out.passed = worst <= 5e-3;
  out.detail = "max relative error for t >= 0.1: " + sci(worst) + " (tol 5e-3)";
  return out;
}

csv::Table energy_table(const SolutionTrace& trace, const decayfit::DecayReport& r) {
  csv::Table t{{"t", "E", "bound_lower", "bound_upper"}, {trace.times, trace.energy, {}, {}}};
  for (double time : trace.times) {
    const double d = 1.0 + r.envelope_scale * std::pow(time, r.envelope_exponent);
    t.columns[2].push_back(r.lower_constant / d);
    t.columns[3].push_back(r.upper_constant / d);
  }
  return t;
}

Outcome dirichlet_sandwich(Context& ctx) {
  Outcome out;
  const auto sys = spectral::EigenSystem::interval(pi, spectral::Boundary::dirichlet, 16);
  const auto u0 = spectral::project_initial_data(
      sys, [](spectral::Point p) { return p.x * (pi - p.x) * (1.0 + 0.5 * std::sin(5.0 * p.x)); });
  const auto trace = spectral::solve_subdiffusion(sys, 0.5, 0.5, u0.coefficients, decayfit::log_times(1e-2, 1e3),
                                                  ctx.acc);
  const auto report = spectral::verify_dirichlet_sandwich(trace, sys, 0.5, 0.5);
  emit(ctx, out, "row04_dirichlet.csv", energy_table(trace, report));
  const double s = report.has_fit ? report.fit.exponent : std::numeric_limits<double>::quiet_NaN();
  out.passed = report.verdict == decayfit::Verdict::sandwich_ok && std::fabs(s - 1.0) <= 0.05;
  out.detail = std::string(decayfit::to_string(report.verdict)) + ", m=" + fixed(report.lower_constant) +
               " M=" + fixed(report.upper_constant) + ", fitted s=" + fixed(s) + " (target 1 +- 5%)";
  return out;
}

Outcome neumann_dichotomy(Context& ctx) {
  Outcome out;
  const auto sys = spectral::EigenSystem::interval(pi, spectral::Boundary::neumann, 16);
  const auto times = decayfit::log_times(1e-2, 1e3);
  const auto flat = spectral::project_initial_data(sys, [](spectral::Point) { return 1.0; });
  const auto flat_trace = spectral::solve_subdiffusion(sys, 0.5, 0.5, flat.coefficients, times, ctx.acc);
  const double level = std::fabs(flat.coefficients[0]);
  double drift = 0.0;
  for (double e : flat_trace.energy) drift = std::max(drift, std::fabs(e - level) / level);
  const auto flat_report = spectral::verify_neumann(flat_trace, sys, 0.5, 0.5, flat.coefficients[0], flat.coefficients[1]);

  const auto zero_mean = spectral::project_initial_data(
      sys, [](spectral::Point p) { return std::cos(p.x) + 0.5 * std::cos(3.0 * p.x); });
  const auto zm_trace = spectral::solve_subdiffusion(sys, 0.5, 0.5, zero_mean.coefficients, times, ctx.acc);
  const auto zm_report =
      spectral::verify_neumann(zm_trace, sys, 0.5, 0.5, zero_mean.coefficients[0], zero_mean.coefficients[1]);

  csv::Table t{{"t", "E_constant", "E_mean_zero"}, {times, flat_trace.energy, zm_trace.energy}};
  emit(ctx, out, "row05_neumann.csv", t);
  out.passed = drift <= 0.01 && flat_report.passed() && zm_report.verdict == decayfit::Verdict::sandwich_ok;
  out.detail = "plateau deviation " + sci(drift) + " of |u00|=" + fixed(level) + " (tol 1%), mean-zero " +
               decayfit::to_string(zm_report.verdict);
  return out;
}

Outcome heat_catalog(Context& ctx) {
  Outcome out;
  const auto sys = spectral::EigenSystem::interval(pi, spectral::Boundary::dirichlet, 16);
  std::vector<double> u0(sys.size(), 0.0);
  u0[0] = 1.0;
  const auto times = decayfit::log_times(1e-2, 1e2);
  struct Case {
    const char* name;
    Coefficient coeff;
    decayfit::ModelKind kind;
    double parameter;
  };
  const Case cases[] = {
      {"exponential", Coefficient::exponential_rate(2.0), decayfit::ModelKind::exponential, 1.0},
      {"logarithmic", Coefficient::logarithmic(3.0), decayfit::ModelKind::logarithmic, 3.0},
      {"polynomial", Coefficient::polynomial(1.0, {1.0, 1.0}), decayfit::ModelKind::power, 1.0},
  };
  csv::Table t{{"t", "E_exponential", "E_logarithmic", "E_polynomial"}, {times}};
  bool ok = true;
  std::ostringstream detail;
  for (const auto& c : cases) {
    const auto trace = spectral::solve_heat_general(sys, c.coeff, u0, times);
    t.columns.push_back(trace.energy);
    detail << c.name << ": ";
    try {
      const auto sel = decayfit::fit_model_select(trace.times, trace.energy);
      bool hit = sel.best.kind == c.kind && std::fabs(sel.best.parameter / c.parameter - 1.0) <= 0.05;
      if (c.kind == decayfit::ModelKind::exponential) hit = hit && std::fabs(sel.best.power / 2.0 - 1.0) <= 0.05;
      detail << decayfit::to_string(sel.best.kind) << " " << fixed(sel.best.parameter);
      if (c.kind == decayfit::ModelKind::exponential) detail << " t^" << fixed(sel.best.power);
      ok = ok && hit;
    } catch (const Error& e) {
      detail << e.what();
      ok = false;
    }
    detail << "; ";
  }
  emit(ctx, out, "row06_heat.csv", t);
  out.passed = ok;
  out.detail = detail.str() + "tol 5%";
  return out;
}

Outcome ode_envelope(Context& ctx) {
  Outcome out;
  const fracode::SemilinearParams params{1.0, 2.0, 0.5, 1.0};
  const auto trace = fracode::solve_semilinear(params, 0.5, TimeGrid::graded(100.0, 2048, 3.0));
  const auto env = fracode::semilinear_envelope(params, 0.5);
  const auto fit = fracode::fit_envelope(trace, env);
  const auto rs = decayfit::resample_log(trace.times, trace.values, 1e-2);
  const auto tail = decayfit::fit_power_tail(rs.t, rs.e);
  csv::Table t{{"t", "H", "sub_envelope", "super_envelope"}, {trace.times, trace.values, {}, {}}};
  for (double time : trace.times) {
    t.columns[2].push_back(fit.c_sub * env.sub(time));
    t.columns[3].push_back(fit.c_super * env.super(time));
  }
  emit(ctx, out, "row07_ode.csv", t);
  const bool finite = std::isfinite(fit.c_sub) && std::isfinite(fit.c_super) && fit.c_sub > 0.0 && fit.c_super > 0.0;
  out.passed = fit.holds && finite && std::fabs(tail.exponent / 0.5 - 1.0) <= 0.10;
  out.detail = "c=" + fixed(fit.c_sub) + " C=" + fixed(fit.c_super) + ", fitted s=" + fixed(tail.exponent) +
               " (target 0.5 +- 10%)";
  return out;
}

Outcome operator_exponents(Context& ctx) {
  Outcome out;
  using namespace nonlinear;
  const std::pair<const char*, OperatorSpec> ops[] = {
      {"p_laplace", op::PLaplace{3.0}},
      {"porous_medium", op::PorousMedium{1.0, 1.0, {}}},
      {"degenerate", op::Degenerate{1.0, 1.0, {}}},
      {"mean_curvature", op::MeanCurvature{}},
      {"kirchhoff", op::Kirchhoff{1.0, 1.0, 2.0, 2.0, {}}},
  };
  const SpatialGrid1D space{pi, 255};
  std::vector<double> u0(space.interior);
  for (int i = 0; i < space.interior; ++i) u0[i] = std::sin(space.x(i));
  const auto grid = TimeGrid::graded(100.0, 2048, TimeGrid::default_grading(0.5));
  const auto coeff = Coefficient::power(1.0, 0.5);
  bool ok = true;
  std::ostringstream detail;
  ctx.energy_margins.clear();
  for (const auto& [name, spec] : ops) {
    const auto trace = solve_nonlinear(spec, SourceSpec::none(), 0.5, coeff, u0, space, grid);
    const auto report = nonlinear_report(trace, predict_exponent(spec, 0.5, 0.5));
    ctx.energy_margins.emplace_back(name, check_energy_inequality(trace, 0.5).min_margin);
    csv::Table t{{"t", "E", "predicted_bound"}, {trace.times, trace.energy, {}}};
    for (double time : trace.times)
      t.columns[2].push_back(report.upper_constant /
                             (1.0 + report.envelope_scale * std::pow(time, report.envelope_exponent)));
    emit(ctx, out, std::string("row08_") + name + ".csv", t);
    const bool hit = report.verdict == decayfit::Verdict::upper_only_ok && std::isfinite(report.upper_constant);
    ok = ok && hit;
    if (detail.tellp() > 0) detail << "; ";
    detail << name << " " << decayfit::to_string(report.verdict) << " s=" << fixed(report.envelope_exponent, 3);
    if (report.has_fit) detail << " (fit " << fixed(report.fit.exponent, 3) << ")";
  }
  out.passed = ok;
  out.detail = detail.str();
  return out;
}

Outcome energy_inequality(Context& ctx) {
  Outcome out;
  if (ctx.energy_margins.empty()) {
    out.detail = "operator runs unavailable";
    return out;
  }
  csv::Table t{{"run", "min_margin"}, {{}, {}}};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ctx.energy_margins.size(); ++i) {
    t.columns[0].push_back(static_cast<double>(i));
    t.columns[1].push_back(ctx.energy_margins[i].second);
    worst = std::min(worst, ctx.energy_margins[i].second);
  }
  emit(ctx, out, "row09_energy.csv", t);
  out.passed = worst >= -1e-8;
  out.detail = "worst margin " + sci(worst) + " over " + std::to_string(ctx.energy_margins.size()) +
               " runs (tol -1e-8)";
  return out;
}

Outcome reaction_scenarios(Context& ctx) {
  Outcome out;
  nonlinear::ScenarioParams params;
  const auto fisher = nonlinear::run_scenario("fisher_kpp", params);
  params.mu = 1.0;
  params.m = 1.0;
  params.p = 2.0;
  const auto pme = nonlinear::run_scenario("semilinear_pme", params);
  const std::pair<const char*, const nonlinear::ScenarioResult*> runs[] = {{"fisher_kpp", &fisher},
                                                                           {"semilinear_pme", &pme}};
  for (const auto& [name, res] : runs) {
    csv::Table t{{"t", "E", "predicted_bound"}, {res->trace.times, res->trace.energy, {}}};
    for (double time : res->trace.times)
      t.columns[2].push_back(res->report.upper_constant /
                             (1.0 + res->report.envelope_scale * std::pow(time, res->report.envelope_exponent)));
    emit(ctx, out, std::string("row10_") + name + ".csv", t);
  }
  const bool fisher_ok = fisher.order_preserved && fisher.report.upper_ok && fisher.report.passed();
  const bool pme_ok = pme.report.upper_ok && pme.report.passed();
  out.passed = fisher_ok && pme_ok;
  out.detail = "fisher-kpp range [" + sci(fisher.min_value) + ", " + fixed(fisher.max_value) + "] " +
               decayfit::to_string(fisher.report.verdict) + "; porous absorption s=" +
               fixed(pme.report.envelope_exponent, 3) + " " + decayfit::to_string(pme.report.verdict);
  return out;
}

Outcome cross_solver(Context& ctx) {
  Outcome out;
  const nonlinear::SpatialGrid1D space{pi, 511};
  std::vector<double> u0(space.interior);
  for (int i = 0; i < space.interior; ++i) u0[i] = std::sin(space.x(i));
  const auto grid = TimeGrid::graded(100.0, 4096, TimeGrid::default_grading(0.5));
  nonlinear::SolverOptions opts;
  opts.store_fields = false;
  const auto fd = nonlinear::solve_nonlinear(nonlinear::op::Laplace{}, nonlinear::SourceSpec::none(), 0.5,
                                             Coefficient::power(1.0, 0.5), u0, space, grid, opts);
  const auto sys = spectral::EigenSystem::interval(pi, spectral::Boundary::dirichlet, 1);
  const std::vector<double> modal{std::sqrt(pi / 2.0)};
  const auto exact = spectral::solve_subdiffusion(sys, 0.5, 0.5, modal, fd.times, ctx.acc);
  csv::Table t{{"t", "E_fd", "E_spectral", "rel_error"}, {fd.times, fd.energy, exact.energy, {}}};
  double worst = 0.0;
  for (std::size_t j = 0; j < fd.times.size(); ++j) {
    const double rel = std::fabs(fd.energy[j] - exact.energy[j]) / exact.energy[j];
    t.columns[3].push_back(rel);
    if (fd.times[j] >= 0.1) worst = std::max(worst, rel);
  }
  emit(ctx, out, "row11_cross.csv", t);
  out.passed = worst <= 5e-3;
  out.detail = "max relative energy error for t >= 0.1: " + sci(worst) + " (tol 5e-3)";
  return out;
}

struct RowSpec {
  int id;
  const char* label;
  double budget;
  Row run;
};

const RowSpec kRows[] = {
    {1, "kilbas-saigo exponential identity", 1.0, exponential_identity},
    {2, "kilbas-saigo two-sided bound", 5.0, bound_sandwich},
    {3, "L1 scheme vs closed-form mode", 10.0, l1_closed_form},
    {4, "dirichlet decay sandwich", 5.0, dirichlet_sandwich},
    {5, "neumann plateau and decay", 5.0, neumann_dichotomy},
    {6, "heat coefficient catalog", 5.0, heat_catalog},
    {7, "semilinear ode envelope", 10.0, ode_envelope},
    {8, "nonlinear operator exponents", 120.0, operator_exponents},
    {9, "discrete energy inequality", 120.0, energy_inequality},
    {10, "fisher-kpp and porous absorption", 60.0, reaction_scenarios},
    {11, "finite difference vs spectral", 120.0, cross_solver},
};

CriterionResult run_row(const RowSpec& spec, Context& ctx) {
  CriterionResult r;
  r.id = spec.id;
  r.label = spec.label;
  r.budget = spec.budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto out = spec.run(ctx);
    r.check_passed = out.passed;
    r.detail = out.detail;
    r.files = out.files;
  } catch (const std::exception& e) {
    r.check_passed = false;
    r.detail = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const ReproduceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_row) {
  if (!(options.tolerance_scale > 0.0)) fail(ErrorKind::config_error, "tolerance scale must be positive");
  Context ctx{specfun::SeriesAccuracy{}.loosened(options.tolerance_scale), options.out_dir, {}};
  std::vector<CriterionResult> rows;
  for (const auto& spec : kRows) {
    rows.push_back(run_row(spec, ctx));
    if (on_row) on_row(rows.back());
  }
  if (!options.check_determinism) return rows;

  CriterionResult det;
  det.id = 12;
  det.label = "determinism";
  const auto start = std::chrono::steady_clock::now();
  Context rerun{ctx.acc, options.out_dir / "rerun", {}};
  int compared = 0, differing = 0;
  std::string first_diff;
  for (std::size_t i = 0; i < std::size(kRows); ++i) {
    const auto again = run_row(kRows[i], rerun);
    const auto& before = rows[i].files;
    if (again.files.size() != before.size()) {
      ++differing;
      if (first_diff.empty()) first_diff = "row " + std::to_string(kRows[i].id) + " file count";
      continue;
    }
    for (std::size_t f = 0; f < before.size(); ++f) {
      ++compared;
      if (slurp(before[f]) != slurp(again.files[f])) {
        ++differing;
        if (first_diff.empty()) first_diff = before[f].filename().string();
      }
    }
    det.files.insert(det.files.end(), again.files.begin(), again.files.end());
  }
  det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  det.check_passed = differing == 0 && compared > 0;
  det.detail = std::to_string(compared - differing) + "/" + std::to_string(compared) + " CSV files byte-identical" +
               (first_diff.empty() ? "" : ", first difference: " + first_diff);
  rows.push_back(det);
  if (on_row) on_row(rows.back());
  return rows;
}

std::string format_row(const CriterionResult& row) {
  char head[96];
  std::snprintf(head, sizeof head, "%-4s %2d  %-34s %8.2fs", row.passed() ? "PASS" : "FAIL", row.id,
                row.label.c_str(), row.seconds);
  std::string line = head;
  if (row.budget > 0.0) {
    char b[40];
    std::snprintf(b, sizeof b, " (budget %.0fs%s)", row.budget, row.within_budget() ? "" : ", exceeded");
    line += b;
  }
  return line + "  " + row.detail;
}

std::string format_table(const std::vector<CriterionResult>& rows) {
  std::string out;
  int passed = 0;
  for (const auto& r : rows) {
    out += format_row(r) + "\n";
    if (r.passed()) ++passed;
  }
  out += std::to_string(passed) + "/" + std::to_string(rows.size()) + " criteria passed\n";
  return out;
}

bool all_passed(const std::vector<CriterionResult>& rows) {
  for (const auto& r : rows)
    if (!r.passed()) return false;
  return !rows.empty();
}

}  // namespace fracdecay::app
