#include "fracdecay/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fracdecay/coefficient.hpp"
#include "fracdecay/csv.hpp"
#include "fracdecay/fracode.hpp"
#include "fracdecay/nonlinear.hpp"
#include "fracdecay/spectral.hpp"

namespace fracdecay::app {

int exit_status(decayfit::Verdict verdict) {
  switch (verdict) {
    case decayfit::Verdict::sandwich_ok:
    case decayfit::Verdict::upper_only_ok: return exit_ok;
    case decayfit::Verdict::violated: return exit_violated;
    case decayfit::Verdict::degenerate: return exit_degenerate;
  }
  return exit_numeric;
}

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config_error:
    case ErrorKind::inadmissible_params:
    case ErrorKind::domain_error:
    case ErrorKind::grid_mismatch:
    case ErrorKind::unsupported_regime:
    case ErrorKind::io_error: return exit_config;
    case ErrorKind::degenerate_trace:
    case ErrorKind::ambiguous_fit: return exit_degenerate;
    default: return exit_numeric;
  }
}

specfun::SeriesAccuracy tolerance_profile(const std::string& name) {
  if (name == "strict") return {};
  if (name == "fast") return specfun::SeriesAccuracy{}.loosened(100.0);
  fail(ErrorKind::config_error, "key 'tolerance-profile': expected strict or fast, got '" + name + "'");
}

namespace {

constexpr double pi = std::numbers::pi;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

[[noreturn]] void bad_key(const std::string& key, const std::string& msg) {
  fail(ErrorKind::config_error, "key '" + key + "': " + msg);
}

bool parse_double(const std::string& text, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    return used == text.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

const std::map<std::string, std::vector<std::string>>& key_table() {
  static const std::vector<std::string> geometry = {"geometry", "L", "Lx", "Ly", "bc", "modes", "u0", "T", "t_min",
                                                    "per_decade", "snapshot"};
  static const std::map<std::string, std::vector<std::string>> table = [] {
    std::map<std::string, std::vector<std::string>> t;
    auto with_geometry = [](std::vector<std::string> own) {
      own.insert(own.end(), geometry.begin(), geometry.end());
      return own;
    };
    t["subdiffusion"] = with_geometry({"alpha", "beta", "coefficient", "kappa", "steps", "grading"});
    t["heat"] = with_geometry({"coefficient", "kappa", "beta", "p", "q", "coeffs", "window"});
    t["ode"] = {"alpha", "beta", "delta", "nu", "h0", "T", "steps", "grading"};
    t["nonlinear"] = {"operator", "p",      "m",         "q",      "gamma", "b",     "c0",   "c1",
                      "alpha",    "beta",   "kappa",     "source", "mu",    "source_p", "u0_preset", "amplitude",
                      "L",        "points", "T",         "steps",  "grading", "snapshot"};
    const std::vector<std::string> preset = {"alpha", "beta",      "L",  "points", "T", "steps",
                                             "grading", "amplitude", "mu", "m",      "p"};
    t["fisher_kpp"] = preset;
    t["semilinear_pme"] = preset;
    t["toy_model"] = preset;
    return t;
  }();
  return table;
}

/// Typed access to a scenario parameter map; every read names its key on error.
class Params {
 public:
  Params(const std::string& scenario, const ParamMap& map) : map_(map) {
    const auto& keys = scenario_keys(scenario);
    for (const auto& [k, v] : map)
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        bad_key(k, "unknown for scenario '" + scenario + "'");
  }

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  double number(const std::string& key, double def) const {
    const auto it = map_.find(key);
    if (it == map_.end()) return def;
    double v = 0.0;
    if (!parse_double(it->second, v)) bad_key(key, "expected a number, got '" + it->second + "'");
    return v;
  }

  int integer(const std::string& key, int def) const {
    const double v = number(key, def);
    if (v != std::floor(v) || std::fabs(v) > 1e9) bad_key(key, "expected an integer");
    return static_cast<int>(v);
  }

  std::string word(const std::string& key, const std::string& def) const {
    const auto it = map_.find(key);
    return it == map_.end() ? def : it->second;
  }

  std::vector<double> list(const std::string& key, const std::vector<double>& def) const {
    const auto it = map_.find(key);
    if (it == map_.end()) return def;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) {
      double v = 0.0;
      if (!parse_double(item, v)) bad_key(key, "expected a comma-separated list of numbers");
      out.push_back(v);
    }
    if (out.empty()) bad_key(key, "list is empty");
    return out;
  }

 private:
  const ParamMap& map_;
};

double fractional_order(const Params& p, bool allow_one = true) {
  const double alpha = p.number("alpha", 0.5);
  if (!(alpha > 0.0 && (allow_one ? alpha <= 1.0 : alpha < 1.0)))
    bad_key("alpha", allow_one ? "must lie in (0,1]" : "must lie in (0,1)");
  return alpha;
}

double hypothesis_beta(const Params& p, double alpha) {
  const double beta = p.number("beta", 0.5);
  if (!(beta > -alpha)) bad_key("beta", "hypothesis (H) requires beta > -alpha");
  return beta;
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) bad_key(key, msg);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) { return seed * 0x9E3779B97F4A7C15ull + stream; }

/// Uniform on [-1, 1] from raw engine output, identical across standard libraries.
double symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

// ---------------------------------------------------------------- spectral

struct SpectralSetup {
  spectral::EigenSystem sys;
  std::vector<double> u0k;
  std::vector<double> times;
  int snapshot = 0;
};

SpectralSetup spectral_setup(const Params& p, std::uint64_t seed) {
  const std::string geometry = p.word("geometry", "interval");
  const std::string bc_name = p.word("bc", "dirichlet");
  spectral::Boundary bc = spectral::Boundary::dirichlet;
  if (bc_name == "neumann") bc = spectral::Boundary::neumann;
  else if (bc_name != "dirichlet") bad_key("bc", "expected dirichlet or neumann");
  const int modes = p.integer("modes", 64);
  require(modes >= 1 && modes <= 4096, "modes", "must lie in [1, 4096]");
  const double t_end = p.number("T", 1000.0);
  const double t_min = p.number("t_min", 1e-2);
  require(t_min > 0.0, "t_min", "must be positive");
  require(t_end > t_min, "T", "must exceed t_min");
  const int per_decade = p.integer("per_decade", 40);
  require(per_decade >= 1 && per_decade <= 10000, "per_decade", "must lie in [1, 10000]");
  const int snapshot = p.integer("snapshot", 0);
  require(snapshot == 0 || (snapshot >= 2 && snapshot <= 2001), "snapshot", "must be 0 or lie in [2, 2001]");

  std::optional<spectral::EigenSystem> sys;
  if (geometry == "interval") {
    const double length = p.number("L", pi);
    require(length > 0.0, "L", "must be positive");
    sys = spectral::EigenSystem::interval(length, bc, modes);
  } else if (geometry == "rectangle") {
    const double lx = p.number("Lx", pi);
    const double ly = p.number("Ly", pi);
    require(lx > 0.0, "Lx", "must be positive");
    require(ly > 0.0, "Ly", "must be positive");
    sys = spectral::EigenSystem::rectangle(lx, ly, bc, modes);
  } else {
    bad_key("geometry", "expected interval or rectangle");
  }

  const double lx = sys->length_x();
  const double ly = sys->length_y();
  const bool two_d = sys->dimension() == 2;
  const auto bump = [&](spectral::Point q) { return q.x * (lx - q.x) * (two_d ? q.y * (ly - q.y) : 1.0); };
  const std::string u0 = p.word("u0", "first_mode");
  std::vector<double> coeffs(sys->size(), 0.0);
  auto project = [&](const std::function<double(spectral::Point)>& f) {
    try {
      return spectral::project_initial_data(*sys, f).coefficients;
    } catch (const Error& e) {
      bad_key("u0", e.message());
    }
  };
  if (u0 == "first_mode") {
    coeffs[0] = 1.0;
  } else if (u0 == "second_mode") {
    require(sys->size() >= 2, "u0", "second_mode needs at least two modes");
    coeffs[1] = 1.0;
  } else if (u0 == "zero") {
  } else if (u0 == "constant") {
    coeffs = project([](spectral::Point) { return 1.0; });
  } else if (u0 == "parabola") {
    coeffs = project(bump);
  } else if (u0 == "mixed") {
    coeffs = project([&](spectral::Point q) { return bump(q) * (1.0 + 0.5 * std::sin(5.0 * pi * q.x / lx)); });
  } else if (u0 == "one_plus_second") {
    require(sys->size() >= 2, "u0", "one_plus_second needs at least two modes");
    const auto& s = *sys;
    coeffs = project([&s](spectral::Point q) { return 1.0 + s.eigenfunction(1, q); });
  } else if (u0 == "random") {
    std::mt19937_64 rng(mix_seed(seed, 1));
    const int active = std::min(16, sys->size());
    for (int k = 0; k < active; ++k) coeffs[k] = symmetric_uniform(rng) / ((k + 1.0) * (k + 1.0));
  } else {
    std::vector<double> given;
    for (const auto& item : split_list(u0)) {
      double v = 0.0;
      if (!parse_double(item, v)) bad_key("u0", "expected a preset name or a list of modal coefficients");
      given.push_back(v);
    }
    require(!given.empty() && static_cast<int>(given.size()) <= sys->size(), "u0",
            "coefficient list must have between 1 and modes entries");
    std::copy(given.begin(), given.end(), coeffs.begin());
  }
  return SpectralSetup{*sys, coeffs, decayfit::log_times(t_min, t_end, per_decade, true), snapshot};
}

std::vector<spectral::Point> snapshot_points(const spectral::EigenSystem& sys, int n) {
  std::vector<spectral::Point> pts;
  if (sys.dimension() == 1) {
    for (int i = 0; i < n; ++i) pts.push_back({sys.length_x() * i / (n - 1), 0.0});
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) pts.push_back({sys.length_x() * i / (n - 1), sys.length_y() * j / (n - 1)});
  }
  return pts;
}

Artifact spectral_snapshot(const spectral::EigenSystem& sys, const SolutionTrace& trace, int n) {
  const auto pts = snapshot_points(sys, n);
  const auto first = spectral::reconstruct(sys, trace.modal.front(), pts);
  const auto last = spectral::reconstruct(sys, trace.modal.back(), pts);
  csv::Table table;
  std::vector<double> xs, ys;
  for (const auto& q : pts) {
    xs.push_back(q.x);
    ys.push_back(q.y);
  }
  table.header = {"x"};
  table.columns = {xs};
  if (sys.dimension() == 2) {
    table.header.push_back("y");
    table.columns.push_back(ys);
  }
  table.header.insert(table.header.end(), {"u_initial", "u_final"});
  table.columns.push_back(first);
  table.columns.push_back(last);
  return {"snapshot.csv", csv::format(table)};
}

std::vector<double> envelope_curve(const std::vector<double>& t, double constant, double scale, double s,
                                   double offset = 0.0) {
  std::vector<double> out(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) out[j] = offset + constant / (1.0 + scale * std::pow(t[j], s));
  return out;
}

std::function<ScenarioOutput()> prepare_subdiffusion(const Params& p, const RunSettings& settings) {
  const double alpha = fractional_order(p);
  const double beta = hypothesis_beta(p, alpha);
  const std::string coeff_kind = p.word("coefficient", "power");
  require(coeff_kind == "power" || coeff_kind == "power_sin", "coefficient", "expected power or power_sin");
  const double kappa = p.number("kappa", 1.0);
  require(kappa > 0.0, "kappa", "must be positive");
  const int steps = p.integer("steps", 2048);
  require(steps >= 1 && steps <= 200000, "steps", "must lie in [1, 200000]");
  const double grading = p.number("grading", 0.0);
  require(grading == 0.0 || grading >= 1.0, "grading", "must be 0 (default) or at least 1");
  auto setup = spectral_setup(p, settings.seed);
  const auto acc = settings.accuracy;

  return [=]() {
    ScenarioOutput out;
    const auto& sys = setup.sys;
    const double s = alpha + beta;
    SolutionTrace trace;
    decayfit::DecayReport report;
    std::vector<double> lower, upper;
    if (coeff_kind == "power") {
      trace = spectral::solve_subdiffusion(sys, alpha, beta, setup.u0k, setup.times, acc);
      if (sys.boundary() == spectral::Boundary::dirichlet) {
        report = spectral::verify_dirichlet_sandwich(trace, sys, alpha, beta);
        lower = envelope_curve(trace.times, report.lower_constant, report.envelope_scale, s);
        upper = envelope_curve(trace.times, report.upper_constant, report.envelope_scale, s);
      } else {
        const double u00 = setup.u0k[0];
        const double u01 = sys.size() > 1 ? setup.u0k[1] : 0.0;
        report = spectral::verify_neumann(trace, sys, alpha, beta, u00, u01);
        if (report.two_sided) {
          lower = envelope_curve(trace.times, report.lower_constant, report.envelope_scale, s);
          upper = envelope_curve(trace.times, report.upper_constant, report.envelope_scale, s);
        } else {
          lower.assign(trace.times.size(), std::fabs(u00));
          upper = envelope_curve(trace.times, report.upper_constant, report.envelope_scale, s, std::fabs(u00));
        }
      }
    } else {
      const double g = grading > 0.0 ? grading : TimeGrid::default_grading(alpha);
      const auto grid = TimeGrid::graded(setup.times.back(), steps, g);
      const auto a = Coefficient::function([beta](double t) { return std::pow(t, beta) * (2.0 + std::sin(t)); },
                                           "t^beta (2 + sin t)");
      trace = spectral::solve_subdiffusion_l1(sys, alpha, a, setup.u0k, grid);
      report = spectral::verify_general_coefficient_upper(trace, alpha, kappa, beta, acc);
      lower.assign(trace.times.size(), 0.0);
      upper = envelope_curve(trace.times, report.upper_constant, report.envelope_scale, s);
    }
    csv::Table table{{"t", "E", "bound_lower", "bound_upper"}, {trace.times, trace.energy, lower, upper}};
    out.artifacts.push_back({"trace.csv", csv::format(table)});
    if (setup.snapshot > 0) out.artifacts.push_back(spectral_snapshot(sys, trace, setup.snapshot));
    out.summary = report.summary();
    out.report = report.details();
    out.status = exit_status(report.verdict);
    return out;
  };
}

std::function<ScenarioOutput()> prepare_heat(const Params& p, const RunSettings& settings) {
  const std::string kind = p.word("coefficient", "power");
  std::optional<Coefficient> coeff;
  if (kind == "power") {
    const double kappa = p.number("kappa", 1.0);
    const double beta = p.number("beta", 0.0);
    require(kappa > 0.0, "kappa", "must be positive");
    require(beta > -1.0, "beta", "the primitive of t^beta needs beta > -1");
    coeff = Coefficient::power(kappa, beta);
  } else if (kind == "exponential") {
    const double beta = p.number("beta", 1.0);
    require(beta > 0.0, "beta", "must be positive");
    coeff = Coefficient::exponential_rate(beta);
  } else if (kind == "logarithmic") {
    const double pp = p.number("p", 1.0);
    require(pp > 0.0, "p", "must be positive");
    coeff = Coefficient::logarithmic(pp);
  } else if (kind == "polynomial") {
    const double q = p.number("q", 1.0);
    require(q > 0.0, "q", "must be positive");
    const auto coeffs = p.list("coeffs", {1.0, 1.0});
    try {
      coeff = Coefficient::polynomial(q, coeffs);
    } catch (const Error& e) {
      bad_key("coeffs", e.message());
    }
  } else {
    bad_key("coefficient", "expected power, exponential, logarithmic or polynomial");
  }
  const double window = p.number("window", 0.0);
  require(window >= 0.0, "window", "must be nonnegative");
  auto setup = spectral_setup(p, settings.seed);

  return [=]() {
    ScenarioOutput out;
    const auto& sys = setup.sys;
    const auto trace = spectral::solve_heat_general(sys, *coeff, setup.u0k, setup.times);
    double level_sq = 0.0, decaying_sq = 0.0;
    double lambda_low = -1.0, lead = 0.0;
    for (int k = 0; k < sys.size(); ++k) {
      const double c = setup.u0k[k];
      const double lam = sys.eigenvalue(k);
      if (lam <= 0.0) {
        level_sq += c * c;
      } else if (c != 0.0) {
        decaying_sq += c * c;
        if (lambda_low < 0.0) {
          lambda_low = lam;
          lead = c * c;
        }
      }
    }
    std::vector<double> lower(trace.times.size()), upper(trace.times.size());
    bool inside = true;
    for (std::size_t j = 0; j < trace.times.size(); ++j) {
      const double decay = lambda_low > 0.0 ? std::exp(-2.0 * lambda_low * coeff->primitive(trace.times[j])) : 0.0;
      lower[j] = std::sqrt(level_sq + lead * decay);
      upper[j] = std::sqrt(level_sq + decaying_sq * decay);
      const double e = trace.energy[j];
      if (e < lower[j] * (1.0 - 1e-9) - 1e-300 || e > upper[j] * (1.0 + 1e-9) + 1e-300) inside = false;
    }
    csv::Table table{{"t", "E", "bound_lower", "bound_upper"}, {trace.times, trace.energy, lower, upper}};
    out.artifacts.push_back({"trace.csv", csv::format(table)});
    if (setup.snapshot > 0) out.artifacts.push_back(spectral_snapshot(sys, trace, setup.snapshot));

    std::ostringstream rep;
    rep << "coefficient: " << coeff->describe() << "\n";
    rep << "bounds: " << (inside ? "hold" : "violated") << "\n";
    std::string model = "none";
    try {
      const auto sel = decayfit::fit_model_select(trace.times, trace.energy, window);
      model = decayfit::to_string(sel.best.kind);
      rep << "model: " << model << " margin " << fmt(sel.margin) << "\n";
      for (const auto& c : sel.candidates)
        rep << "candidate: " << decayfit::to_string(c.kind) << " scale=" << fmt(c.scale)
            << " parameter=" << fmt(c.parameter) << " power=" << fmt(c.power) << " rms=" << fmt(c.residual_rms)
            << "\n";
    } catch (const Error& e) {
      rep << "model: undetermined (" << e.what() << ")\n";
    }
    out.report = rep.str();
    out.summary = std::string("verdict=") + (inside ? "bounds_ok" : "violated") + " model=" + model;
    out.status = inside ? exit_ok : exit_violated;
    return out;
  };
}

// ---------------------------------------------------------------- ode

std::function<ScenarioOutput()> prepare_ode(const Params& p, const RunSettings&) {
  const double alpha = fractional_order(p, false);
  const double beta = hypothesis_beta(p, alpha);
  fracode::SemilinearParams sp;
  sp.beta = beta;
  sp.delta = p.number("delta", 2.0);
  sp.nu = p.number("nu", 1.0);
  sp.h0 = p.number("h0", 1.0);
  require(sp.delta > 0.0, "delta", "must be positive");
  require(sp.nu > 0.0, "nu", "must be positive");
  require(sp.h0 > 0.0, "h0", "must be positive");
  const double t_end = p.number("T", 100.0);
  require(t_end > 0.0, "T", "must be positive");
  const int steps = p.integer("steps", 2048);
  require(steps >= 1 && steps <= 200000, "steps", "must lie in [1, 200000]");
  const double grading = p.number("grading", 0.0);
  require(grading == 0.0 || grading >= 1.0, "grading", "must be 0 (default) or at least 1");

  return [=]() {
    ScenarioOutput out;
    const auto grid = TimeGrid::graded(t_end, steps, grading > 0.0 ? grading : TimeGrid::default_grading(alpha));
    const auto trace = fracode::solve_semilinear(sp, alpha, grid);
    const auto env = fracode::semilinear_envelope(sp, alpha);
    const auto fit = fracode::fit_envelope(trace, env);
    std::vector<double> sub(trace.times.size()), sup(trace.times.size());
    for (std::size_t j = 0; j < trace.times.size(); ++j) {
      sub[j] = fit.c_sub * env.sub(trace.times[j]);
      sup[j] = fit.c_super * env.super(trace.times[j]);
    }
    csv::Table table{{"t", "H", "sub_envelope", "super_envelope"}, {trace.times, trace.values, sub, sup}};
    out.artifacts.push_back({"trace.csv", csv::format(table)});

    std::ostringstream rep;
    rep << "envelope_exponent: " << fmt(env.exponent()) << "\n";
    rep << "c_sub: " << fmt(fit.c_sub) << "\nc_super: " << fmt(fit.c_super) << "\n";
    rep << "decay_constants: " << fmt(fit.decay.c1) << " " << fmt(fit.decay.c2) << "\n";
    std::string tail = "n/a";
    try {
      const auto rs = decayfit::resample_log(trace.times, trace.values, std::max(1e-2, trace.times[1]));
      const auto pf = decayfit::fit_power_tail(rs.t, rs.e);
      tail = fmt(pf.exponent);
      rep << "fitted_exponent: " << tail << " window [" << fmt(pf.t_lo) << ", " << fmt(pf.t_hi) << "]\n";
    } catch (const Error& e) {
      rep << "fitted_exponent: n/a (" << e.what() << ")\n";
    }
    rep << "holds: " << (fit.holds ? "true" : "false") << "\n";
    out.report = rep.str();
    out.summary = std::string("verdict=") + (fit.holds ? "sandwich_ok" : "violated") + " fitted_exponent=" + tail +
                  " predicted_exponent=" + fmt(env.exponent());
    out.status = fit.holds ? exit_ok : exit_violated;
    return out;
  };
}

// ---------------------------------------------------------------- nonlinear

ScenarioOutput nonlinear_output(const SolutionTrace& trace, const decayfit::DecayReport& report,
                                const std::string& extra, bool snapshot, const nonlinear::SpatialGrid1D& space) {
  ScenarioOutput out;
  const auto bound = envelope_curve(trace.times, report.upper_constant, report.envelope_scale,
                                    report.envelope_exponent);
  csv::Table table{{"t", "E", "predicted_bound"}, {trace.times, trace.energy, bound}};
  out.artifacts.push_back({"trace.csv", csv::format(table)});
  if (snapshot && !trace.fields.empty()) {
    std::vector<double> xs;
    for (int i = 0; i < space.interior; ++i) xs.push_back(space.x(i));
    csv::Table snap{{"x", "u_initial", "u_final"}, {xs, trace.fields.front(), trace.fields.back()}};
    out.artifacts.push_back({"snapshot.csv", csv::format(snap)});
  }
  out.summary = report.summary();
  out.report = report.details() + extra;
  out.status = exit_status(report.verdict);
  return out;
}

std::function<ScenarioOutput()> prepare_nonlinear(const Params& p, const RunSettings& settings) {
  const double alpha = fractional_order(p);
  const double beta = hypothesis_beta(p, alpha);
  const double kappa = p.number("kappa", 1.0);
  require(kappa > 0.0, "kappa", "must be positive");
  const std::string name = p.word("operator", "laplace");
  nonlinear::OperatorSpec spec = nonlinear::op::Laplace{};
  if (name == "laplace") {
  } else if (name == "p_laplace") {
    spec = nonlinear::op::PLaplace{p.number("p", 2.0)};
  } else if (name == "porous_medium") {
    spec = nonlinear::op::PorousMedium{p.number("m", 1.0), p.number("c0", 1.0), {}};
  } else if (name == "degenerate") {
    spec = nonlinear::op::Degenerate{p.number("q", 1.0), p.number("c1", 1.0), {}};
  } else if (name == "mean_curvature") {
    spec = nonlinear::op::MeanCurvature{};
  } else if (name == "kirchhoff") {
    spec = nonlinear::op::Kirchhoff{p.number("gamma", 1.0), p.number("b", 1.0), p.number("p", 2.0),
                                    p.number("q", 2.0), {}};
  } else {
    bad_key("operator", "expected laplace, p_laplace, porous_medium, degenerate, mean_curvature or kirchhoff");
  }
  try {
    nonlinear::validate_operator(spec);
  } catch (const Error& e) {
    bad_key("operator", e.message());
  }

  const std::string source_name = p.word("source", "none");
  nonlinear::SourceSpec source;
  if (source_name == "fisher_kpp") {
    source = nonlinear::SourceSpec::fisher_kpp();
  } else if (source_name == "absorption") {
    const double mu = p.number("mu", 1.0);
    const double sp = p.number("source_p", 2.0);
    require(mu >= 0.0, "mu", "must be nonnegative");
    require(sp > 1.0, "source_p", "must exceed 1");
    source = nonlinear::SourceSpec::power_absorption(mu, sp);
  } else if (source_name != "none") {
    bad_key("source", "expected none, fisher_kpp or absorption");
  }

  const nonlinear::SpatialGrid1D space{p.number("L", pi), p.integer("points", 255)};
  require(space.length > 0.0, "L", "must be positive");
  require(space.interior >= 3 && space.interior <= 100000, "points", "must lie in [3, 100000]");
  const double t_end = p.number("T", 100.0);
  require(t_end > 0.0, "T", "must be positive");
  const int steps = p.integer("steps", 2048);
  require(steps >= 1 && steps <= 200000, "steps", "must lie in [1, 200000]");
  const double grading = p.number("grading", 0.0);
  require(grading == 0.0 || grading >= 1.0, "grading", "must be 0 (default) or at least 1");
  const double amplitude = p.number("amplitude", 1.0);
  require(amplitude > 0.0, "amplitude", "must be positive");
  const int snapshot = p.integer("snapshot", 0);
  require(snapshot == 0 || snapshot == 1, "snapshot", "must be 0 or 1");

  const std::string preset = p.word("u0_preset", "sine");
  std::vector<double> u0(space.interior);
  const double k1 = pi / space.length;
  if (preset == "sine") {
    for (int i = 0; i < space.interior; ++i) u0[i] = amplitude * std::sin(k1 * space.x(i));
  } else if (preset == "bump") {
    for (int i = 0; i < space.interior; ++i) {
      const double r = (space.x(i) - 0.5 * space.length) / (0.25 * space.length);
      u0[i] = std::fabs(r) < 1.0 ? amplitude * (1.0 - r * r) * (1.0 - r * r) : 0.0;
    }
  } else if (preset == "two_mode") {
    for (int i = 0; i < space.interior; ++i)
      u0[i] = amplitude * (std::sin(k1 * space.x(i)) + 0.5 * std::sin(2.0 * k1 * space.x(i)));
  } else if (preset == "random") {
    std::mt19937_64 rng(mix_seed(settings.seed, 2));
    std::vector<double> c(8);
    for (int k = 0; k < 8; ++k) c[k] = symmetric_uniform(rng) / ((k + 1.0) * (k + 1.0));
    c[0] = 1.0;
    double peak = 0.0;
    for (int i = 0; i < space.interior; ++i) {
      double v = 0.0;
      for (int k = 0; k < 8; ++k) v += c[k] * std::sin((k + 1) * k1 * space.x(i));
      u0[i] = v;
      peak = std::max(peak, std::fabs(v));
    }
    for (double& v : u0) v *= amplitude / peak;
  } else {
    bad_key("u0_preset", "expected sine, bump, two_mode or random");
  }
  if (source.kind == nonlinear::SourceSpec::Kind::fisher_kpp) {
    for (double v : u0)
      if (!(v > 0.0 && v <= 1.0)) bad_key("u0_preset", "Fisher-KPP needs 0 < u0 <= 1 at every interior node");
  }

  const bool laplace = std::holds_alternative<nonlinear::op::Laplace>(spec);
  return [=]() {
    const auto time = TimeGrid::graded(t_end, steps, grading > 0.0 ? grading : TimeGrid::default_grading(alpha));
    const auto trace = nonlinear::solve_nonlinear(spec, source, alpha, Coefficient::power(kappa, beta), u0, space, time);
    const auto predicted = nonlinear::predict_exponent(spec, alpha, beta);
    auto report = nonlinear::nonlinear_report(trace, predicted, laplace ? kappa * k1 * k1 : 1.0);
    const auto energy = nonlinear::check_energy_inequality(trace, alpha);
    std::ostringstream extra;
    extra << "operator: " << nonlinear::operator_name(spec) << "\n";
    extra << "energy_inequality_margin: " << fmt(energy.min_margin) << "\n";
    extra << "max_sweeps_used: " << trace.max_sweeps_used << "\n";
    if (energy.min_margin < -1e-8) {
      report.verdict = decayfit::Verdict::violated;
      extra << "note: discrete energy inequality violated\n";
    }
    return nonlinear_output(trace, report, extra.str(), snapshot == 1, space);
  };
}

std::function<ScenarioOutput()> prepare_preset(const std::string& name, const Params& p) {
  nonlinear::ScenarioParams sp;
  sp.alpha = fractional_order(p);
  sp.beta = hypothesis_beta(p, sp.alpha);
  sp.length = p.number("L", sp.length);
  sp.points = p.integer("points", sp.points);
  // The two-sided toy check needs the tail past the pre-asymptotic drift of E(1+t) on [1, 100].
  sp.horizon = p.number("T", name == "toy_model" ? 1000.0 : sp.horizon);
  sp.steps = p.integer("steps", sp.steps);
  sp.grading = p.number("grading", 0.0);
  sp.amplitude = p.number("amplitude", sp.amplitude);
  sp.mu = p.number("mu", sp.mu);
  sp.m = p.number("m", sp.m);
  sp.p = p.number("p", sp.p);
  require(sp.length > 0.0, "L", "must be positive");
  require(sp.points >= 3 && sp.points <= 100000, "points", "must lie in [3, 100000]");
  require(sp.horizon > 0.0, "T", "must be positive");
  require(sp.steps >= 1 && sp.steps <= 200000, "steps", "must lie in [1, 200000]");
  require(sp.grading == 0.0 || sp.grading >= 1.0, "grading", "must be 0 (default) or at least 1");
  require(sp.amplitude > 0.0, "amplitude", "must be positive");
  if (name == "fisher_kpp") require(sp.amplitude <= 1.0, "amplitude", "Fisher-KPP needs 0 < u0 <= 1");
  if (name == "semilinear_pme") {
    require(sp.m >= 0.0, "m", "must be nonnegative");
    require(sp.p > 1.0, "p", "must exceed 1");
    require(sp.mu >= 0.0, "mu", "must be nonnegative");
  }

  return [=]() {
    auto result = nonlinear::run_scenario(name, sp);
    const nonlinear::SpatialGrid1D space{sp.length, sp.points};
    const auto energy = nonlinear::check_energy_inequality(result.trace, sp.alpha);
    std::ostringstream extra;
    extra << "scenario: " << name << "\n";
    extra << "state_range: [" << fmt(result.min_value) << ", " << fmt(result.max_value) << "]\n";
    extra << "order_preserved: " << (result.order_preserved ? "true" : "false") << "\n";
    extra << "energy_inequality_margin: " << fmt(energy.min_margin) << "\n";
    if (!result.order_preserved) result.report.verdict = decayfit::Verdict::violated;
    if (energy.min_margin < -1e-8) {
      result.report.verdict = decayfit::Verdict::violated;
      extra << "note: discrete energy inequality violated\n";
    }
    return nonlinear_output(result.trace, result.report, extra.str(), false, space);
  };
}

const std::set<std::string>& list_keys() {
  static const std::set<std::string> keys = {"u0", "coeffs"};
  return keys;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"subdiffusion", "heat",           "ode",      "nonlinear",
                                                 "fisher_kpp",   "semilinear_pme", "toy_model"};
  return names;
}

const std::vector<std::string>& scenario_keys(const std::string& scenario) {
  const auto& table = key_table();
  const auto it = table.find(scenario);
  if (it == table.end()) bad_key("scenario", "unknown scenario '" + scenario + "'");
  return it->second;
}

std::function<ScenarioOutput()> prepare_scenario(const std::string& scenario, const ParamMap& params,
                                                 const RunSettings& settings) {
  const Params p(scenario, params);
  if (scenario == "subdiffusion") return prepare_subdiffusion(p, settings);
  if (scenario == "heat") return prepare_heat(p, settings);
  if (scenario == "ode") return prepare_ode(p, settings);
  if (scenario == "nonlinear") return prepare_nonlinear(p, settings);
  return prepare_preset(scenario, p);
}

ScenarioOutput run_scenario(const std::string& scenario, const ParamMap& params, const RunSettings& settings) {
  return prepare_scenario(scenario, params, settings)();
}

// ---------------------------------------------------------------- experiment files

namespace {

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }) && name != "." && name != "..";
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used == value.size() && value.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  bad_key(key, "expected a nonnegative integer");
}

void expand_grid(const ExperimentConfig& base, std::vector<ExperimentConfig>& out) {
  const auto& keys = scenario_keys(base.scenario);
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [k, v] : base.params) {
    if (list_keys().count(k) || std::find(keys.begin(), keys.end(), k) == keys.end()) continue;
    if (v.find(',') == std::string::npos) continue;
    auto values = split_list(v);
    for (const auto& item : values)
      if (item.empty()) bad_key(k, "empty entry in parameter grid");
    axes.emplace_back(k, std::move(values));
  }
  if (axes.empty()) {
    out.push_back(base);
    return;
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.second.size();
  if (total > 10000) bad_key(axes.front().first, "parameter grid exceeds 10000 runs");
  for (std::size_t idx = 0; idx < total; ++idx) {
    ExperimentConfig cfg = base;
    std::size_t rest = idx;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      cfg.params[it->first] = it->second[rest % it->second.size()];
      rest /= it->second.size();
    }
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%03zu", idx);
    cfg.name = base.name + suffix;
    cfg.output_dir = base.output_dir.parent_path() / cfg.name;
    out.push_back(std::move(cfg));
  }
}

}  // namespace

ExperimentFile parse_experiment_text(const std::string& text, const std::filesystem::path& default_out,
                                     std::uint64_t default_seed) {
  ExperimentFile file;
  struct Section {
    std::string name;
    ParamMap params;
    std::optional<std::uint64_t> seed;
    int line = 0;
  };
  std::vector<Section> sections;
  std::set<std::string> global_seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::config_error, "malformed section header" + where);
      std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.rfind("experiment", 0) == 0) inner = trim(inner.substr(10));
      if (!valid_name(inner)) fail(ErrorKind::config_error, "invalid experiment name '" + inner + "'" + where);
      for (const auto& s : sections)
        if (s.name == inner) fail(ErrorKind::config_error, "duplicate experiment name '" + inner + "'" + where);
      sections.push_back({inner, {}, std::nullopt, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config_error, "expected key = value" + where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorKind::config_error, "empty key" + where);
    if (sections.empty()) {
      if (!global_seen.insert(key).second) bad_key(key, "given twice" + where);
      if (key == "out") {
        if (value.empty()) bad_key(key, "must not be empty");
        file.out = value;
      } else if (key == "seed") {
        file.seed = parse_seed(key, value);
      } else if (key == "jobs") {
        double v = 0.0;
        if (!parse_double(value, v) || v != std::floor(v) || v < 1 || v > 1024)
          bad_key(key, "expected an integer in [1, 1024]");
        file.jobs = static_cast<int>(v);
      } else {
        bad_key(key, "unknown global key" + where);
      }
      continue;
    }
    auto& sec = sections.back();
    if (key == "seed") {
      if (sec.seed) bad_key(key, "given twice" + where);
      sec.seed = parse_seed(key, value);
      continue;
    }
    if (!sec.params.emplace(key, value).second) bad_key(key, "given twice" + where);
  }

  const auto out_dir = file.out.value_or(default_out);
  const auto seed = file.seed.value_or(default_seed);
  for (auto& sec : sections) {
    const auto it = sec.params.find("scenario");
    if (it == sec.params.end()) bad_key("scenario", "missing in experiment '" + sec.name + "'");
    ExperimentConfig cfg;
    cfg.name = sec.name;
    cfg.scenario = it->second;
    sec.params.erase(it);
    cfg.params = std::move(sec.params);
    cfg.output_dir = out_dir / sec.name;
    cfg.seed = sec.seed.value_or(seed);
    scenario_keys(cfg.scenario);
    expand_grid(cfg, file.experiments);
  }
  return file;
}

ExperimentFile load_experiment_file(const std::filesystem::path& path, const std::filesystem::path& default_out,
                                    std::uint64_t default_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config_error, "cannot read experiment file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_text(ss.str(), default_out, default_seed);
}

namespace {

ExperimentResult execute(const ExperimentConfig& config, const std::function<ScenarioOutput()>& solve) {
  ExperimentResult result;
  result.name = config.name;
  ScenarioOutput out;
  try {
    out = solve();
  } catch (const Error& e) {
    result.status = exit_status(e.kind());
    result.summary = e.what();
    return result;
  } catch (const std::exception& e) {
    result.status = exit_numeric;
    result.summary = e.what();
    return result;
  }

  std::ostringstream rep;
  rep << "experiment: " << config.name << "\n";
  rep << "scenario: " << config.scenario << "\n";
  rep << "seed: " << config.seed << "\n";
  for (const auto& [k, v] : config.params) rep << "param: " << k << " = " << v << "\n";
  rep << "summary: " << out.summary << "\n\n" << out.report;
  out.artifacts.push_back({"report.txt", rep.str()});

  const bool existed = std::filesystem::exists(config.output_dir);
  try {
    for (const auto& a : out.artifacts) {
      const auto path = config.output_dir / a.file;
      csv::write_atomic(path, a.content);
      result.files.push_back(path);
    }
  } catch (const Error& e) {
    std::error_code ec;
    for (const auto& f : result.files) std::filesystem::remove(f, ec);
    if (!existed) std::filesystem::remove(config.output_dir, ec);
    result.files.clear();
    result.status = exit_status(e.kind());
    result.summary = e.what();
    return result;
  }
  result.status = out.status;
  result.summary = out.summary;
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunSettings& settings) {
  RunSettings local = settings;
  local.seed = config.seed;
  return execute(config, prepare_scenario(config.scenario, config.params, local));
}

std::vector<ExperimentResult> run_experiments(const std::vector<ExperimentConfig>& configs,
                                              const specfun::SeriesAccuracy& accuracy, int jobs) {
  std::vector<std::function<ScenarioOutput()>> solves;
  for (const auto& cfg : configs) {
    try {
      solves.push_back(prepare_scenario(cfg.scenario, cfg.params, RunSettings{accuracy, cfg.seed}));
    } catch (const Error& e) {
      fail(e.kind(), "experiment '" + cfg.name + "': " + e.message());
    }
  }
  std::vector<ExperimentResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) results[i] = execute(configs[i], solves[i]);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

int combined_status(const std::vector<ExperimentResult>& results) {
  int status = exit_ok;
  for (const auto& r : results) status = std::max(status, r.status);
  return status;
}

}  // namespace fracdecay::app
