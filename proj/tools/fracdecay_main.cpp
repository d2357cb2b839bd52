#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fracdecay/csv.hpp"
#include "fracdecay/decayfit.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/experiment.hpp"
#include "fracdecay/reproduce.hpp"
#include "fracdecay/specfun.hpp"

using namespace fracdecay;

namespace {

struct Globals {
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string profile = "strict";
};

std::string flag_name(const std::string& key) {
  std::string name = key;
  for (char& c : name)
    if (c == '_') c = '-';
  return "--" + name;
}

/// One `solve`-style subcommand bound to a scenario's keys.
struct ScenarioCommand {
  std::string scenario;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* cmd) {
    for (const auto& key : app::scenario_keys(scenario))
      options[key] = cmd->add_option(flag_name(key), values[key], key);
  }

  app::ParamMap params() const {
    app::ParamMap map;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) map[key] = values.at(key);
    return map;
  }
};

int run_scenario_command(const ScenarioCommand& cmd, const Globals& g, CLI::Option* out_opt) {
  const app::RunSettings settings{app::tolerance_profile(g.profile), g.seed};
  app::ExperimentConfig cfg;
  cfg.name = cmd.scenario;
  cfg.scenario = cmd.scenario;
  cfg.params = cmd.params();
  cfg.output_dir = out_opt->count() > 0 ? std::filesystem::path(g.out) : std::filesystem::path("results") / cmd.scenario;
  cfg.seed = g.seed;
  const auto result = app::run_experiment(cfg, settings);
  std::cout << result.summary << "\n";
  for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
  return result.status;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int specfun_eval(double alpha, double m, double l, double z, bool verbose, const Globals& g) {
  const auto acc = app::tolerance_profile(g.profile);
  const auto ev = specfun::kilbas_saigo_eval({alpha, m, l}, z, acc);
  std::string lower = "nan", upper = "nan";
  if (alpha > 0.0 && alpha < 1.0 && m > 1.0 && std::fabs(l - (m - 1.0)) <= 1e-12 && z <= 0.0) {
    const auto b = specfun::kilbas_saigo_bounds(alpha, m, -z);
    lower = num(b.lower);
    upper = num(b.upper);
  }
  std::cout << num(ev.value) << "\t" << lower << "\t" << upper << "\n";
  if (verbose)
    std::cerr << "method=" << specfun::to_string(ev.method) << " error_estimate=" << ev.error_estimate
              << " terms=" << ev.terms << "\n";
  return app::exit_ok;
}

struct FitArgs {
  std::string input;
  std::string model = "auto";
  double window = 2.0;
  std::optional<double> exponent;
  bool two_sided = false;
  double scale = 1.0;
  std::string column;
};

int decay_fit(const FitArgs& a) {
  const auto table = csv::read(a.input);
  if (table.columns.size() < 2) fail(ErrorKind::config_error, "key 'input': CSV needs a time and a value column");
  const auto& t = table.columns[0];
  std::string column = a.column;
  if (column.empty()) {
    column = table.header[1];
    for (const char* name : {"E", "H"})
      for (const auto& h : table.header)
        if (h == name) column = name;
  }
  const auto& e = table.column(column);

  const bool auto_model = a.model == "auto";
  if (!auto_model && a.model != "power" && a.model != "exponential" && a.model != "logarithmic" &&
      a.model != "plateau")
    fail(ErrorKind::config_error, "key 'model': expected auto, power, exponential, logarithmic or plateau");

  double s = 0.0;
  bool two_sided = a.two_sided;
  if (a.exponent) {
    s = *a.exponent;
    if (!(s > 0.0)) fail(ErrorKind::config_error, "key 'exponent': must be positive");
  } else {
    s = decayfit::fit_power_tail(t, e, a.window).exponent;
    two_sided = true;
  }
  auto report = decayfit::check_envelope(t, e, s, two_sided, a.scale, a.window);
  std::string model_block;
  try {
    const auto sel = decayfit::fit_model_select(t, e);
    const decayfit::ModelFit* chosen = &sel.best;
    for (const auto& c : sel.candidates)
      if (!auto_model && a.model == decayfit::to_string(c.kind)) chosen = &c;
    char buf[256];
    std::snprintf(buf, sizeof buf, "model: %s scale=%.10g parameter=%.10g power=%.10g rms=%.3e margin=%.3g\n",
                  decayfit::to_string(chosen->kind), chosen->scale, chosen->parameter, chosen->power,
                  chosen->residual_rms, sel.margin);
    model_block = buf;
  } catch (const Error& err) {
    model_block = std::string("model: undetermined (") + err.message() + ")\n";
  }
  std::cout << report.summary() << "\n" << report.details() << model_block;
  return app::exit_status(report.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Decay rates of time-fractional diffusion: special functions, solvers and fitting"};
  cli.require_subcommand(1);
  Globals g;
  auto* out_opt = cli.add_option("--out", g.out, "output directory");
  cli.add_option("--jobs", g.jobs, "concurrent experiments")->check(CLI::Range(1, 1024));
  cli.add_option("--seed", g.seed, "seed for randomized initial data");
  cli.add_option("--tolerance-profile", g.profile, "strict or fast")->check(CLI::IsMember({"strict", "fast"}));

  auto* specfun_cmd = cli.add_subcommand("specfun", "special functions")->require_subcommand(1)->fallthrough();
  auto* eval_cmd = specfun_cmd->add_subcommand("eval", "evaluate E_{alpha,m,l}(z) and its bounds")->fallthrough();
  double alpha = 0.5, m = 2.0, l = 1.0, z = 0.0;
  bool verbose = false;
  eval_cmd->add_option("--alpha", alpha)->required();
  eval_cmd->add_option("--m", m)->required();
  eval_cmd->add_option("--l", l)->required();
  eval_cmd->add_option("--z", z)->required();
  eval_cmd->add_flag("--verbose", verbose, "print the evaluation method to stderr");

  std::map<std::string, ScenarioCommand> scenario_cmds;
  std::map<CLI::App*, std::string> solve_of;
  auto solve_group = [&](const std::string& group, const std::string& sub, const std::string& scenario,
                         const std::string& help) {
    CLI::App* parent = cli.get_subcommand_no_throw(group);
    if (!parent) parent = cli.add_subcommand(group, help)->require_subcommand(1)->fallthrough();
    auto* cmd = parent->add_subcommand(sub, help)->fallthrough();
    scenario_cmds[scenario].scenario = scenario;
    scenario_cmds[scenario].attach(cmd);
    solve_of[cmd] = scenario;
  };
  solve_group("ode", "solve", "ode", "semilinear fractional ODE");
  solve_group("subdiffusion", "solve", "subdiffusion", "eigenfunction expansion of the sub-diffusion equation");
  solve_group("heat", "solve", "heat", "heat equation with a time-dependent coefficient");
  solve_group("nonlinear", "solve", "nonlinear", "finite-difference nonlinear diffusion");
  solve_group("nonlinear", "fisher-kpp", "fisher_kpp", "Fisher-KPP preset");
  solve_group("nonlinear", "semilinear-pme", "semilinear_pme", "porous medium with absorption preset");
  solve_group("nonlinear", "toy-model", "toy_model", "linear toy model preset");

  auto* decay_cmd = cli.add_subcommand("decay", "decay-rate fitting")->require_subcommand(1)->fallthrough();
  auto* fit_cmd = decay_cmd->add_subcommand("fit", "fit and verify the decay of a trace CSV")->fallthrough();
  FitArgs fit;
  double exponent = 0.0;
  fit_cmd->add_option("--input", fit.input)->required();
  fit_cmd->add_option("--model", fit.model, "auto, power, exponential, logarithmic or plateau");
  fit_cmd->add_option("--window", fit.window, "tail window in decades");
  auto* exp_opt = fit_cmd->add_option("--exponent", exponent, "envelope exponent; fitted when omitted");
  fit_cmd->add_flag("--two-sided", fit.two_sided, "require the lower envelope too");
  fit_cmd->add_option("--scale", fit.scale, "envelope scale in 1 + scale t^s");
  fit_cmd->add_option("--column", fit.column, "value column, E or H by default");

  auto* repro_cmd = cli.add_subcommand("reproduce", "run the acceptance matrix")->fallthrough();
  double tolerance_scale = 1.0;
  bool skip_determinism = false;
  repro_cmd->add_option("--tolerance-scale", tolerance_scale, "multiply special-function tolerances");
  repro_cmd->add_flag("--skip-determinism", skip_determinism, "do not rerun the matrix");

  auto* run_cmd = cli.add_subcommand("run", "run an experiment file")->fallthrough();
  std::string experiment_file;
  run_cmd->add_option("file", experiment_file, "key-value experiment file")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::exit_config;
  }

  try {
    if (*eval_cmd) return specfun_eval(alpha, m, l, z, verbose, g);
    for (const auto& [cmd, scenario] : solve_of)
      if (*cmd) return run_scenario_command(scenario_cmds.at(scenario), g, out_opt);
    if (*fit_cmd) {
      if (exp_opt->count() > 0) fit.exponent = exponent;
      return decay_fit(fit);
    }
    if (*repro_cmd) {
      app::ReproduceOptions opts;
      opts.out_dir = out_opt->count() > 0 ? g.out : "reproduce";
      opts.tolerance_scale = tolerance_scale * (g.profile == "fast" ? 100.0 : 1.0);
      opts.check_determinism = !skip_determinism;
      const auto rows = app::run_acceptance(opts, [](const app::CriterionResult& r) {
        std::cout << app::format_row(r) << std::endl;
      });
      int passed = 0;
      for (const auto& r : rows) passed += r.passed() ? 1 : 0;
      std::cout << passed << "/" << rows.size() << " criteria passed\n";
      return app::all_passed(rows) ? app::exit_ok : app::exit_violated;
    }
    if (*run_cmd) {
      auto file = app::load_experiment_file(experiment_file, out_opt->count() > 0 ? g.out : "results", g.seed);
      if (out_opt->count() > 0 || cli.get_option("--seed")->count() > 0) {
        const std::filesystem::path root = out_opt->count() > 0 ? std::filesystem::path(g.out)
                                                                : file.out.value_or("results");
        for (auto& cfg : file.experiments) {
          cfg.output_dir = root / cfg.name;
          if (cli.get_option("--seed")->count() > 0) cfg.seed = g.seed;
        }
      }
      const int jobs = cli.get_option("--jobs")->count() > 0 ? g.jobs : file.jobs.value_or(1);
      const auto results = app::run_experiments(file.experiments, app::tolerance_profile(g.profile), jobs);
      for (const auto& r : results) std::cout << r.name << "\t" << r.status << "\t" << r.summary << "\n";
      return app::combined_status(results);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_status(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::exit_numeric;
  }
  return app::exit_ok;
}
