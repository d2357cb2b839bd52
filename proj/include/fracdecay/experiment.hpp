#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracdecay/decayfit.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/specfun.hpp"

namespace fracdecay::app {

using ParamMap = std::map<std::string, std::string>;

/// Process exit statuses.
enum ExitStatus : int { exit_ok = 0, exit_config = 2, exit_violated = 3, exit_degenerate = 4, exit_numeric = 5 };

int exit_status(decayfit::Verdict verdict);
int exit_status(ErrorKind kind);

struct RunSettings {
  specfun::SeriesAccuracy accuracy;
  std::uint64_t seed = 0;
};

/// "strict" keeps the default series tolerances, "fast" loosens them 100x.
specfun::SeriesAccuracy tolerance_profile(const std::string& name);

struct Artifact {
  std::string file;  ///< relative to the output directory
  std::string content;
};

struct ScenarioOutput {
  std::vector<Artifact> artifacts;
  std::string summary;  ///< one line
  std::string report;   ///< detailed block
  int status = exit_ok;
};

/// Scenarios: subdiffusion, heat, ode, nonlinear, fisher_kpp, semilinear_pme, toy_model.
const std::vector<std::string>& scenario_names();
const std::vector<std::string>& scenario_keys(const std::string& scenario);

/// Validates every key and precondition, returning the deferred solve. Throws ConfigError
/// naming the offending key.
std::function<ScenarioOutput()> prepare_scenario(const std::string& scenario, const ParamMap& params,
                                                 const RunSettings& settings);
ScenarioOutput run_scenario(const std::string& scenario, const ParamMap& params, const RunSettings& settings);

struct ExperimentConfig {
  std::string name;
  std::string scenario;
  ParamMap params;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
};

/// Flat `key = value` text. Global keys (out, seed, jobs) precede the first
/// `[experiment NAME]` section; `#` starts a comment. Scalar keys given as a
/// comma-separated list expand into a grid of runs.
struct ExperimentFile {
  std::vector<ExperimentConfig> experiments;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

ExperimentFile parse_experiment_text(const std::string& text, const std::filesystem::path& default_out = "results",
                                     std::uint64_t default_seed = 0);
ExperimentFile load_experiment_file(const std::filesystem::path& path, const std::filesystem::path& default_out = "results",
                                    std::uint64_t default_seed = 0);

struct ExperimentResult {
  std::string name;
  int status = exit_ok;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Writes `trace.csv`-style artifacts and `report.txt` under the experiment directory.
/// Files are only written after the solve succeeds; a failed write removes what was written.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunSettings& settings);

/// Validates every config first, then runs them on up to `jobs` threads in input order.
std::vector<ExperimentResult> run_experiments(const std::vector<ExperimentConfig>& configs,
                                              const specfun::SeriesAccuracy& accuracy, int jobs);

/// Worst status across results; 0 for an empty list.
int combined_status(const std::vector<ExperimentResult>& results);

}  // namespace fracdecay::app
