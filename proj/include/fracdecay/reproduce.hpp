#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace fracdecay::app {

struct CriterionResult {
  int id = 0;
  std::string label;
  bool check_passed = false;
  double seconds = 0.0;
  double budget = 0.0;  ///< seconds; 0 means unbounded
  std::string detail;
  std::vector<std::filesystem::path> files;

  bool within_budget() const { return budget <= 0.0 || seconds <= budget; }
  bool passed() const { return check_passed && within_budget(); }
};

struct ReproduceOptions {
  std::filesystem::path out_dir = "reproduce";
  /// Multiplies every special-function tolerance; 1 is the strict default.
  double tolerance_scale = 1.0;
  /// Rerun the matrix into `out_dir/rerun` and compare CSV bytes.
  bool check_determinism = true;
};

/// Runs the acceptance matrix in order, writing one or more CSVs per row.
std::vector<CriterionResult> run_acceptance(const ReproduceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_row = {});

std::string format_row(const CriterionResult& row);
std::string format_table(const std::vector<CriterionResult>& rows);
bool all_passed(const std::vector<CriterionResult>& rows);

}  // namespace fracdecay::app
