#pragma once

#include <span>
#include <vector>

namespace fracdecay {

/// Strictly increasing time nodes starting at 0.
class TimeGrid {
 public:
  /// t_j = T (j/N)^r.
  static TimeGrid graded(double horizon, int steps, double grading);
  static TimeGrid uniform(double horizon, int steps) { return graded(horizon, steps, 1.0); }
  static TimeGrid from_nodes(std::vector<double> nodes);
  /// min((2 - alpha)/alpha, 4), and 1 for alpha = 1.
  static double default_grading(double alpha);

  std::span<const double> nodes() const { return nodes_; }
  double operator[](int j) const { return nodes_[j]; }
  int steps() const { return static_cast<int>(nodes_.size()) - 1; }
  double horizon() const { return nodes_.back(); }
  double grading() const { return grading_; }
  double step(int j) const { return nodes_[j] - nodes_[j - 1]; }

 private:
  explicit TimeGrid(std::vector<double> nodes, double grading) : nodes_(std::move(nodes)), grading_(grading) {}
  std::vector<double> nodes_;
  double grading_ = 1.0;
};

}  // namespace fracdecay
