#include "fracdecay/time_grid.hpp"

#include <algorithm>
#include <cmath>

#include "fracdecay/error.hpp"

namespace fracdecay {

TimeGrid TimeGrid::graded(double horizon, int steps, double grading) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::inadmissible_params, "time horizon must be positive");
  if (steps < 1) fail(ErrorKind::inadmissible_params, "time grid needs at least one step");
  if (!(grading >= 1.0)) fail(ErrorKind::inadmissible_params, "grading exponent must be at least 1");
  std::vector<double> nodes(steps + 1);
  for (int j = 0; j <= steps; ++j) nodes[j] = horizon * std::pow(static_cast<double>(j) / steps, grading);
  nodes[steps] = horizon;
  for (int j = 1; j <= steps; ++j)
    if (!(nodes[j] > nodes[j - 1])) fail(ErrorKind::inadmissible_params, "graded nodes are not strictly increasing");
  return TimeGrid(std::move(nodes), grading);
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) fail(ErrorKind::grid_mismatch, "time grid needs at least two nodes");
  if (nodes.front() != 0.0) fail(ErrorKind::grid_mismatch, "time grid must start at 0");
  for (std::size_t j = 1; j < nodes.size(); ++j)
    if (!(nodes[j] > nodes[j - 1]) || !std::isfinite(nodes[j]))
      fail(ErrorKind::grid_mismatch, "time nodes must be finite and strictly increasing");
  return TimeGrid(std::move(nodes), 1.0);
}

double TimeGrid::default_grading(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::inadmissible_params, "alpha must lie in (0,1]");
  return std::clamp((2.0 - alpha) / alpha, 1.0, 4.0);
}

}  // namespace fracdecay
