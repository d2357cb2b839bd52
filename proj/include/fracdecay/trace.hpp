#pragma once

#include <vector>

namespace fracdecay {

enum class TraceOrigin { subdiffusion_closed_form, heat_closed_form, modal_l1, finite_difference };

/// Time history of a solution: energy always, modal coefficients for spectral runs,
/// nodal fields for finite-difference runs.
struct SolutionTrace {
  TraceOrigin origin = TraceOrigin::subdiffusion_closed_form;
  std::vector<double> times;
  std::vector<double> energy;

  std::vector<std::vector<double>> modal;  ///< [time][mode]
  std::vector<double> eigenvalues;
  std::vector<double> initial_modal;

  std::vector<std::vector<double>> fields;  ///< [time][interior node]
  double spacing = 0.0;

  double alpha = 1.0;
  double beta = 0.0;
  double max_gradient = 0.0;  ///< sup |Du| seen during a finite-difference run
  int max_sweeps_used = 0;
};

}  // namespace fracdecay
