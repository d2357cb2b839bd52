#include "fracdecay/spectral.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "fracdecay/error.hpp"
#include "fracdecay/fracode.hpp"

namespace fracdecay::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void check_alpha_beta(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::inadmissible_params, "alpha must lie in (0,1]");
  if (!(beta > -alpha)) fail(ErrorKind::inadmissible_params, "hypothesis (H) requires beta > -alpha");
}

void check_modes(const EigenSystem& sys, std::span<const double> u0k) {
  if (static_cast<int>(u0k.size()) != sys.size())
    fail(ErrorKind::grid_mismatch, "modal coefficient count differs from the eigen system size");
}

void finish_energy(SolutionTrace& trace) {
  trace.energy.resize(trace.modal.size());
  for (std::size_t j = 0; j < trace.modal.size(); ++j) {
    double s = 0.0;
    for (double c : trace.modal[j]) s += c * c;
    trace.energy[j] = std::sqrt(s);
  }
}

double smallest_positive(const std::vector<double>& eigenvalues) {
  for (double l : eigenvalues)
    if (l > 0.0) return l;
  return 0.0;
}

}  // namespace

EigenSystem EigenSystem::interval(double length, Boundary bc, int modes) {
  if (!(length > 0.0)) fail(ErrorKind::inadmissible_params, "interval length must be positive");
  if (modes < 1) fail(ErrorKind::inadmissible_params, "mode count must be positive");
  EigenSystem sys;
  sys.lx_ = length;
  sys.bc_ = bc;
  const int first = bc == Boundary::dirichlet ? 1 : 0;
  for (int i = first; i < first + modes; ++i) {
    sys.indices_.emplace_back(i, 0);
    sys.eigenvalues_.push_back(std::pow(i * kPi / length, 2));
  }
  sys.build_quadrature();
  return sys;
}

EigenSystem EigenSystem::rectangle(double lx, double ly, Boundary bc, int modes) {
  if (!(lx > 0.0) || !(ly > 0.0)) fail(ErrorKind::inadmissible_params, "rectangle sides must be positive");
  if (modes < 1) fail(ErrorKind::inadmissible_params, "mode count must be positive");
  EigenSystem sys;
  sys.lx_ = lx;
  sys.ly_ = ly;
  sys.bc_ = bc;
  const int first = bc == Boundary::dirichlet ? 1 : 0;
  std::vector<std::tuple<double, int, int>> all;
  for (int i = first; i < first + modes; ++i)
    for (int j = first; j < first + modes; ++j)
      all.emplace_back(std::pow(i * kPi / lx, 2) + std::pow(j * kPi / ly, 2), i, j);
  std::sort(all.begin(), all.end());
  for (int k = 0; k < modes; ++k) {
    sys.eigenvalues_.push_back(std::get<0>(all[k]));
    sys.indices_.emplace_back(std::get<1>(all[k]), std::get<2>(all[k]));
  }
  sys.build_quadrature();
  return sys;
}

void EigenSystem::build_quadrature() {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  std::vector<double> unit_x, unit_w;
  for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
    const double x = Rule::abscissa()[i];
    const double w = Rule::weights()[i];
    unit_x.push_back(x);
    unit_w.push_back(w);
    if (x != 0.0) {
      unit_x.push_back(-x);
      unit_w.push_back(w);
    }
  }
  auto axis_rule = [&](double length, int max_index, std::vector<double>& xs, std::vector<double>& ws) {
    const int panels = 4 * std::max(max_index, 1) + 1;
    const double h = length / panels;
    for (int p = 0; p < panels; ++p)
      for (std::size_t i = 0; i < unit_x.size(); ++i) {
        xs.push_back((p + 0.5 * (unit_x[i] + 1.0)) * h);
        ws.push_back(0.5 * h * unit_w[i]);
      }
  };
  int max_i = 0, max_j = 0;
  for (auto [i, j] : indices_) {
    max_i = std::max(max_i, i);
    max_j = std::max(max_j, j);
  }
  std::vector<double> xs, wx;
  axis_rule(lx_, max_i, xs, wx);
  if (dimension() == 1) {
    for (std::size_t a = 0; a < xs.size(); ++a) {
      nodes_.push_back({xs[a], 0.0});
      weights_.push_back(wx[a]);
    }
    return;
  }
  std::vector<double> ys, wy;
  axis_rule(ly_, max_j, ys, wy);
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = 0; b < ys.size(); ++b) {
      nodes_.push_back({xs[a], ys[b]});
      weights_.push_back(wx[a] * wy[b]);
    }
}

double EigenSystem::axis_function(int index, double length, double x) const {
  if (bc_ == Boundary::dirichlet) return std::sqrt(2.0 / length) * std::sin(index * kPi * x / length);
  if (index == 0) return std::sqrt(1.0 / length);
  return std::sqrt(2.0 / length) * std::cos(index * kPi * x / length);
}

double EigenSystem::eigenfunction(int k, Point p) const {
  const auto [i, j] = indices_.at(k);
  const double fx = axis_function(i, lx_, p.x);
  return dimension() == 1 ? fx : fx * axis_function(j, ly_, p.y);
}

double EigenSystem::first_positive_eigenvalue() const { return smallest_positive(eigenvalues_); }

Projection project_initial_data(const EigenSystem& sys, const std::function<double(Point)>& u0) {
  const auto& nodes = sys.nodes();
  const auto& w = sys.weights();
  std::vector<double> values(nodes.size());
  Projection out;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    values[q] = u0(nodes[q]);
    if (!std::isfinite(values[q])) fail(ErrorKind::quadrature_under_resolved, "initial data is not finite at a node");
    out.norm_sq += w[q] * values[q] * values[q];
  }
  out.coefficients.assign(sys.size(), 0.0);
  double captured = 0.0;
  for (int k = 0; k < sys.size(); ++k) {
    double c = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) c += w[q] * values[q] * sys.eigenfunction(k, nodes[q]);
    out.coefficients[k] = c;
    captured += c * c;
  }
  out.parseval_defect = out.norm_sq - captured;
  if (out.parseval_defect > 0.01 * out.norm_sq) {
    std::ostringstream os;
    os << "Parseval defect " << out.parseval_defect << " exceeds 1% of the squared norm " << out.norm_sq;
    fail(ErrorKind::quadrature_under_resolved, os.str());
  }
  return out;
}

SolutionTrace solve_subdiffusion(const EigenSystem& sys, double alpha, double beta, std::span<const double> u0k,
                                 std::span<const double> times, const specfun::SeriesAccuracy& acc) {
  check_alpha_beta(alpha, beta);
  check_modes(sys, u0k);
  const double s = alpha + beta;
  double t_max = 0.0;
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorKind::grid_mismatch, "sample times must be finite and nonnegative");
    t_max = std::max(t_max, t);
  }
  double lambda_max = 0.0;
  for (int k = 0; k < sys.size(); ++k)
    if (u0k[k] != 0.0) lambda_max = std::max(lambda_max, sys.eigenvalue(k));
  const specfun::DecayEvaluator decay(alpha, 1.0 + beta / alpha, lambda_max * std::pow(t_max, s), acc);

  SolutionTrace trace;
  trace.origin = alpha == 1.0 ? TraceOrigin::heat_closed_form : TraceOrigin::subdiffusion_closed_form;
  trace.times.assign(times.begin(), times.end());
  trace.eigenvalues = sys.eigenvalues();
  trace.initial_modal.assign(u0k.begin(), u0k.end());
  trace.alpha = alpha;
  trace.beta = beta;
  trace.modal.assign(times.size(), std::vector<double>(sys.size(), 0.0));
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double ts = std::pow(times[j], s);
    for (int k = 0; k < sys.size(); ++k) {
      if (u0k[k] == 0.0) continue;
      const double lambda = sys.eigenvalue(k);
      trace.modal[j][k] = lambda == 0.0 ? u0k[k] : u0k[k] * decay(lambda * ts);
    }
  }
  finish_energy(trace);
  return trace;
}

SolutionTrace solve_subdiffusion_l1(const EigenSystem& sys, double alpha, const Coefficient& coeff,
                                    std::span<const double> u0k, const TimeGrid& grid) {
  check_modes(sys, u0k);
  const fracode::CaputoL1Operator op(grid, alpha);
  SolutionTrace trace;
  trace.origin = TraceOrigin::modal_l1;
  const auto nodes = grid.nodes();
  trace.times.assign(nodes.begin(), nodes.end());
  trace.eigenvalues = sys.eigenvalues();
  trace.initial_modal.assign(u0k.begin(), u0k.end());
  trace.alpha = alpha;
  if (auto p = coeff.as_power()) trace.beta = p->beta;
  trace.modal.assign(nodes.size(), std::vector<double>(sys.size(), 0.0));
  const auto a = [&coeff](double t) { return coeff.value(t); };
  for (int k = 0; k < sys.size(); ++k) {
    if (u0k[k] == 0.0) continue;
    const auto mode = fracode::solve_linear_mode(op, a, sys.eigenvalue(k), u0k[k]);
    for (std::size_t j = 0; j < nodes.size(); ++j) trace.modal[j][k] = mode.values[j];
  }
  finish_energy(trace);
  return trace;
}

SolutionTrace solve_heat_general(const EigenSystem& sys, const Coefficient& coeff, std::span<const double> u0k,
                                 std::span<const double> times) {
  check_modes(sys, u0k);
  SolutionTrace trace;
  trace.origin = TraceOrigin::heat_closed_form;
  trace.times.assign(times.begin(), times.end());
  trace.eigenvalues = sys.eigenvalues();
  trace.initial_modal.assign(u0k.begin(), u0k.end());
  if (auto p = coeff.as_power()) trace.beta = p->beta;
  trace.modal.assign(times.size(), std::vector<double>(sys.size(), 0.0));
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double primitive = coeff.primitive(times[j]);
    if (times[j] > 0.0 && !(primitive > 0.0)) {
      std::ostringstream os;
      os << "integral of the coefficient is " << primitive << " at t=" << times[j];
      fail(ErrorKind::nonpositive_primitive, os.str());
    }
    for (int k = 0; k < sys.size(); ++k)
      trace.modal[j][k] = u0k[k] * std::exp(-sys.eigenvalue(k) * primitive);
  }
  finish_energy(trace);
  return trace;
}

decayfit::DecayReport verify_dirichlet_sandwich(const SolutionTrace& trace, const EigenSystem& sys, double alpha,
                                                double beta) {
  auto report = decayfit::check_envelope(trace.times, trace.energy, alpha + beta, true, sys.eigenvalue(0));
  report.predicted_exponent = alpha + beta;
  report.predicted_tag = "alpha+beta";
  return report;
}

decayfit::DecayReport verify_neumann(const SolutionTrace& trace, const EigenSystem& sys, double alpha, double beta,
                                     double u00, double u01) {
  const double s = alpha + beta;
  const double lambda2 = sys.first_positive_eigenvalue();
  double scale_norm = 0.0;
  for (double e : trace.energy) scale_norm = std::max(scale_norm, e);
  if (std::fabs(u00) <= 1e-12 * std::max(scale_norm, 1.0)) {
    auto report = decayfit::check_envelope(trace.times, trace.energy, s, true, lambda2);
    report.predicted_exponent = s;
    report.predicted_tag = "alpha+beta";
    report.notes.push_back("mean-zero data: decay measured against the second Neumann eigenvalue");
    return report;
  }
  const double level = std::fabs(u00);
  std::vector<double> fluct(trace.energy.size());
  bool below = false;
  for (std::size_t j = 0; j < fluct.size(); ++j) {
    fluct[j] = trace.energy[j] - level;
    if (fluct[j] < -1e-9 * level) below = true;
    fluct[j] = std::max(fluct[j], 0.0);
  }
  auto report = decayfit::check_envelope(trace.times, fluct, s, false, lambda2);
  report.predicted_exponent = s;
  report.predicted_tag = "alpha+beta";
  report.plateau_level = trace.energy.back();
  if (report.verdict == decayfit::Verdict::degenerate) {
    report.verdict = decayfit::Verdict::upper_only_ok;
    report.upper_ok = true;
    report.notes.push_back("energy is constant at the plateau");
  }
  if (below) {
    report.verdict = decayfit::Verdict::violated;
    report.notes.push_back("energy dropped below the plateau level");
  }
  if (!trace.times.empty()) {
    const double t_end = trace.times.back();
    const double allowed = 2.0 * std::fabs(u01) / (1.0 + lambda2 * std::pow(t_end, s));
    std::ostringstream os;
    os << "final offset " << trace.energy.back() - level << " vs 2|u01|/(1+lambda2 T^s) = " << allowed;
    report.notes.push_back(os.str());
    if (trace.energy.back() - level > allowed) report.verdict = decayfit::Verdict::violated;
  }
  return report;
}

decayfit::DecayReport verify_general_coefficient_upper(const SolutionTrace& trace, double alpha, double kappa,
                                                       double beta, const specfun::SeriesAccuracy& acc) {
  const double s = alpha + beta;
  const double lambda1 = smallest_positive(trace.eigenvalues);
  auto report = decayfit::check_envelope(trace.times, trace.energy, s, false, lambda1 * kappa);
  report.predicted_exponent = s;
  report.predicted_tag = "alpha+beta";
  if (report.verdict == decayfit::Verdict::degenerate) return report;
  if (trace.modal.empty() || trace.initial_modal.size() != trace.eigenvalues.size()) {
    report.notes.push_back("no modal data: modal domination not checked");
    return report;
  }
  const std::size_t modes = trace.eigenvalues.size();
  std::vector<std::vector<double>> minorant(trace.times.size(), std::vector<double>(modes, 0.0));
  if (trace.origin == TraceOrigin::modal_l1) {
    const fracode::CaputoL1Operator op(TimeGrid::from_nodes(trace.times), alpha);
    const auto a = [kappa, beta](double t) { return kappa * std::pow(t, beta); };
    for (std::size_t k = 0; k < modes; ++k) {
      if (trace.initial_modal[k] == 0.0) continue;
      const auto mode = fracode::solve_linear_mode(op, a, trace.eigenvalues[k], trace.initial_modal[k]);
      for (std::size_t j = 0; j < trace.times.size(); ++j) minorant[j][k] = mode.values[j];
    }
  } else {
    double x_max = 0.0;
    for (std::size_t k = 0; k < modes; ++k)
      if (trace.initial_modal[k] != 0.0)
        x_max = std::max(x_max, kappa * trace.eigenvalues[k] * std::pow(trace.times.back(), s));
    const specfun::DecayEvaluator decay(alpha, 1.0 + beta / alpha, x_max, acc);
    for (std::size_t j = 0; j < trace.times.size(); ++j)
      for (std::size_t k = 0; k < modes; ++k)
        if (trace.initial_modal[k] != 0.0)
          minorant[j][k] =
              trace.initial_modal[k] * decay(kappa * trace.eigenvalues[k] * std::pow(trace.times[j], s));
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < trace.times.size(); ++j)
    for (std::size_t k = 0; k < modes; ++k) {
      const double excess = std::fabs(trace.modal[j][k]) -
                            std::fabs(minorant[j][k]) * (1.0 + 1e-6) - 1e-12 * std::fabs(trace.initial_modal[k]);
      worst = std::max(worst, excess);
    }
  std::ostringstream os;
  os << "modal domination by the kappa t^beta minorant: worst excess " << worst;
  report.notes.push_back(os.str());
  if (worst > 0.0) {
    report.verdict = decayfit::Verdict::violated;
    report.upper_ok = false;
  }
  return report;
}

std::vector<double> reconstruct(const EigenSystem& sys, std::span<const double> modal, std::span<const Point> points) {
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p)
    for (int k = 0; k < sys.size(); ++k)
      if (modal[k] != 0.0) out[p] += modal[k] * sys.eigenfunction(k, points[p]);
  return out;
}

double quadrature_norm(const EigenSystem& sys, std::span<const double> modal) {
  const auto values = reconstruct(sys, modal, sys.nodes());
  double s = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) s += sys.weights()[q] * values[q] * values[q];
  return std::sqrt(s);
}

}  // namespace fracdecay::spectral
