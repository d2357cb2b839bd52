#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/fracode.hpp"
#include "fracdecay/nonlinear.hpp"

using namespace fracdecay;
using namespace fracdecay::nonlinear;
using decayfit::Verdict;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(const SpatialGrid1D& g, double amp) {
  std::vector<double> u(g.interior);
  for (int i = 0; i < g.interior; ++i) u[i] = amp * std::sin(kPi * g.x(i) / g.length);
  return u;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::config_error;
}

}  // namespace

TEST_CASE("operator stencils") {
  const SpatialGrid1D g{kPi, 63};
  const auto u = sine(g, 1.0);
  const double h = g.spacing();
  const auto lap = discretize_operator(op::Laplace{}, g, u);
  const double symbol = (2.0 - 2.0 * std::cos(h)) / (h * h);
  for (int i = 0; i < g.interior; ++i) CHECK(lap[i] == doctest::Approx(-symbol * u[i]).epsilon(1e-12));

  CHECK(max_diff(discretize_operator(op::PLaplace{2.0}, g, u), lap) <= 1e-12);
  CHECK(max_diff(discretize_operator(op::PorousMedium{0.0, 1.0, {}}, g, u), lap) <= 1e-12);
  CHECK(max_diff(discretize_operator(op::Degenerate{0.0, 1.0, {}}, g, u), lap) <= 1e-12);
  CHECK(max_diff(discretize_operator(op::Kirchhoff{0.0, 1.0, 2.0, 2.0, {}}, g, u), lap) <= 1e-12);

  const auto small = sine(g, 1e-4);
  const auto mc = discretize_operator(op::MeanCurvature{}, g, small);
  const auto lin = discretize_operator(op::Laplace{}, g, small);
  CHECK(max_diff(mc, lin) <= 1e-7 * 1e-4);

  // Kirchhoff with gamma = 1 scales the Laplacian by ||Du||_{L^2}.
  const auto kf = discretize_operator(op::Kirchhoff{1.0, 1.0, 2.0, 2.0, {}}, g, u);
  double norm = 0.0;
  norm += h * std::pow(u.front() / h, 2);
  for (int i = 1; i < g.interior; ++i) norm += h * std::pow((u[i] - u[i - 1]) / h, 2);
  norm += h * std::pow(u.back() / h, 2);
  norm = std::sqrt(norm);
  for (int i = 0; i < g.interior; ++i) CHECK(kf[i] == doctest::Approx(norm * lap[i]).epsilon(1e-10));

  CHECK(operator_name(op::Kirchhoff{}) == "kirchhoff");
  CHECK(operator_name(op::PorousMedium{}) == "porous_medium");
  CHECK(kind_of([&] { discretize_operator(op::Laplace{}, g, std::vector<double>(5, 0.0)); }) ==
        ErrorKind::grid_mismatch);
  CHECK(kind_of([&] { discretize_operator(op::PLaplace{1.0}, g, u); }) == ErrorKind::inadmissible_params);
  CHECK(kind_of([] { SpatialGrid1D{1.0, 2}.validate(); }) == ErrorKind::inadmissible_params);
}

TEST_CASE("predicted exponents") {
  CHECK(predict_exponent(op::Laplace{}, 0.5, 0.5).value == doctest::Approx(1.0));
  const auto pl = predict_exponent(op::PLaplace{3.0}, 0.5, 0.5);
  CHECK(pl.value == doctest::Approx(0.5));
  CHECK(pl.tag == "(alpha+beta)/(p-1)");
  CHECK(predict_exponent(op::PorousMedium{1.0, 1.0, {}}, 0.5, 0.5).value == doctest::Approx(0.5));
  CHECK(predict_exponent(op::Degenerate{2.0, 1.0, {}}, 0.6, 0.3).value == doctest::Approx(0.3));
  const auto kf = predict_exponent(op::Kirchhoff{1.0, 1.0, 2.0, 2.0, {}}, 0.5, 0.5);
  CHECK(kf.value == doctest::Approx(0.5));
  CHECK(kf.tag == "(alpha+beta)/(gamma+p-1)");
  CHECK(predict_exponent(op::MeanCurvature{}, 0.5, 0.2).tag == "alpha+beta");
  CHECK(kind_of([] { predict_exponent(op::PLaplace{0.6}, 0.5, 0.5); }) == ErrorKind::inadmissible_params);
  // 2n/(n+2) = 1.2 in three dimensions.
  CHECK(kind_of([] { predict_exponent(op::PLaplace{1.1}, 0.5, 0.5, 3); }) == ErrorKind::unsupported_regime);
  CHECK(predict_exponent(op::PLaplace{1.3}, 0.5, 0.5, 3).value == doctest::Approx(1.0 / 0.3));
  CHECK(kind_of([] { predict_exponent(op::Laplace{}, 0.5, -0.5); }) == ErrorKind::inadmissible_params);
}

TEST_CASE("linear solve matches the scalar mode and decays") {
  const SpatialGrid1D g{kPi, 31};
  const auto time = TimeGrid::graded(20.0, 400, 3.0);
  const auto u0 = sine(g, 1.0);
  const auto tr = solve_nonlinear(op::Laplace{}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
  CHECK(tr.origin == TraceOrigin::finite_difference);
  CHECK(tr.fields.size() == tr.times.size());
  const double h = g.spacing();
  const double lambda = (2.0 - 2.0 * std::cos(h)) / (h * h);
  const auto mode = fracode::solve_linear_mode(0.5, 0.5, lambda, tr.energy[0], time);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    CHECK(tr.energy[j] == doctest::Approx(mode.values[j]).epsilon(1e-9));
    if (j > 0) CHECK(tr.energy[j] <= tr.energy[j - 1]);
  }
  const auto diag = check_energy_inequality(tr, 0.5);
  CHECK(diag.times.size() == 400);
  CHECK(diag.min_margin >= -1e-10);
}

TEST_CASE("zero initial data stays zero") {
  const SpatialGrid1D g{kPi, 15};
  const auto time = TimeGrid::graded(5.0, 64, 3.0);
  const std::vector<double> zero(g.interior, 0.0);
  const auto tr =
      solve_nonlinear(op::PLaplace{3.0}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.0), zero, g, time);
  for (double e : tr.energy) CHECK(e == 0.0);
  const auto rep = nonlinear_report(tr, predict_exponent(op::PLaplace{3.0}, 0.5, 0.0));
  CHECK(rep.verdict == Verdict::degenerate);
}

TEST_CASE("nonlinear operators dissipate and satisfy the energy inequality") {
  const SpatialGrid1D g{kPi, 31};
  const auto time = TimeGrid::graded(10.0, 256, 3.0);
  const auto u0 = sine(g, 0.5);
  const std::vector<OperatorSpec> specs{op::PLaplace{3.0}, op::PorousMedium{1.0, 1.0, {}},
                                        op::Degenerate{1.0, 1.0, {}}, op::MeanCurvature{},
                                        op::Kirchhoff{1.0, 1.0, 2.0, 2.0, {}}};
  for (const auto& spec : specs) {
    CAPTURE(operator_name(spec));
    const auto tr = solve_nonlinear(spec, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
    for (std::size_t j = 1; j < tr.energy.size(); ++j) CHECK(tr.energy[j] <= tr.energy[j - 1] * (1.0 + 1e-12));
    CHECK(tr.energy.back() < tr.energy.front());
    CHECK(check_energy_inequality(tr, 0.5).min_margin >= -1e-9);
    CHECK(tr.max_sweeps_used <= 10);
  }
}

TEST_CASE("larger coefficients decay faster") {
  const SpatialGrid1D g{kPi, 31};
  const auto time = TimeGrid::graded(10.0, 256, 3.0);
  const auto u0 = sine(g, 0.5);
  const auto slow =
      solve_nonlinear(op::PLaplace{3.0}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
  const auto fast =
      solve_nonlinear(op::PLaplace{3.0}, SourceSpec::none(), 0.5, Coefficient::power(3.0, 0.5), u0, g, time);
  for (std::size_t j = 1; j < slow.energy.size(); ++j) CHECK(fast.energy[j] <= slow.energy[j] * (1.0 + 1e-12));
}

TEST_CASE("absorption with zero rate is the porous medium flow") {
  const SpatialGrid1D g{kPi, 31};
  const auto time = TimeGrid::graded(10.0, 200, 3.0);
  const auto u0 = sine(g, 0.5);
  const op::PorousMedium pm{1.0, 2.0, [](double v) { return 2.0 * std::fabs(v); }};
  const auto a = solve_nonlinear(pm, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
  const auto b =
      solve_nonlinear(pm, SourceSpec::power_absorption(0.0, 2.0), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
  for (std::size_t j = 0; j < a.energy.size(); ++j) CHECK(a.energy[j] == b.energy[j]);
  const auto c =
      solve_nonlinear(pm, SourceSpec::power_absorption(2.0, 2.0), 0.5, Coefficient::power(1.0, 0.5), u0, g, time);
  for (std::size_t j = 1; j < a.energy.size(); ++j) CHECK(c.energy[j] <= a.energy[j] * (1.0 + 1e-12));
  CHECK(kind_of([&] {
          solve_nonlinear(pm, SourceSpec::power_absorption(1.0, 1.0), 0.5, Coefficient::power(1.0, 0.5), u0, g,
                          time);
        }) == ErrorKind::inadmissible_params);
}

TEST_CASE("preset scenarios on a small grid") {
  ScenarioParams p;
  p.points = 31;
  p.steps = 2048;
  p.horizon = 1000.0;

  const auto toy = run_scenario("toy_model", p);
  CHECK(toy.report.verdict == Verdict::sandwich_ok);
  CHECK(toy.report.predicted_exponent == doctest::Approx(1.0));

  const auto kpp = run_scenario("fisher_kpp", p);
  CHECK(kpp.order_preserved);
  CHECK(kpp.min_value > 0.0);
  CHECK(kpp.max_value <= 1.0);
  CHECK(kpp.report.passed());

  p.m = 1.0;
  p.mu = 1.0;
  const auto pme = run_scenario("semilinear_pme", p);
  CHECK(pme.order_preserved);
  CHECK(pme.min_value >= -1e-10);
  CHECK(pme.report.predicted_exponent == doctest::Approx(0.5));
  CHECK(pme.report.passed());

  CHECK(kind_of([&] { run_scenario("unknown", p); }) == ErrorKind::config_error);
  ScenarioParams bad = p;
  bad.beta = -0.5;
  CHECK(kind_of([&] { run_scenario("toy_model", bad); }) == ErrorKind::inadmissible_params);
  bad = p;
  bad.amplitude = 1.5;
  CHECK(kind_of([&] { run_scenario("fisher_kpp", bad); }) == ErrorKind::inadmissible_params);
  bad = p;
  bad.p = 1.0;
  CHECK(kind_of([&] { run_scenario("semilinear_pme", bad); }) == ErrorKind::inadmissible_params);
}

TEST_CASE("solver option validation") {
  const SpatialGrid1D g{kPi, 7};
  const auto time = TimeGrid::graded(1.0, 8, 2.0);
  const auto u0 = sine(g, 1.0);
  SolverOptions opts;
  opts.max_sweeps = 0;
  CHECK(kind_of([&] {
          solve_nonlinear(op::Laplace{}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.0), u0, g, time, opts);
        }) == ErrorKind::inadmissible_params);
  CHECK(kind_of([&] {
          solve_nonlinear(op::Laplace{}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.0),
                          std::vector<double>(3, 0.0), g, time);
        }) == ErrorKind::grid_mismatch);
  opts = {};
  opts.store_fields = false;
  const auto tr =
      solve_nonlinear(op::Laplace{}, SourceSpec::none(), 0.5, Coefficient::power(1.0, 0.0), u0, g, time, opts);
  CHECK(tr.fields.empty());
  CHECK(kind_of([&] { check_energy_inequality(tr, 0.5); }) == ErrorKind::grid_mismatch);
}
