#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fracdecay/coefficient.hpp"
#include "fracdecay/decayfit.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/spectral.hpp"

using namespace fracdecay;
using namespace fracdecay::spectral;
using decayfit::Verdict;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::config_error;
}

std::vector<double> first_mode(const EigenSystem& sys, double c = 1.0) {
  std::vector<double> u(sys.size(), 0.0);
  u[0] = c;
  return u;
}

}  // namespace

TEST_CASE("interval eigenpairs are orthonormal") {
  for (auto bc : {Boundary::dirichlet, Boundary::neumann}) {
    const auto sys = EigenSystem::interval(2.0, bc, 12);
    CHECK(sys.size() == 12);
    CHECK(sys.dimension() == 1);
    const int shift = bc == Boundary::dirichlet ? 1 : 0;
    for (int k = 0; k < sys.size(); ++k)
      CHECK(sys.eigenvalue(k) == doctest::Approx(std::pow((k + shift) * kPi / 2.0, 2)));
    for (int a = 0; a < sys.size(); ++a)
      for (int b = 0; b < sys.size(); ++b) {
        double ip = 0.0;
        for (std::size_t q = 0; q < sys.nodes().size(); ++q)
          ip += sys.weights()[q] * sys.eigenfunction(a, sys.nodes()[q]) * sys.eigenfunction(b, sys.nodes()[q]);
        CHECK(std::fabs(ip - (a == b ? 1.0 : 0.0)) <= 1e-12);
      }
  }
  CHECK(EigenSystem::interval(kPi, Boundary::neumann, 4).first_positive_eigenvalue() == doctest::Approx(1.0));
  CHECK(EigenSystem::interval(kPi, Boundary::dirichlet, 4).first_positive_eigenvalue() == doctest::Approx(1.0));
  CHECK_THROWS_AS(EigenSystem::interval(0.0, Boundary::dirichlet), Error);
  CHECK_THROWS_AS(EigenSystem::interval(1.0, Boundary::dirichlet, 0), Error);
}

TEST_CASE("rectangle eigenvalues are sorted sums") {
  const auto sys = EigenSystem::rectangle(kPi, kPi, Boundary::dirichlet, 6);
  CHECK(sys.dimension() == 2);
  CHECK(sys.eigenvalue(0) == doctest::Approx(2.0));
  CHECK(sys.eigenvalue(1) == doctest::Approx(5.0));
  CHECK(sys.eigenvalue(2) == doctest::Approx(5.0));
  CHECK(sys.eigenvalue(3) == doctest::Approx(8.0));
  for (int k = 1; k < sys.size(); ++k) CHECK(sys.eigenvalue(k) >= sys.eigenvalue(k - 1));
  const auto proj = project_initial_data(sys, [](Point p) { return std::sin(p.x) * std::sin(p.y); });
  CHECK(proj.coefficients[0] == doctest::Approx(kPi / 2.0).epsilon(1e-12));
  CHECK(std::fabs(proj.parseval_defect) <= 1e-10);
}

TEST_CASE("projection of reference initial data") {
  const auto dir = EigenSystem::interval(kPi, Boundary::dirichlet, 32);
  const auto p = project_initial_data(dir, [](Point q) { return q.x * (kPi - q.x); });
  CHECK(p.coefficients[0] == doctest::Approx(4.0 * std::sqrt(2.0 / kPi)).epsilon(1e-12));
  CHECK(p.coefficients[0] == doctest::Approx(3.1915).epsilon(1e-4));
  CHECK(std::fabs(p.coefficients[1]) <= 1e-12);
  CHECK(p.norm_sq == doctest::Approx(std::pow(kPi, 5) / 30.0).epsilon(1e-12));
  CHECK(std::fabs(p.parseval_defect) <= 1e-8 * p.norm_sq);

  const auto neu = EigenSystem::interval(kPi, Boundary::neumann, 16);
  const auto c = project_initial_data(neu, [](Point) { return 1.0; });
  CHECK(c.coefficients[0] == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  for (int k = 1; k < neu.size(); ++k) CHECK(std::fabs(c.coefficients[k]) <= 1e-13);

  const std::vector<double> modal = p.coefficients;
  CHECK(quadrature_norm(dir, modal) == doctest::Approx(std::sqrt(p.norm_sq)).epsilon(1e-6));
  const std::vector<Point> pts{{kPi / 2.0, 0.0}};
  CHECK(reconstruct(dir, modal, pts)[0] == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-4));
}

TEST_CASE("under-resolved initial data is rejected") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 8);
  CHECK(kind_of([&] { project_initial_data(sys, [](Point p) { return std::sin(40.0 * p.x); }); }) ==
        ErrorKind::quadrature_under_resolved);
  CHECK(kind_of([&] { project_initial_data(sys, [](Point) { return std::nan(""); }); }) ==
        ErrorKind::quadrature_under_resolved);
}

TEST_CASE("closed-form subdiffusion solution") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 8);
  const auto times = decayfit::log_times(1e-3, 1e4, 20);
  const auto u0 = first_mode(sys);
  const auto tr = solve_subdiffusion(sys, 0.5, 0.5, u0, times);
  CHECK(tr.energy.front() == 1.0);
  CHECK(tr.origin == TraceOrigin::subdiffusion_closed_form);
  for (std::size_t j = 1; j < times.size(); ++j) {
    CHECK(tr.energy[j] <= tr.energy[j - 1]);
    CHECK(tr.energy[j] > 0.0);
    // lambda_1 = 1, so the energy is the decay function itself and must sit inside its bounds.
    const auto b = specfun::kilbas_saigo_bounds(0.5, 2.0, times[j]);
    CHECK(tr.energy[j] >= b.lower * (1.0 - 1e-8));
    CHECK(tr.energy[j] <= b.upper * (1.0 + 1e-8));
  }
  const auto rep = verify_dirichlet_sandwich(tr, sys, 0.5, 0.5);
  CHECK(rep.verdict == Verdict::sandwich_ok);
  CHECK(rep.predicted_exponent == doctest::Approx(1.0));
  CHECK(rep.fit.exponent == doctest::Approx(1.0).epsilon(0.05));

  const std::vector<double> zero(sys.size(), 0.0);
  const auto z = solve_subdiffusion(sys, 0.5, 0.5, zero, times);
  CHECK(verify_dirichlet_sandwich(z, sys, 0.5, 0.5).verdict == Verdict::degenerate);

  CHECK(kind_of([&] { solve_subdiffusion(sys, 0.5, -0.5, u0, times); }) == ErrorKind::inadmissible_params);
  CHECK(kind_of([&] { solve_subdiffusion(sys, 1.5, 0.0, u0, times); }) == ErrorKind::inadmissible_params);
  CHECK(kind_of([&] { solve_subdiffusion(sys, 0.5, 0.5, std::vector<double>{1.0}, times); }) ==
        ErrorKind::grid_mismatch);
  CHECK(kind_of([&] { solve_subdiffusion(sys, 0.5, 0.5, u0, std::vector<double>{-1.0}); }) ==
        ErrorKind::grid_mismatch);
}

TEST_CASE("parseval identity along the trajectory") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 24);
  const auto p = project_initial_data(sys, [](Point q) { return q.x * (kPi - q.x); });
  const std::vector<double> times{0.0, 0.1, 1.0, 10.0};
  const auto tr = solve_subdiffusion(sys, 0.6, 0.2, p.coefficients, times);
  for (std::size_t j = 0; j < times.size(); ++j)
    CHECK(std::fabs(quadrature_norm(sys, tr.modal[j]) - tr.energy[j]) <= 1e-8 * tr.energy[0]);
}

TEST_CASE("alpha = 1 agrees with the heat solution") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 6);
  std::vector<double> u0(sys.size(), 0.0);
  u0[0] = 1.0;
  u0[2] = -0.5;
  const std::vector<double> times{0.0, 0.05, 0.3, 1.0, 2.5};
  for (double beta : {0.0, 0.5, 1.5}) {
    const auto a = solve_subdiffusion(sys, 1.0, beta, u0, times);
    const auto b = solve_heat_general(sys, Coefficient::power(1.0, beta), u0, times);
    for (std::size_t j = 0; j < times.size(); ++j)
      for (int k = 0; k < sys.size(); ++k) CHECK(std::fabs(a.modal[j][k] - b.modal[j][k]) <= 1e-6);
  }
}

TEST_CASE("L1 modal stepping cross-validates the closed form") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 4);
  std::vector<double> u0{1.0, 0.3, 0.0, 0.1};
  const auto grid = TimeGrid::graded(5.0, 2048, 3.0);
  const auto l1 = solve_subdiffusion_l1(sys, 0.5, Coefficient::power(1.0, 0.3), u0, grid);
  const auto exact = solve_subdiffusion(sys, 0.5, 0.3, u0, l1.times);
  double worst = 0.0;
  for (std::size_t j = 0; j < l1.times.size(); ++j) worst = std::max(worst, std::fabs(l1.energy[j] - exact.energy[j]));
  CHECK(worst <= 1e-3);
  CHECK(l1.origin == TraceOrigin::modal_l1);
}

TEST_CASE("neumann plateau and mean-zero decay") {
  const auto sys = EigenSystem::interval(kPi, Boundary::neumann, 8);
  const auto times = decayfit::log_times(1e-3, 1e4, 20);
  std::vector<double> u0(sys.size(), 0.0);
  u0[0] = 2.0;
  auto tr = solve_subdiffusion(sys, 0.5, 0.5, u0, times);
  for (double e : tr.energy) CHECK(e == 2.0);
  auto rep = verify_neumann(tr, sys, 0.5, 0.5, 2.0, 0.0);
  CHECK(rep.passed());

  u0[1] = 1.0;
  tr = solve_subdiffusion(sys, 0.5, 0.5, u0, times);
  CHECK(tr.energy.back() >= 2.0);
  CHECK(tr.energy.back() - 2.0 <= 1e-3);
  rep = verify_neumann(tr, sys, 0.5, 0.5, 2.0, 1.0);
  CHECK(rep.passed());

  u0[0] = 0.0;
  tr = solve_subdiffusion(sys, 0.5, 0.5, u0, times);
  rep = verify_neumann(tr, sys, 0.5, 0.5, 0.0, 1.0);
  CHECK(rep.verdict == Verdict::sandwich_ok);
}

TEST_CASE("heat coefficient catalog closed forms") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 3);
  const auto u0 = first_mode(sys);
  const std::vector<double> times{0.0, 0.5, 2.0, 10.0};
  auto check = [&](const Coefficient& c, auto&& expected) {
    const auto tr = solve_heat_general(sys, c, u0, times);
    for (std::size_t j = 0; j < times.size(); ++j)
      CHECK(tr.energy[j] == doctest::Approx(expected(times[j])).epsilon(1e-8));
  };
  check(Coefficient::power(2.0, 0.5), [](double t) { return std::exp(-2.0 * std::pow(t, 1.5) / 1.5); });
  check(Coefficient::exponential_rate(2.0), [](double t) { return std::exp(-t * t); });
  check(Coefficient::logarithmic(3.0), [](double t) { return std::pow(1.0 + std::log1p(t), -3.0); });
  check(Coefficient::polynomial(2.0, {1.0, 2.0, 1.0}), [](double t) { return std::pow(1.0 + t, -4.0); });
  check(Coefficient::function([](double t) { return 1.0 / (1.0 + t); }, "1/(1+t)"),
        [](double t) { return 1.0 / (1.0 + t); });

  CHECK(kind_of([&] {
          solve_heat_general(sys, Coefficient::function([](double) { return -1.0; }, "negative"), u0, times);
        }) == ErrorKind::nonpositive_primitive);
  CHECK(kind_of([&] { solve_heat_general(sys, Coefficient::power(1.0, -1.5), u0, times); }) ==
        ErrorKind::nonpositive_primitive);
}

TEST_CASE("general coefficient upper bound") {
  const auto sys = EigenSystem::interval(kPi, Boundary::dirichlet, 4);
  const std::vector<double> u0{1.0, 0.0, 0.2, 0.0};
  const auto grid = TimeGrid::graded(50.0, 1024, 3.0);
  // a(t) = t^0.5 (2 + sin t) >= t^0.5.
  const auto coeff = Coefficient::function([](double t) { return std::sqrt(t) * (2.0 + std::sin(t)); }, "wobble");
  CHECK(coeff.satisfies_h(1.0, 0.5, 0.5, 50.0));
  CHECK_FALSE(coeff.satisfies_h(10.0, 0.5, 0.5, 50.0));
  const auto tr = solve_subdiffusion_l1(sys, 0.5, coeff, u0, grid);
  CHECK(verify_general_coefficient_upper(tr, 0.5, 1.0, 0.5).verdict == Verdict::upper_only_ok);
  CHECK(verify_general_coefficient_upper(tr, 0.5, 10.0, 0.5).verdict == Verdict::violated);

  const auto times = decayfit::log_times(1e-2, 100.0, 20);
  const auto exact = solve_subdiffusion(sys, 0.5, 0.5, u0, times);
  CHECK(verify_general_coefficient_upper(exact, 0.5, 1.0, 0.5).passed());
  CHECK(verify_general_coefficient_upper(exact, 0.5, 10.0, 0.5).verdict == Verdict::violated);
}
