#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fracdecay/error.hpp"
#include "fracdecay/specfun.hpp"
#include "oracles.hpp"

using namespace fracdecay;
using namespace fracdecay::specfun;

namespace {

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return v;
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

TEST_CASE("kilbas-saigo reference values") {
  CHECK(kilbas_saigo({1.0, 2.0, 1.0}, 2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  for (auto p : {KilbasSaigoParams{0.5, 2.0, 1.0}, KilbasSaigoParams{0.3, 1.5, 0.2}, KilbasSaigoParams{1.0, 1.0, 0.0}})
    CHECK(kilbas_saigo(p, 0.0) == 1.0);

  const double v = kilbas_saigo({0.5, 2.0, 1.0}, -1.0);
  const auto ref = oracle::kilbas_saigo(0.5, 2.0, 1.0, -1.0);
  REQUIRE(ref);
  CHECK(std::fabs(v - *ref) <= 1e-9 * std::fabs(*ref));
  CHECK(v >= 0.3607);
  CHECK(v <= 0.5303);
}

TEST_CASE("bound formulas") {
  const auto b0 = kilbas_saigo_bounds(0.5, 2.0, 0.0);
  CHECK(b0.lower == 1.0);
  CHECK(b0.upper == 1.0);
  const auto b1 = kilbas_saigo_bounds(0.5, 2.0, 1.0);
  CHECK(b1.lower == doctest::Approx(0.36067).epsilon(1e-4));
  CHECK(b1.upper == doctest::Approx(0.53025).epsilon(1e-4));
  const auto big = kilbas_saigo_bounds(0.5, 2.0, 1e6);
  CHECK(big.lower == doctest::Approx(5.642e-7).epsilon(1e-3));
  CHECK(big.upper == doctest::Approx(1.128e-6).epsilon(1e-3));
  CHECK(big.lower <= big.upper);

  CHECK(kind_of([] { kilbas_saigo_bounds(1.0, 2.0, 1.0); }) == ErrorKind::domain_error);
  CHECK(kind_of([] { kilbas_saigo_bounds(0.5, 1.0, 1.0); }) == ErrorKind::domain_error);
  CHECK(kind_of([] { kilbas_saigo_bounds(0.5, 2.0, -1.0); }) == ErrorKind::domain_error);
}

TEST_CASE("admissibility and accuracy validation") {
  CHECK(kind_of([] { kilbas_saigo({0.0, 2.0, 1.0}, 0.5); }) == ErrorKind::inadmissible_params);
  CHECK(kind_of([] { kilbas_saigo({0.5, -1.0, 1.0}, 0.5); }) == ErrorKind::inadmissible_params);
  // x_1 = 0.5 (1 - 5) + 1 = -1 is a Gamma pole.
  CHECK(kind_of([] { kilbas_saigo({0.5, 1.0, -5.0}, 0.5); }) == ErrorKind::inadmissible_params);
  SeriesAccuracy bad;
  bad.max_terms = 4;
  CHECK(kind_of([&] { kilbas_saigo({0.5, 2.0, 1.0}, 0.5, bad); }) != ErrorKind::config_error);
  SeriesAccuracy zero{0.0, 0.0, 64};
  CHECK_THROWS_AS(zero.validate(), Error);
}

TEST_CASE("series accuracy loosening") {
  const auto loose = SeriesAccuracy{}.loosened(100.0);
  CHECK(loose.abs_tol == doctest::Approx(1e-10));
  CHECK(loose.rel_tol == doctest::Approx(1e-8));
}

TEST_CASE("exponential identity at alpha = 1") {
  double worst = 0.0;
  for (double m : {1.5, 2.0, 3.0})
    for (int i = 0; i <= 40; ++i) {
      const double z = -5.0 + 0.25 * i;
      const auto ev = kilbas_saigo_eval({1.0, m, m - 1.0}, z);
      CHECK(ev.method != EvalMethod::closed_form);
      worst = std::max(worst, std::fabs(ev.value - std::exp(z / m)));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("two-sided bound holds on the negative axis") {
  const SeriesAccuracy acc;
  for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
    for (double m : {1.5, 2.0, 5.0}) {
      double prev = 1.0;
      for (double z : log_grid(1e-3, 50.0, 25)) {
        const double v = kilbas_saigo({alpha, m, m - 1.0}, -z, acc);
        const auto b = kilbas_saigo_bounds(alpha, m, z);
        CAPTURE(alpha);
        CAPTURE(m);
        CAPTURE(z);
        CHECK(v >= b.lower * (1.0 - 10.0 * acc.rel_tol));
        CHECK(v <= b.upper * (1.0 + 10.0 * acc.rel_tol));
        CHECK(v <= prev * (1.0 + 1e-9));
        prev = v;
      }
    }
}

TEST_CASE("series against the 100-digit oracle") {
  int compared = 0;
  for (double alpha : {0.5, 0.7, 0.9})
    for (double m : {1.5, 2.0})
      for (double z : {-10.0, -4.0, -1.0, -0.1, 0.5, 2.0, 6.0}) {
        const auto ref = oracle::kilbas_saigo(alpha, m, m - 1.0, z);
        if (!ref) continue;
        const auto ev = kilbas_saigo_eval({alpha, m, m - 1.0}, z);
        CAPTURE(alpha);
        CAPTURE(m);
        CAPTURE(z);
        CAPTURE(to_string(ev.method));
        const double tol = ev.method == EvalMethod::integral_equation ? 1e-6 : 1e-9;
        CHECK(std::fabs(ev.value - *ref) <= tol * std::fabs(*ref));
        ++compared;
      }
  MESSAGE("oracle comparisons: " << compared);
  CHECK(compared >= 36);
}

TEST_CASE("non-decay parameters follow the oracle") {
  for (auto [a, m, l, z] : {std::array{0.4, 1.3, 0.7, -2.0}, std::array{0.8, 3.0, 0.5, 1.5},
                            std::array{1.2, 0.8, 0.0, -3.0}}) {
    const auto ref = oracle::kilbas_saigo(a, m, l, z);
    REQUIRE(ref);
    CHECK(kilbas_saigo({a, m, l}, z) == doctest::Approx(*ref).epsilon(1e-9));
  }
}

TEST_CASE("large arguments stay inside the bounds and are flagged") {
  const auto ev = kilbas_saigo_eval({0.1, 2.0, 1.0}, -40.0);
  const auto b = kilbas_saigo_bounds(0.1, 2.0, 40.0);
  CHECK(ev.method != EvalMethod::series);
  CHECK(ev.error_estimate > 0.0);
  CHECK(ev.value >= b.lower);
  CHECK(ev.value <= b.upper);
}

TEST_CASE("mittag-leffler values") {
  CHECK(mittag_leffler(1.0, 1.0, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  for (double beta : {0.5, 1.0, 2.5}) CHECK(mittag_leffler(0.6, beta, 0.0) == doctest::Approx(1.0 / std::tgamma(beta)));
  const auto ref = oracle::mittag_leffler(2.0, 1.0, -1.0);
  REQUIRE(ref);
  CHECK(mittag_leffler(2.0, 1.0, -1.0) == doctest::Approx(*ref).epsilon(1e-10));
  CHECK(*ref == doctest::Approx(std::cos(1.0)).epsilon(1e-14));

  const auto asym = mittag_leffler_eval(0.5, 1.0, -12.0);
  CHECK(asym.method == EvalMethod::asymptotic);
  const auto far = oracle::mittag_leffler(0.5, 1.0, -12.0);
  REQUIRE(far);
  CHECK(asym.value == doctest::Approx(*far).epsilon(1e-5));
}

TEST_CASE("reduction to mittag-leffler") {
  const auto r1 = reduce_to_mittag_leffler({0.7, 1.0, 0.0});
  REQUIRE(r1);
  CHECK(r1->scale == doctest::Approx(1.0));
  CHECK(r1->alpha == doctest::Approx(0.7));
  CHECK(r1->beta == doctest::Approx(1.0));
  const auto r2 = reduce_to_mittag_leffler({0.5, 1.0, 2.0});
  REQUIRE(r2);
  CHECK(r2->scale == doctest::Approx(1.0));
  CHECK(r2->beta == doctest::Approx(2.0));
  CHECK_FALSE(reduce_to_mittag_leffler({0.5, 2.0, 1.0}));

  for (auto [a, l] : {std::pair{0.7, 0.3}, {0.5, 2.0}, {0.9, 0.0}}) {
    const auto r = reduce_to_mittag_leffler({a, 1.0, l});
    REQUIRE(r);
    for (double z : {-3.0, -1.0, 0.4, 2.0}) {
      const double ks = kilbas_saigo({a, 1.0, l}, z);
      const double ml = r->scale * mittag_leffler(r->alpha, r->beta, z);
      CHECK(std::fabs(ks - ml) <= 1e-10 * std::max(1.0, std::fabs(ml)));
    }
  }
}

TEST_CASE("decay curve and evaluator") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    const double m = 2.0;
    const DecayEvaluator ev(alpha, m, 200.0);
    double prev = 1.0;
    CHECK(ev(0.0) == 1.0);
    for (double x : log_grid(1e-3, 200.0, 40)) {
      const double v = ev(x);
      const auto b = kilbas_saigo_bounds(alpha, m, x);
      CHECK(v <= prev * (1.0 + 1e-9));
      CHECK(v >= b.lower * (1.0 - 1e-8));
      CHECK(v <= b.upper * (1.0 + 1e-8));
      prev = v;
    }
    for (double x : {0.5, 3.0, 8.0}) {
      const auto ref = oracle::kilbas_saigo(alpha, m, m - 1.0, -x, 3000);
      if (!ref) continue;
      CHECK(ev(x) == doctest::Approx(*ref).epsilon(1e-7));
    }
  }
  const DecayEvaluator unit(1.0, 2.0, 50.0);
  CHECK(unit(10.0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-12));

  const DecayCurve curve(0.5, 2.0, 100.0);
  CHECK(curve.x_max() >= 100.0);
  CHECK(curve.error_estimate() < 1e-5);
  const auto ref = oracle::kilbas_saigo(0.5, 2.0, 1.0, -5.0, 3000);
  REQUIRE(ref);
  CHECK(curve(5.0) == doctest::Approx(*ref).epsilon(1e-7));
}
