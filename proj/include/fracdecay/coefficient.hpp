#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fracdecay {

/// Time-dependent diffusion coefficient a(t) together with its primitive.
class Coefficient {
 public:
  struct Power {
    double kappa = 1.0;
    double beta = 0.0;
  };
  /// a(t) = beta t^{beta-1}.
  struct ExponentialRate {
    double beta = 1.0;
  };
  /// a(t) = p / ((1 + log(1+t)) (1+t)).
  struct Logarithmic {
    double p = 1.0;
  };
  /// a(t) = q P'(t)/P(t) with P(t) = sum_j coeffs[j] t^j.
  struct Polynomial {
    double q = 1.0;
    std::vector<double> coeffs;
  };
  /// Piecewise-linear through (times[i], values[i]), constant beyond the ends.
  struct Tabulated {
    std::vector<double> times;
    std::vector<double> values;
  };
  /// Arbitrary callable; primitive by adaptive quadrature.
  struct Function {
    std::function<double(double)> a;
    std::string name;
  };

  using Kind = std::variant<Power, ExponentialRate, Logarithmic, Polynomial, Tabulated, Function>;

  static Coefficient power(double kappa, double beta) { return Coefficient(Power{kappa, beta}); }
  static Coefficient exponential_rate(double beta) { return Coefficient(ExponentialRate{beta}); }
  static Coefficient logarithmic(double p) { return Coefficient(Logarithmic{p}); }
  static Coefficient polynomial(double q, std::vector<double> coeffs);
  static Coefficient tabulated(std::vector<double> times, std::vector<double> values);
  static Coefficient function(std::function<double(double)> a, std::string name);

  double value(double t) const;
  /// int_0^t a(s) ds.
  double primitive(double t) const;
  const Kind& kind() const { return kind_; }
  std::string describe() const;

  /// (kappa, beta) when the coefficient is exactly kappa t^beta.
  std::optional<Power> as_power() const;
  /// Samples a(t) >= kappa t^beta with beta > -alpha on a log grid over (0, horizon].
  bool satisfies_h(double kappa, double beta, double alpha, double horizon) const;

 private:
  explicit Coefficient(Kind kind);
  Kind kind_;
};

}  // namespace fracdecay
