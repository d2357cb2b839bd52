#include "fracdecay/coefficient.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "fracdecay/error.hpp"

namespace fracdecay {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double poly_eval(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

double poly_derivative(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t j = c.size() - 1; j >= 1; --j) v = v * t + j * c[j];
  return v;
}

}  // namespace

Coefficient::Coefficient(Kind kind) : kind_(std::move(kind)) {}

Coefficient Coefficient::polynomial(double q, std::vector<double> coeffs) {
  if (!(q > 0.0)) fail(ErrorKind::inadmissible_params, "polynomial coefficient needs q > 0");
  if (coeffs.size() < 2) fail(ErrorKind::inadmissible_params, "polynomial coefficient needs degree >= 1");
  if (!(coeffs[0] > 0.0)) fail(ErrorKind::inadmissible_params, "polynomial coefficient needs a_0 > 0");
  for (std::size_t j = 1; j < coeffs.size(); ++j)
    if (!(coeffs[j] > 0.0)) fail(ErrorKind::inadmissible_params, "polynomial coefficient needs a_j > 0");
  return Coefficient(Polynomial{q, std::move(coeffs)});
}

Coefficient Coefficient::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    fail(ErrorKind::inadmissible_params, "tabulated coefficient needs matching times and values");
  if (times.front() < 0.0) fail(ErrorKind::inadmissible_params, "tabulated times must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) fail(ErrorKind::inadmissible_params, "tabulated times must increase");
  return Coefficient(Tabulated{std::move(times), std::move(values)});
}

Coefficient Coefficient::function(std::function<double(double)> a, std::string name) {
  if (!a) fail(ErrorKind::inadmissible_params, "coefficient function is empty");
  return Coefficient(Function{std::move(a), std::move(name)});
}

double Coefficient::value(double t) const {
  return std::visit(
      Overloaded{
          [t](const Power& p) { return p.kappa * std::pow(t, p.beta); },
          [t](const ExponentialRate& e) { return e.beta * std::pow(t, e.beta - 1.0); },
          [t](const Logarithmic& l) { return l.p / ((1.0 + std::log1p(t)) * (1.0 + t)); },
          [t](const Polynomial& p) { return p.q * poly_derivative(p.coeffs, t) / poly_eval(p.coeffs, t); },
          [t](const Tabulated& tab) {
            if (t <= tab.times.front()) return tab.values.front();
            if (t >= tab.times.back()) return tab.values.back();
            const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - tab.times.begin());
            const double w = (t - tab.times[i - 1]) / (tab.times[i] - tab.times[i - 1]);
            return (1.0 - w) * tab.values[i - 1] + w * tab.values[i];
          },
          [t](const Function& f) { return f.a(t); },
      },
      kind_);
}

double Coefficient::primitive(double t) const {
  if (!(t >= 0.0)) fail(ErrorKind::domain_error, "primitive needs t >= 0");
  if (t == 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [t](const Power& p) {
            if (!(p.beta > -1.0)) fail(ErrorKind::nonpositive_primitive, "t^beta is not integrable at 0 for beta <= -1");
            return p.kappa * std::pow(t, p.beta + 1.0) / (p.beta + 1.0);
          },
          [t](const ExponentialRate& e) { return std::pow(t, e.beta); },
          [t](const Logarithmic& l) { return l.p * std::log1p(std::log1p(t)); },
          [t](const Polynomial& p) { return p.q * std::log(poly_eval(p.coeffs, t) / p.coeffs[0]); },
          [this, t](const Tabulated& tab) {
            double area = 0.0;
            double prev_t = 0.0;
            double prev_v = value(0.0);
            for (std::size_t i = 0; i < tab.times.size() && tab.times[i] < t; ++i) {
              if (tab.times[i] <= prev_t) continue;
              area += 0.5 * (prev_v + tab.values[i]) * (tab.times[i] - prev_t);
              prev_t = tab.times[i];
              prev_v = tab.values[i];
            }
            return area + 0.5 * (prev_v + value(t)) * (t - prev_t);
          },
          [t](const Function& f) {
            return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f.a, 0.0, t, 20, 1e-12);
          },
      },
      kind_);
}

std::string Coefficient::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Power& p) { os << "power(kappa=" << p.kappa << ", beta=" << p.beta << ")"; },
                 [&](const ExponentialRate& e) { os << "exponential_rate(beta=" << e.beta << ")"; },
                 [&](const Logarithmic& l) { os << "logarithmic(p=" << l.p << ")"; },
                 [&](const Polynomial& p) { os << "polynomial(q=" << p.q << ", degree=" << p.coeffs.size() - 1 << ")"; },
                 [&](const Tabulated& tab) { os << "tabulated(" << tab.times.size() << " points)"; },
                 [&](const Function& f) { os << "function(" << f.name << ")"; },
             },
             kind_);
  return os.str();
}

std::optional<Coefficient::Power> Coefficient::as_power() const {
  if (const auto* p = std::get_if<Power>(&kind_)) return *p;
  return std::nullopt;
}

bool Coefficient::satisfies_h(double kappa, double beta, double alpha, double horizon) const {
  if (!(kappa > 0.0) || !(beta > -alpha) || !(horizon > 0.0)) return false;
  constexpr int kSamples = 241;
  for (int i = 0; i < kSamples; ++i) {
    const double t = horizon * std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i) / (kSamples - 1)));
    const double bound = kappa * std::pow(t, beta);
    if (!(value(t) >= bound * (1.0 - 1e-12))) return false;
  }
  return true;
}

}  // namespace fracdecay
