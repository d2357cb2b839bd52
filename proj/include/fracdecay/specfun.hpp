#pragma once

#include <optional>
#include <vector>

namespace fracdecay::specfun {

struct SeriesAccuracy {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_terms = 512;

  void validate() const;
  /// Both tolerances multiplied by `factor`.
  SeriesAccuracy loosened(double factor) const;
};

/// Indices of E_{alpha,m,l}.
struct KilbasSaigoParams {
  double alpha = 1.0;
  double m = 1.0;
  double l = 0.0;

  /// Throws InadmissibleParams unless alpha > 0, m > 0 and no Gamma pole appears
  /// in the numerators for j < terms.
  void validate(int terms) const;
  /// l == m - 1, the family solving the power-coefficient linear equation.
  bool is_decay_family() const;
};

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

enum class EvalMethod { series, extended_series, integral_equation, asymptotic, closed_form };

const char* to_string(EvalMethod method);

/// Value plus how it was obtained; `error_estimate` is relative.
struct Evaluation {
  double value = 0.0;
  EvalMethod method = EvalMethod::series;
  double error_estimate = 0.0;
  int terms = 0;
};

Evaluation kilbas_saigo_eval(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc = {});
double kilbas_saigo(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc = {});

BoundPair kilbas_saigo_bounds(double alpha, double m, double z);

Evaluation mittag_leffler_eval(double alpha, double beta, double z, const SeriesAccuracy& acc = {});
double mittag_leffler(double alpha, double beta, double z, const SeriesAccuracy& acc = {});

struct MittagLefflerReduction {
  double scale = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

/// E_{alpha,1,l}(z) = scale * E_{alpha,alpha*l+1}(z).
std::optional<MittagLefflerReduction> reduce_to_mittag_leffler(const KilbasSaigoParams& params);

/// Tabulated x -> E_{alpha,m,m-1}(-x) on [0, x_max] for 0 < alpha < 1, obtained from
/// the equivalent Volterra equation y(t) = 1 - I^alpha[s^{alpha(m-1)} y](t), x = t^{alpha m}.
/// Immutable after construction.
class DecayCurve {
 public:
  DecayCurve(double alpha, double m, double x_max, const SeriesAccuracy& acc = {});

  double operator()(double x) const;
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  /// Richardson-based relative error estimate over the table.
  double error_estimate() const { return error_; }
  int intervals() const { return static_cast<int>(log_values_.size()) - 1; }

 private:
  std::vector<double> solve(int intervals) const;

  double alpha_, m_;
  double x_min_, x_max_;
  double y_min_ = 1.0;
  double step_ = 0.0;
  double error_ = 0.0;
  std::vector<double> log_values_;
  SeriesAccuracy acc_;
};

/// Bulk evaluator of x -> E_{alpha,m,m-1}(-x) for x in [0, x_max], alpha in (0,1].
/// Uses the plain series where it is safe and a DecayCurve beyond.
class DecayEvaluator {
 public:
  DecayEvaluator(double alpha, double m, double x_max, const SeriesAccuracy& acc = {});

  double operator()(double x) const;
  EvalMethod method_at(double x) const;
  double error_estimate() const;

 private:
  double alpha_, m_, x_max_;
  double series_limit_ = 0.0;
  SeriesAccuracy acc_;
  std::optional<DecayCurve> curve_;
};

}  // namespace fracdecay::specfun
