#pragma once

#include <span>
#include <string>
#include <vector>

namespace fracdecay::decayfit {

struct PowerFit {
  double exponent = 0.0;   ///< s in E ~ C t^{-s}
  double intercept = 0.0;  ///< log C
  double residual_rms = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int points = 0;
};

/// Least squares on (log t, log E) over the last `window_decades` decades,
/// dropping the final 5% of points in the window.
PowerFit fit_power_tail(std::span<const double> t, std::span<const double> e, double window_decades = 2.0);

enum class ModelKind { power, exponential, logarithmic, plateau };
const char* to_string(ModelKind kind);

struct ModelFit {
  ModelKind kind = ModelKind::power;
  double scale = 0.0;     ///< c
  double parameter = 0.0; ///< s, rate, p or level
  double power = 0.0;     ///< exponent of t in the exponential family
  double residual_rms = 0.0;
};

struct ModelSelection {
  ModelFit best;
  std::vector<ModelFit> candidates;  ///< sorted by residual
  double margin = 0.0;  ///< relative residual gap to the runner-up
};

/// Fits c(1+t)^{-s}, c exp(-rate t^power), c(1+log(1+t))^{-p} and a constant; picks
/// the lowest log-space RMS. `window_decades <= 0` uses every usable point.
ModelSelection fit_model_select(std::span<const double> t, std::span<const double> e, double window_decades = 0.0);

enum class Verdict { sandwich_ok, upper_only_ok, violated, degenerate };
const char* to_string(Verdict v);

struct DecayReport {
  PowerFit fit;
  bool has_fit = false;
  double predicted_exponent = 0.0;
  std::string predicted_tag;
  double envelope_exponent = 0.0;
  double envelope_scale = 1.0;
  double lower_constant = 0.0;  ///< min E(t)(1 + scale t^s)
  double upper_constant = 0.0;  ///< max E(t)(1 + scale t^s)
  double tail_drift = 0.0;      ///< slope of log E(t)(1 + scale t^s) over the fit window
  bool upper_ok = false;
  bool lower_ok = false;
  bool two_sided = false;
  Verdict verdict = Verdict::degenerate;
  double plateau_level = 0.0;
  std::vector<std::string> notes;

  bool passed() const { return verdict == Verdict::sandwich_ok || verdict == Verdict::upper_only_ok; }
  std::string summary() const;
  std::string details() const;
};

/// Envelope check against E(t) ~ 1/(1 + scale t^s). The tail drift is accepted while
/// |slope| <= 0.1 s.
DecayReport check_envelope(std::span<const double> t, std::span<const double> e, double exponent, bool two_sided,
                           double scale = 1.0, double window_decades = 2.0);

/// Log-log linear resampling onto `per_decade` points per decade over [t_min, t_max].
struct Series {
  std::vector<double> t;
  std::vector<double> e;
};
Series resample_log(std::span<const double> t, std::span<const double> e, double t_min, int per_decade = 40);

/// 0 followed by `per_decade` log-spaced points per decade from t_min to t_max.
std::vector<double> log_times(double t_min, double t_max, int per_decade = 40, bool include_zero = true);

}  // namespace fracdecay::decayfit
