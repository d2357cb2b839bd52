#include "fracdecay/decayfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracdecay/error.hpp"

namespace fracdecay::decayfit {

namespace {

constexpr double kFloor = 1e-14;
constexpr double kTieRms = 1e-9;
constexpr double kAmbiguity = 0.05;

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Line line;
  line.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  line.intercept = my - line.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - line.intercept - line.slope * x[i];
    ss += r * r;
  }
  line.rms = std::sqrt(ss / n);
  return line;
}

/// Indices of the usable tail window.
std::vector<std::size_t> tail_window(std::span<const double> t, std::span<const double> e, double decades) {
  if (t.size() != e.size()) fail(ErrorKind::degenerate_trace, "time and energy series differ in length");
  double t_hi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0.0 && e[i] > kFloor && std::isfinite(e[i])) t_hi = std::max(t_hi, t[i]);
  if (!(t_hi > 0.0)) fail(ErrorKind::degenerate_trace, "no samples with t > 0 and E above 1e-14");
  const double t_lo = decades > 0.0 ? t_hi * std::pow(10.0, -decades) : 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0.0 && t[i] >= t_lo && t[i] <= t_hi && e[i] > kFloor && std::isfinite(e[i])) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  return idx;
}

std::vector<std::size_t> trimmed_window(std::span<const double> t, std::span<const double> e, double decades) {
  auto idx = tail_window(t, e, decades);
  const std::size_t drop = idx.size() / 20;
  idx.resize(idx.size() - drop);
  if (idx.size() < 10) fail(ErrorKind::degenerate_trace, "fewer than 10 usable samples in the fit window");
  return idx;
}

ModelFit fit_linear_family(ModelKind kind, const std::vector<double>& x, const std::vector<double>& y) {
  const Line line = least_squares(x, y);
  ModelFit f;
  f.kind = kind;
  f.scale = std::exp(line.intercept);
  f.parameter = -line.slope;
  f.residual_rms = line.rms;
  return f;
}

ModelFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  auto evaluate = [&](double log_b) {
    const double b = std::exp(log_b);
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = std::pow(t[i], b);
    ModelFit f = fit_linear_family(ModelKind::exponential, x, y);
    f.power = b;
    return f;
  };
  const double lo = std::log(0.05);
  const double hi = std::log(5.0);
  constexpr int kScan = 120;
  int best = 0;
  double best_rms = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double r = evaluate(lo + (hi - lo) * i / kScan).residual_rms;
    if (r < best_rms) {
      best_rms = r;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kScan;
  double b = lo + (hi - lo) * std::min(best + 1, kScan) / kScan;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = evaluate(c).residual_rms;
  double fd = evaluate(d).residual_rms;
  for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = evaluate(c).residual_rms;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = evaluate(d).residual_rms;
    }
  }
  return evaluate(0.5 * (a + b));
}

int complexity(ModelKind k) {
  switch (k) {
    case ModelKind::plateau: return 0;
    case ModelKind::power: return 1;
    case ModelKind::logarithmic: return 2;
    case ModelKind::exponential: return 3;
  }
  return 4;
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::power: return "power";
    case ModelKind::exponential: return "exponential";
    case ModelKind::logarithmic: return "logarithmic";
    case ModelKind::plateau: return "plateau";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::sandwich_ok: return "sandwich_ok";
    case Verdict::upper_only_ok: return "upper_only_ok";
    case Verdict::violated: return "violated";
    case Verdict::degenerate: return "degenerate";
  }
  return "unknown";
}

PowerFit fit_power_tail(std::span<const double> t, std::span<const double> e, double window_decades) {
  if (!(window_decades > 0.0)) fail(ErrorKind::degenerate_trace, "fit window must be positive");
  const auto idx = trimmed_window(t, e, window_decades);
  std::vector<double> x, y;
  for (auto i : idx) {
    x.push_back(std::log(t[i]));
    y.push_back(std::log(e[i]));
  }
  const Line line = least_squares(x, y);
  PowerFit fit;
  fit.exponent = -line.slope;
  fit.intercept = line.intercept;
  fit.residual_rms = line.rms;
  fit.t_lo = t[idx.front()];
  fit.t_hi = t[idx.back()];
  fit.points = static_cast<int>(idx.size());
  return fit;
}

ModelSelection fit_model_select(std::span<const double> t, std::span<const double> e, double window_decades) {
  const auto idx = window_decades > 0.0 ? trimmed_window(t, e, window_decades) : tail_window(t, e, 0.0);
  if (idx.size() < 10) fail(ErrorKind::degenerate_trace, "fewer than 10 usable samples");
  std::vector<double> tt, y, x_pow, x_log;
  for (auto i : idx) {
    tt.push_back(t[i]);
    y.push_back(std::log(e[i]));
    x_pow.push_back(std::log1p(t[i]));
    x_log.push_back(std::log1p(std::log1p(t[i])));
  }
  ModelSelection sel;
  sel.candidates.push_back(fit_linear_family(ModelKind::power, x_pow, y));
  sel.candidates.push_back(fit_linear_family(ModelKind::logarithmic, x_log, y));
  sel.candidates.push_back(fit_exponential(tt, y));
  {
    ModelFit plateau = fit_linear_family(ModelKind::plateau, std::vector<double>(y.size(), 0.0), y);
    plateau.parameter = plateau.scale;
    sel.candidates.push_back(plateau);
  }
  std::sort(sel.candidates.begin(), sel.candidates.end(), [](const ModelFit& a, const ModelFit& b) {
    const bool ta = a.residual_rms <= kTieRms;
    const bool tb = b.residual_rms <= kTieRms;
    if (ta && tb) return complexity(a.kind) < complexity(b.kind);
    return a.residual_rms < b.residual_rms;
  });
  sel.best = sel.candidates[0];
  const ModelFit& second = sel.candidates[1];
  if (sel.best.residual_rms <= kTieRms) {
    sel.margin = second.residual_rms <= kTieRms ? 0.0 : 1.0 - sel.best.residual_rms / second.residual_rms;
    return sel;
  }
  sel.margin = 1.0 - sel.best.residual_rms / second.residual_rms;
  if (sel.margin < kAmbiguity) {
    std::ostringstream os;
    os << "best families " << to_string(sel.best.kind) << " and " << to_string(second.kind)
       << " differ by less than 5% in residual";
    fail(ErrorKind::ambiguous_fit, os.str());
  }
  return sel;
}

DecayReport check_envelope(std::span<const double> t, std::span<const double> e, double exponent, bool two_sided,
                           double scale, double window_decades) {
  DecayReport r;
  r.envelope_exponent = exponent;
  r.envelope_scale = scale;
  r.two_sided = two_sided;
  r.predicted_exponent = exponent;
  if (t.size() != e.size() || t.empty()) {
    r.notes.push_back("empty or mismatched trace");
    return r;
  }
  if (!(exponent > 0.0)) {
    r.notes.push_back("envelope exponent must be positive");
    return r;
  }
  double max_e = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!std::isfinite(e[i]) || !std::isfinite(t[i])) finite = false;
    max_e = std::max(max_e, std::fabs(e[i]));
  }
  if (!finite) {
    r.verdict = Verdict::violated;
    r.upper_constant = std::numeric_limits<double>::infinity();
    r.notes.push_back("trace contains non-finite values");
    return r;
  }
  if (max_e <= kFloor) {
    r.notes.push_back("zero solution");
    return r;
  }
  r.lower_constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double g = std::fabs(e[i]) * (1.0 + scale * std::pow(std::max(t[i], 0.0), exponent));
    r.upper_constant = std::max(r.upper_constant, g);
    r.lower_constant = std::min(r.lower_constant, g);
  }
  try {
    const auto idx = trimmed_window(t, e, window_decades);
    std::vector<double> x, y;
    for (auto i : idx) {
      x.push_back(std::log(t[i]));
      y.push_back(std::log(e[i] * (1.0 + scale * std::pow(t[i], exponent))));
    }
    r.tail_drift = least_squares(x, y).slope;
    r.fit = fit_power_tail(t, e, window_decades);
    r.has_fit = true;
  } catch (const Error& err) {
    r.notes.push_back(std::string("tail not fitted: ") + err.what());
  }
  const double drift_tol = 0.1 * exponent;
  r.upper_ok = std::isfinite(r.upper_constant) && r.tail_drift <= drift_tol;
  r.lower_ok = r.lower_constant > 0.0 && r.tail_drift >= -drift_tol;
  if (two_sided)
    r.verdict = r.upper_ok && r.lower_ok ? Verdict::sandwich_ok : Verdict::violated;
  else
    r.verdict = r.upper_ok ? Verdict::upper_only_ok : Verdict::violated;
  if (!r.upper_ok) r.notes.push_back("upper envelope fails: constant grows over the tail");
  if (two_sided && !r.lower_ok) r.notes.push_back("lower envelope fails: constant shrinks over the tail");
  return r;
}

std::string DecayReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "verdict=" << to_string(verdict);
  if (has_fit) os << " fitted_exponent=" << fit.exponent;
  os << " predicted_exponent=" << predicted_exponent;
  if (!predicted_tag.empty()) os << " (" << predicted_tag << ")";
  os << " M=" << upper_constant;
  if (two_sided) os << " m=" << lower_constant;
  return os.str();
}

std::string DecayReport::details() const {
  std::ostringstream os;
  os.precision(10);
  os << "verdict: " << to_string(verdict) << "\n";
  os << "envelope: E(t) vs 1/(1 + " << envelope_scale << " t^" << envelope_exponent << ")"
     << (two_sided ? " two-sided\n" : " upper only\n");
  os << "upper_constant: " << upper_constant << "\n";
  os << "lower_constant: " << lower_constant << "\n";
  os << "tail_drift: " << tail_drift << " (tolerance " << 0.1 * envelope_exponent << ")\n";
  os << "upper_ok: " << (upper_ok ? "true" : "false") << "\n";
  os << "lower_ok: " << (lower_ok ? "true" : "false") << "\n";
  if (has_fit) {
    os << "fitted_exponent: " << fit.exponent << "\n";
    os << "intercept: " << fit.intercept << "\n";
    os << "fit_window: [" << fit.t_lo << ", " << fit.t_hi << "] points=" << fit.points << "\n";
    os << "residual_rms: " << fit.residual_rms << "\n";
  }
  os << "predicted_exponent: " << predicted_exponent;
  if (!predicted_tag.empty()) os << " (" << predicted_tag << ")";
  os << "\n";
  if (plateau_level > 0.0) os << "plateau_level: " << plateau_level << "\n";
  for (const auto& n : notes) os << "note: " << n << "\n";
  return os.str();
}

Series resample_log(std::span<const double> t, std::span<const double> e, double t_min, int per_decade) {
  if (t.size() != e.size() || t.size() < 2) fail(ErrorKind::degenerate_trace, "resampling needs matching series");
  if (!(t_min > 0.0) || per_decade < 1) fail(ErrorKind::degenerate_trace, "resampling needs t_min > 0");
  const double t_max = t.back();
  Series out;
  if (!(t_max > t_min)) return out;
  const int count = static_cast<int>(std::floor(std::log10(t_max / t_min) * per_decade + 1e-9));
  std::size_t j = 1;
  for (int i = 0; i <= count + 1; ++i) {
    const double s = i <= count ? t_min * std::pow(10.0, static_cast<double>(i) / per_decade) : t_max;
    if (i == count + 1 && !(s > out.t.back())) break;
    while (j + 1 < t.size() && t[j] < s) ++j;
    const double t0 = t[j - 1], t1 = t[j];
    const double e0 = e[j - 1], e1 = e[j];
    double v;
    if (t0 > 0.0 && e0 > 0.0 && e1 > 0.0) {
      const double w = std::log(s / t0) / std::log(t1 / t0);
      v = std::exp((1.0 - w) * std::log(e0) + w * std::log(e1));
    } else {
      const double w = (s - t0) / (t1 - t0);
      v = (1.0 - w) * e0 + w * e1;
    }
    out.t.push_back(s);
    out.e.push_back(v);
  }
  return out;
}

std::vector<double> log_times(double t_min, double t_max, int per_decade, bool include_zero) {
  if (!(t_min > 0.0) || !(t_max > t_min) || per_decade < 1)
    fail(ErrorKind::inadmissible_params, "log_times needs 0 < t_min < t_max");
  std::vector<double> out;
  if (include_zero) out.push_back(0.0);
  const int count = static_cast<int>(std::ceil(std::log10(t_max / t_min) * per_decade - 1e-9));
  for (int i = 0; i < count; ++i) out.push_back(t_min * std::pow(10.0, static_cast<double>(i) / per_decade));
  out.push_back(t_max);
  return out;
}

}  // namespace fracdecay::decayfit
