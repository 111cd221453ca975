#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "spinfid/error.hpp"
#include "spinfid/fit.hpp"

namespace spinfid::fit {
namespace {

constexpr std::size_t kMinGuessPoints = 8;
constexpr std::size_t kMaxSpectrumPoints = 1024;
constexpr std::size_t kMaxScanPoints = 512;
constexpr std::size_t kMaxScanFrequencies = 4000;
constexpr double kPeakOverMedian = 3.0;

struct Samples {
  std::vector<double> t, y;
  double span() const { return t.back() - t.front(); }
};

Samples collect(const TraceSeries& trace, Window w, std::size_t max_points = 0) {
  const auto [i0, i1] = trace.window_indices(w.start, w.end);
  const std::size_t n = i1 - i0;
  std::size_t stride = 1;
  if (max_points > 0 && n > max_points) stride = (n + max_points - 1) / max_points;
  Samples s;
  for (std::size_t i = i0; i < i1; i += stride) {
    s.t.push_back(trace.times()[i]);
    s.y.push_back(trace.values()[i]);
  }
  return s;
}

void require_points(const Samples& s) {
  if (s.t.size() < kMinGuessPoints) {
    throw GuessError("initial guess needs at least " + std::to_string(kMinGuessPoints) + " samples in the window, got " +
                     std::to_string(s.t.size()));
  }
}

double median_spacing(const Samples& s) {
  std::vector<double> dt(s.t.size() - 1);
  for (std::size_t i = 0; i + 1 < s.t.size(); ++i) dt[i] = s.t[i + 1] - s.t[i];
  std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
  return dt[dt.size() / 2];
}

// Weighted regression of ln|y| on t using points whose weight is y^2.
// Returns the decay constant if the slope is negative.
std::optional<double> log_linear_decay(std::span<const double> t, std::span<const double> y) {
  double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] == 0.0) continue;
    const double w = y[i] * y[i];
    const double l = std::log(std::abs(y[i]));
    sw += w;
    st += w * t[i];
    sl += w * l;
    stt += w * t[i] * t[i];
    stl += w * t[i] * l;
  }
  const double det = sw * stt - st * st;
  if (!(det > 0.0)) return std::nullopt;
  const double slope = (sw * stl - st * sl) / det;
  if (!(slope < 0.0)) return std::nullopt;
  return -1.0 / slope;
}

// Decay of the dominant-sign samples that rise clearly above the noise.
std::optional<double> monotone_decay(const Samples& s, double offset = 0.0) {
  double peak = 0.0;
  for (double v : s.y) {
    if (std::abs(v - offset) > std::abs(peak)) peak = v - offset;
  }
  std::vector<double> t, y;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double v = s.y[i] - offset;
    if (v * peak > 0.0 && std::abs(v) > 0.2 * std::abs(peak)) {
      t.push_back(s.t[i]);
      y.push_back(v);
    }
  }
  if (t.size() < 2) return std::nullopt;
  return log_linear_decay(t, y);
}

// Clamp a time-constant estimate into [dt, 10 span].
double clamp_time(double tau, const Samples& s, bool& at_bound) {
  const double lo = median_spacing(s);
  const double hi = 10.0 * s.span();
  if (!(tau >= lo)) {
    at_bound = true;
    return lo;
  }
  if (tau > hi) {
    at_bound = true;
    return hi;
  }
  return tau;
}

struct Projection {
  double eta0 = 0.0;
  double phi = 0.0;
  double ssr = 0.0;
};

// Linear least squares for a, b in exp(-t/T2) (a cos wt - b sin wt).
Projection project(const Samples& s, double t2, double omega) {
  double caa = 0, cab = 0, cbb = 0, ya = 0, yb = 0, yy = 0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double e = std::exp(-s.t[i] / t2);
    const double fa = e * std::cos(omega * s.t[i]);
    const double fb = -e * std::sin(omega * s.t[i]);
    caa += fa * fa;
    cab += fa * fb;
    cbb += fb * fb;
    ya += fa * s.y[i];
    yb += fb * s.y[i];
    yy += s.y[i] * s.y[i];
  }
  Projection p;
  const double det = caa * cbb - cab * cab;
  if (omega == 0.0 || !(det > 1e-12 * caa * cbb)) {
    const double a = caa > 0.0 ? ya / caa : 0.0;
    p.eta0 = a;
    p.phi = 0.0;
    p.ssr = yy - a * ya;
    return p;
  }
  const double a = (cbb * ya - cab * yb) / det;
  const double b = (caa * yb - cab * ya) / det;
  p.eta0 = std::hypot(a, b);
  p.phi = std::atan2(b, a);
  p.ssr = yy - a * ya - b * yb;
  return p;
}

// Parabolic refinement of a sampled extremum at index k.
double refine_peak(std::span<const double> x, std::span<const double> f, std::size_t k) {
  if (k == 0 || k + 1 >= f.size()) return x[k];
  const double denom = f[k - 1] - 2.0 * f[k] + f[k + 1];
  if (denom == 0.0) return x[k];
  const double off = 0.5 * (f[k - 1] - f[k + 1]) / denom;
  return x[k] + std::clamp(off, -0.5, 0.5) * (x[k + 1] - x[k]);
}

Guess finish(const Samples& s, double t2, double omega, bool oscillating, bool at_bound) {
  const Projection p = project(s, t2, omega);
  Guess g;
  g.parameters = {p.eta0, t2, omega, p.phi};
  g.oscillating = oscillating;
  g.at_bound = at_bound;
  return g;
}

}  // namespace

Guess initial_guess_damped_cosine(const TraceSeries& trace, Window window) {
  const Samples s = collect(trace, window, kMaxSpectrumPoints);
  require_points(s);
  const std::size_t n = s.t.size();
  const double dt = median_spacing(s);
  const double span = s.span();
  if (!(span > 0.0)) throw GuessError("window has zero time span");

  double mean = 0.0;
  for (double v : s.y) mean += v;
  mean /= static_cast<double>(n);

  // Zero-padded (4x) direct DFT of the mean-removed samples up to Nyquist.
  const double d_omega = 2.0 * std::numbers::pi / (4.0 * (span + dt));
  const double nyquist = std::numbers::pi / dt;
  const auto n_freq = static_cast<std::size_t>(nyquist / d_omega) + 1;
  std::vector<double> omega(n_freq), power(n_freq);
  for (std::size_t k = 0; k < n_freq; ++k) {
    omega[k] = static_cast<double>(k) * d_omega;
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = omega[k] * (s.t[i] - s.t.front());
      re += (s.y[i] - mean) * std::cos(ph);
      im -= (s.y[i] - mean) * std::sin(ph);
    }
    power[k] = re * re + im * im;
  }
  std::size_t k_peak = 1;
  for (std::size_t k = 1; k < n_freq; ++k) {
    if (power[k] > power[k_peak]) k_peak = k;
  }
  std::vector<double> sorted(power.begin() + 1, power.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  // A peak in the first four bins is indistinguishable from a plain decay
  // over this window (less than one full period).
  const bool oscillating = k_peak >= 4 && power[k_peak] > kPeakOverMedian * median;

  bool at_bound = false;
  if (!oscillating) {
    const auto tau = monotone_decay(s);
    const double t2 = clamp_time(tau.value_or(10.0 * span), s, at_bound);
    return finish(s, t2, 0.0, false, at_bound || !tau);
  }

  const double w = refine_peak(omega, power, k_peak);
  // Envelope: largest |y| in each half period.
  const double half = std::numbers::pi / w;
  std::vector<double> et, ey;
  double best_t = s.t.front(), best_y = 0.0, seg_end = s.t.front() + half;
  double global = 0.0;
  for (double v : s.y) global = std::max(global, std::abs(v));
  for (std::size_t i = 0; i <= n; ++i) {
    if (i == n || s.t[i] >= seg_end) {
      if (std::abs(best_y) > 0.1 * global) {
        et.push_back(best_t);
        ey.push_back(std::abs(best_y));
      }
      if (i == n) break;
      best_y = 0.0;
      while (s.t[i] >= seg_end) seg_end += half;
    }
    if (std::abs(s.y[i]) > std::abs(best_y)) {
      best_y = s.y[i];
      best_t = s.t[i];
    }
  }
  const auto tau = et.size() >= 2 ? log_linear_decay(et, ey) : std::nullopt;
  const double t2 = clamp_time(tau.value_or(span / 2.0), s, at_bound);
  return finish(s, t2, w, true, at_bound || !tau);
}

Guess scan_damped_cosine(const TraceSeries& trace, Window window, double t2star, double omega_max) {
  if (!(t2star > 0.0) || !(omega_max > 0.0) || !std::isfinite(omega_max)) {
    throw DomainError("scan_damped_cosine: t2star and omega_max must be > 0");
  }
  const Samples s = collect(trace, window, kMaxScanPoints);
  require_points(s);
  const double span = s.span();
  // Step of a quarter of the Fourier resolution.
  double step = std::numbers::pi / (2.0 * span);
  auto n_freq = static_cast<std::size_t>(omega_max / step) + 1;
  if (n_freq > kMaxScanFrequencies) {
    n_freq = kMaxScanFrequencies;
    step = omega_max / static_cast<double>(n_freq - 1);
  }
  std::vector<double> omega(n_freq), ssr(n_freq);
  for (std::size_t k = 0; k < n_freq; ++k) {
    omega[k] = static_cast<double>(k) * step;
    ssr[k] = project(s, t2star, omega[k]).ssr;
  }
  const auto k_best = static_cast<std::size_t>(std::min_element(ssr.begin(), ssr.end()) - ssr.begin());
  const double w = std::max(0.0, refine_peak(omega, ssr, k_best));
  return finish(s, t2star, w, w > 0.0, false);
}

Guess initial_guess(ModelId id, const TraceSeries& trace, Window window) {
  if (id == ModelId::damped_cosine) return initial_guess_damped_cosine(trace, window);
  const Samples s = collect(trace, window);
  require_points(s);
  bool at_bound = false;
  Guess g;
  switch (id) {
    case ModelId::exponential: {
      const auto tau = monotone_decay(s);
      const double t = clamp_time(tau.value_or(s.span() / 3.0), s, at_bound);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double e = std::exp(-s.t[i] / t);
        num += e * s.y[i];
        den += e * e;
      }
      g.parameters = {num / den, t};
      g.at_bound = at_bound || !tau;
      return g;
    }
    case ModelId::inversion_recovery: {
      const std::size_t n = s.y.size();
      const double tail = (s.y[n - 1] + s.y[n - 2] + s.y[n - 3]) / 3.0;
      const auto tau = monotone_decay(s, tail);
      const double t1 = clamp_time(tau.value_or(s.span() / 3.0), s, at_bound);
      // Linear least squares for (i_inf, amplitude) at fixed t1.
      double s1 = 0, se = 0, see = 0, sy = 0, sey = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = -std::exp(-s.t[i] / t1);
        s1 += 1.0;
        se += e;
        see += e * e;
        sy += s.y[i];
        sey += e * s.y[i];
      }
      const double det = s1 * see - se * se;
      const double i_inf = det > 0.0 ? (see * sy - se * sey) / det : tail;
      const double amp = det > 0.0 ? (s1 * sey - se * sy) / det : 2.0 * tail;
      g.parameters = {i_inf, amp, t1};
      g.at_bound = at_bound || !tau;
      return g;
    }
    case ModelId::hahn_echo: {
      for (double t : s.t) {
        if (t < 0.0) throw GuessError("echo delays must be >= 0");
      }
      const auto tau = monotone_decay(s);
      const double tm = clamp_time(tau.value_or(s.span() / 3.0), s, at_bound);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double e = std::exp(-s.t[i] / tm);
        num += e * s.y[i];
        den += e * e;
      }
      g.parameters = {num / den, tm, 1.0};
      g.at_bound = at_bound || !tau;
      return g;
    }
    case ModelId::damped_cosine: break;
  }
  return g;
}

namespace {

bool better(const FitResult& a, const FitResult& b) {
  if (a.converged != b.converged) return a.converged;
  return a.residual_norm < b.residual_norm;
}

// With omega free the pair (eta0, phi) and (-eta0, phi + pi) describe the same
// curve; report eta0 >= 0 and phi in (-pi, pi].
void canonicalize(FitResult& r) {
  if (r.fixed[3]) return;
  if (r.parameters[0] < 0.0) {
    r.parameters[0] = -r.parameters[0];
    r.parameters[3] += std::numbers::pi;
    r.covariance.row(0) *= -1.0;
    r.covariance.col(0) *= -1.0;
  }
  r.parameters[3] = std::remainder(r.parameters[3], 2.0 * std::numbers::pi);
  if (r.parameters[3] <= -std::numbers::pi) r.parameters[3] += 2.0 * std::numbers::pi;
}

}  // namespace

FitResult extract_t2star(const TraceSeries& trace, std::optional<double> field, const ExtractOptions& options) {
  if (!std::isfinite(options.fit_start)) throw ValidationError("fit start must be finite");
  if (field && !(*field >= 0.0)) throw DomainError("field must be >= 0");
  const Window window{options.fit_start, options.fit_end.value_or(std::numeric_limits<double>::infinity())};
  if (!(window.end > window.start)) throw ValidationError("fit window end must be after its start");

  const Guess first = initial_guess_damped_cosine(trace, window);
  const bool static_decay = (field && *field == 0.0) || (!field && !first.oscillating);

  ModelSpec spec(ModelId::damped_cosine);
  if (static_decay) {
    spec.fix("omega").fix("phi");
    const Samples s = collect(trace, window);
    Guess g = finish(s, first.parameters[1], 0.0, false, first.at_bound);
    return nonlinear_least_squares(spec, trace, g.parameters, window, options.fit);
  }

  // Oscillating: the spectral start plus a frequency scan at the guessed T2*.
  std::vector<Guess> starts;
  if (first.oscillating) starts.push_back(first);
  const Samples s = collect(trace, window, kMaxSpectrumPoints);
  const double omega_max = std::numbers::pi / median_spacing(s);
  Guess scanned = scan_damped_cosine(trace, window, first.parameters[1], omega_max);
  if (!(scanned.parameters[2] > 0.0)) {
    // Field is on but no period fits in the window: start from a quarter turn.
    const Samples all = collect(trace, window);
    scanned = finish(all, first.parameters[1], std::numbers::pi / (2.0 * all.span()), true, scanned.at_bound);
  }
  starts.push_back(scanned);

  std::optional<FitResult> best;
  std::optional<DegenerateFitError> first_error;
  for (const auto& g : starts) {
    try {
      FitResult r = nonlinear_least_squares(spec, trace, g.parameters, window, options.fit);
      if (!best || better(r, *best)) best = std::move(r);
    } catch (const DegenerateFitError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (!best) throw *first_error;
  canonicalize(*best);
  return *best;
}

}  // namespace spinfid::fit
