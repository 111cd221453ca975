#include "spinfid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"
#include "spinfid/error.hpp"
#include "spinfid/physics.hpp"
#include "spinfid/random.hpp"

namespace spinfid::analysis {
namespace {

bool all_weighted(std::span<const double> sigmas) {
  if (sigmas.empty()) return false;
  return std::all_of(sigmas.begin(), sigmas.end(), [](double s) { return std::isfinite(s) && s > 0.0; });
}

void require_increasing(std::span<const double> v, const char* what) {
  if (v.empty()) throw ValidationError(std::string(what) + ": no sweep points");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ValidationError(std::string(what) + ": values must be finite");
    if (i > 0 && !(v[i] > v[i - 1])) throw ValidationError(std::string(what) + ": values must be strictly increasing");
  }
}

// Noise seed for sweep point i, so points do not share a noise realization.
std::uint64_t point_seed(std::uint64_t seed, std::size_t i) { return substream(seed, kStreamReplicate, i)(); }

}  // namespace

Estimate extract_g_from_sweep(std::span<const FieldPoint> points) {
  std::vector<FieldPoint> used;
  for (const auto& p : points) {
    if (!std::isfinite(p.field) || !std::isfinite(p.omega)) throw DomainError("field sweep: non-finite point");
    if (p.field != 0.0) used.push_back(p);
  }
  if (used.empty()) throw DomainError("field sweep: every point has zero field, g is undetermined");
  std::vector<double> sig;
  for (const auto& p : used) sig.push_back(p.sigma);
  const bool weighted = all_weighted(sig);

  double sbb = 0.0, sbw = 0.0;
  for (const auto& p : used) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    sbb += w * p.field * p.field;
    sbw += w * p.field * p.omega;
  }
  const double slope = sbw / sbb;
  const double factor = physics::codata2018.reduced_planck / physics::codata2018.bohr_magneton;
  Estimate g{slope * factor, kUndefined};
  if (used.size() >= 2) {
    double ssr = 0.0;
    for (const auto& p : used) {
      const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
      const double r = p.omega - slope * p.field;
      ssr += w * r * r;
    }
    const double s2 = ssr / static_cast<double>(used.size() - 1);
    g.sigma = std::sqrt(s2 / sbb) * factor;
  }
  return g;
}

double LineFit::predict_sigma(double x) const {
  return std::sqrt(intercept_sigma * intercept_sigma + x * x * slope_sigma * slope_sigma + 2.0 * x * covariance);
}

double LineFit::invert(double y) const {
  if (slope == 0.0) throw DomainError("cannot invert a flat line");
  return (y - intercept) / slope;
}

LineFit fit_line(std::span<const LinePoint> points) {
  if (points.size() < 2) throw DomainError("line fit needs at least two points");
  std::vector<double> sig;
  double xmin = points[0].x, xmax = points[0].x;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("line fit: non-finite point");
    sig.push_back(p.sigma);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  if (xmin == xmax) throw DomainError("line fit: all x values are identical");
  const bool weighted = all_weighted(sig);
  auto weight = [&](const LinePoint& p) { return weighted ? 1.0 / (p.sigma * p.sigma) : 1.0; };

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    const double w = weight(p);
    sw += w;
    sx += w * p.x;
    sy += w * p.y;
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double w = weight(p);
    sxx += w * (p.x - xm) * (p.x - xm);
    sxy += w * (p.x - xm) * (p.y - ym);
  }
  LineFit f;
  f.n_points = points.size();
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  if (points.size() > 2) {
    double ssr = 0.0;
    for (const auto& p : points) {
      const double r = p.y - f.predict(p.x);
      ssr += weight(p) * r * r;
    }
    const double s2 = ssr / static_cast<double>(points.size() - 2);
    f.slope_sigma = std::sqrt(s2 / sxx);
    f.intercept_sigma = std::sqrt(s2 * (1.0 / sw + xm * xm / sxx));
    f.covariance = -s2 * xm / sxx;
  }
  return f;
}

LineFit viscosity_regression(std::span<const ViscosityPoint> points) {
  std::vector<LinePoint> line;
  for (const auto& p : points) {
    if (!(p.viscosity > 0.0)) throw DomainError("viscosity regression: viscosity must be > 0");
    line.push_back({p.viscosity, p.t2star, p.sigma});
  }
  return fit_line(line);
}

void RelaxationSeries::validate() const {
  if (temperatures.size() != times.size()) throw ValidationError("relaxation series: temperature/time count mismatch");
  if (!sigmas.empty() && sigmas.size() != times.size()) {
    throw ValidationError("relaxation series: sigma count mismatch");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(temperatures[i] > 0.0) || !std::isfinite(temperatures[i])) {
      throw ValidationError("relaxation series: temperatures must be finite and > 0");
    }
    if (i > 0 && !(temperatures[i] > temperatures[i - 1])) {
      throw ValidationError("relaxation series: temperatures must be strictly increasing");
    }
    if (!(times[i] > 0.0) || !std::isfinite(times[i])) throw ValidationError("relaxation series: times must be > 0");
  }
}

Extrapolation extrapolate_t1(const RelaxationSeries& series, double fit_lo, double fit_hi, double target,
                             ExtrapolationMode mode) {
  series.validate();
  if (!(target > 0.0) || !std::isfinite(target)) throw DomainError("extrapolation target must be > 0 K");
  if (!(fit_lo <= fit_hi)) throw DomainError("fit range must have lo <= hi");
  const bool log_x = mode == ExtrapolationMode::log_log;
  const bool log_y = mode != ExtrapolationMode::linear;
  std::vector<LinePoint> pts;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double T = series.temperatures[i];
    if (T < fit_lo || T > fit_hi) continue;
    const double y = series.times[i];
    const double s = series.sigmas.empty() ? 0.0 : series.sigmas[i];
    pts.push_back({log_x ? std::log(T) : T, log_y ? std::log(y) : y, log_y ? s / y : s});
  }
  if (pts.size() < 2) {
    throw DomainError("extrapolation: fit range [" + std::to_string(fit_lo) + ", " + std::to_string(fit_hi) +
                      "] K holds " + std::to_string(pts.size()) + " points, need 2");
  }
  Extrapolation out;
  out.mode = mode;
  out.target = target;
  out.n_used = pts.size();
  out.line = fit_line(pts);
  const double x = log_x ? std::log(target) : target;
  const double y = out.line.predict(x);
  const double sy = out.line.predict_sigma(x);
  if (log_y) {
    out.value = {std::exp(y), std::exp(y) * sy};
  } else {
    out.value = {y, sy};
    out.physical = y > 0.0;
  }
  return out;
}

double detection_limit(double reference_concentration, double reference_snr, double threshold_snr,
                       double pump_energy_ratio) {
  if (!(reference_concentration > 0.0) || !(reference_snr > 0.0) || !(threshold_snr > 0.0) ||
      !(pump_energy_ratio > 0.0)) {
    throw DomainError("detection limit: concentration, SNRs and pump energy ratio must be > 0");
  }
  return reference_concentration * threshold_snr / (reference_snr * pump_energy_ratio);
}

double estimate_snr(const TraceSeries& trace, const fit::FitResult& fit) {
  const auto [i0, i1] = trace.window_indices(fit.window.start, fit.window.end);
  std::size_t free = 0;
  for (bool f : fit.fixed) free += f ? 0 : 1;
  if (i1 - i0 <= free) throw DomainError("estimate_snr: not enough samples for a residual scatter");
  double ssr = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double r = trace.values()[i] - fit.curve(trace.times()[i]);
    ssr += r * r;
  }
  const double rms = std::sqrt(ssr / static_cast<double>(i1 - i0 - free));
  if (rms == 0.0) throw DomainError("estimate_snr: residuals are exactly zero (noise-free trace)");
  return std::abs(fit.parameters[0]) / rms;
}

DeadtimeResult deadtime_truncate(const TraceSeries& trace, double deadtime, double increment) {
  if (!(deadtime >= 0.0) || !std::isfinite(deadtime)) throw DomainError("deadtime must be >= 0");
  if (!(increment > 0.0) || !std::isfinite(increment)) throw DomainError("timing increment must be > 0");
  const double tol = 1e-9 * increment;
  std::vector<double> t, y;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double ti = trace.times()[i];
    if (ti < deadtime - tol) continue;
    const double snapped = std::round(ti / increment) * increment;
    if (!t.empty() && snapped <= t.back()) continue;
    t.push_back(snapped);
    y.push_back(trace.values()[i]);
  }
  DeadtimeResult r;
  r.removed = trace.size() - t.size();
  r.empty = t.empty();
  r.trace = TraceSeries(std::move(t), std::move(y), trace.provenance());
  return r;
}

namespace {

SweepResult run_sweep(const dynamics::ExperimentConfig& config, std::span<const double> axis, SweepAxis kind,
                      const SweepOptions& options) {
  require_increasing(axis, kind == SweepAxis::field ? "field sweep" : "viscosity sweep");
  SweepResult out;
  out.axis = kind;
  out.values.assign(axis.begin(), axis.end());
  out.traces.resize(axis.size());
  out.fits.resize(axis.size());
  dynamics::SimulationOptions inner = options.simulation;
  inner.threads = 1;
  detail::parallel_for(axis.size(), options.simulation.threads, [&](std::size_t i) {
    dynamics::ExperimentConfig c = config;
    if (kind == SweepAxis::field) {
      c.field = physics::MagneticField(axis[i], c.field.axis());
    } else {
      c.viscosity = axis[i];
    }
    c.noise.rng_seed = point_seed(config.noise.rng_seed, i);
    out.traces[i] = dynamics::simulate_trace(c, inner);
    const std::optional<double> field = c.field.magnitude();
    out.fits[i] = fit::extract_t2star(out.traces[i], field, options.extract);
  });
  return out;
}

}  // namespace

SweepResult run_field_sweep(const dynamics::ExperimentConfig& config, std::span<const double> fields,
                            const SweepOptions& options) {
  SweepResult out = run_sweep(config, fields, SweepAxis::field, options);
  std::vector<FieldPoint> pts;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    pts.push_back({out.values[i], out.fits[i].value("omega"), out.fits[i].sigma_of("omega")});
  }
  out.g = extract_g_from_sweep(pts);
  return out;
}

SweepResult run_viscosity_sweep(const dynamics::ExperimentConfig& config, std::span<const double> viscosities,
                                const SweepOptions& options) {
  SweepResult out = run_sweep(config, viscosities, SweepAxis::viscosity, options);
  std::vector<ViscosityPoint> pts;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    pts.push_back({out.values[i], out.fits[i].value("t2star"), out.fits[i].sigma_of("t2star")});
  }
  if (pts.size() >= 2) out.line = viscosity_regression(pts);
  return out;
}

}  // namespace spinfid::analysis
