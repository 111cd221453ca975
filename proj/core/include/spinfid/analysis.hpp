#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spinfid/dynamics.hpp"
#include "spinfid/fit.hpp"
#include "spinfid/glycerol.hpp"
#include "spinfid/trace.hpp"

namespace spinfid::analysis {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/// A value with a 1-sigma uncertainty; sigma is NaN when it cannot be
/// estimated (e.g. a single point).
struct Estimate {
  double value = 0.0;
  double sigma = kUndefined;
  bool sigma_defined() const { return std::isfinite(sigma); }
};

// ---------------------------------------------------------------------------
// g from a field sweep

struct FieldPoint {
  double field = 0.0;  // T
  double omega = 0.0;  // rad/s
  double sigma = 0.0;  // rad/s; <= 0 or NaN on every point means unweighted
};

/// Weighted regression of omega on B through the origin; g = slope hbar / muB.
/// Zero-field points are skipped. The uncertainty uses the scatter of the
/// residuals (n - 1 degrees of freedom), so it is undefined for one point.
/// Throws DomainError when no point has a non-zero field.
Estimate extract_g_from_sweep(std::span<const FieldPoint> points);

// ---------------------------------------------------------------------------
// Straight lines

struct LinePoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;  // <= 0 or NaN on every point means unweighted
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_sigma = kUndefined;
  double intercept_sigma = kUndefined;
  double covariance = kUndefined;  // cov(slope, intercept)
  std::size_t n_points = 0;

  double predict(double x) const { return intercept + slope * x; }
  double predict_sigma(double x) const;
  /// x at which the line reaches y. Throws DomainError for a flat line.
  double invert(double y) const;
};

/// Weighted least-squares line. Uncertainties scale with the residual
/// scatter (n - 2 degrees of freedom); undefined for two points. Throws
/// DomainError with fewer than two distinct x.
LineFit fit_line(std::span<const LinePoint> points);

struct ViscosityPoint {
  double viscosity = 0.0;  // mPa s
  double t2star = 0.0;     // s
  double sigma = 0.0;      // s
};

/// T2* = intercept + slope * eta. Slope in s per mPa s.
LineFit viscosity_regression(std::span<const ViscosityPoint> points);

// ---------------------------------------------------------------------------
// Relaxation extrapolation

enum class RelaxationKind { t1, tm };

struct RelaxationSeries {
  RelaxationKind kind = RelaxationKind::t1;
  std::vector<double> temperatures;  // K, strictly increasing
  std::vector<double> times;         // s, > 0
  std::vector<double> sigmas;        // s; empty or one per point

  void validate() const;
};

/// log_log: ln T1 linear in ln T (power law). semi_log: ln T1 linear in T.
/// linear: T1 linear in T.
enum class ExtrapolationMode { log_log, semi_log, linear };

struct Extrapolation {
  ExtrapolationMode mode = ExtrapolationMode::log_log;
  double target = 0.0;  // K
  Estimate value;       // s
  LineFit line;         // in the mode's coordinates
  std::size_t n_used = 0;
  /// A linear-mode prediction may be non-physical (<= 0).
  bool physical = true;
};

/// Fits the points with fit_lo <= T <= fit_hi and evaluates at `target`.
/// Throws DomainError with fewer than two points in range.
Extrapolation extrapolate_t1(const RelaxationSeries& series, double fit_lo, double fit_hi, double target,
                             ExtrapolationMode mode = ExtrapolationMode::log_log);

// ---------------------------------------------------------------------------
// Sensitivity

/// Lowest concentration reaching `threshold_snr` if the signal scales
/// linearly with concentration and with pump energy at fixed noise.
/// `pump_energy_ratio` is new / reference pump energy.
double detection_limit(double reference_concentration, double reference_snr, double threshold_snr,
                       double pump_energy_ratio = 1.0);

/// |eta0| over the RMS residual of `fit` inside its window.
double estimate_snr(const TraceSeries& trace, const fit::FitResult& fit);

// ---------------------------------------------------------------------------
// Pulse-EPR deadtime

struct DeadtimeResult {
  TraceSeries trace;
  bool empty = true;
  std::size_t removed = 0;
};

/// Drops samples earlier than `deadtime`, snaps the rest to multiples of
/// `increment` and keeps the first sample on each grid time.
DeadtimeResult deadtime_truncate(const TraceSeries& trace, double deadtime = 120e-9, double increment = 2e-9);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { field, viscosity };

struct SweepOptions {
  fit::ExtractOptions extract;
  dynamics::SimulationOptions simulation;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::field;
  std::vector<double> values;  // T or mPa s, strictly increasing
  std::vector<TraceSeries> traces;
  std::vector<fit::FitResult> fits;
  std::optional<Estimate> g;     // field sweeps
  std::optional<LineFit> line;   // viscosity sweeps
};

/// Simulates and fits one trace per field; each point gets its own noise
/// stream. Points run in parallel (simulation.threads); the result does not
/// depend on the thread count.
SweepResult run_field_sweep(const dynamics::ExperimentConfig& config, std::span<const double> fields,
                            const SweepOptions& options = {});

/// Same for viscosities, followed by viscosity_regression.
SweepResult run_viscosity_sweep(const dynamics::ExperimentConfig& config, std::span<const double> viscosities,
                                const SweepOptions& options = {});

}  // namespace spinfid::analysis
