#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinfid/trace.hpp"

namespace spinfid::fit {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

enum class ModelId { damped_cosine, exponential, inversion_recovery, hahn_echo };

/// How a parameter transforms when time and signal are rescaled. The solver
/// works on a dimensionless copy of the problem and uses this to map back.
enum class ParamKind { amplitude, time, rate, angle, shape };

struct ParameterInfo {
  std::string_view name;
  std::string_view unit;
  ParamKind kind;
};

std::string_view to_string(ModelId id);
/// Throws ValidationError for an unknown name.
ModelId model_from_string(std::string_view name);
std::span<const ParameterInfo> parameter_info(ModelId id);

struct Bounds {
  double lower = -kUnbounded;
  double upper = kUnbounded;
};

/// Model plus per-parameter fixed mask and bounds.
class ModelSpec {
 public:
  /// Default bounds: time constants > 0, omega >= 0, stretch > 0; the Hahn
  /// echo stretch exponent starts fixed at 1.
  explicit ModelSpec(ModelId id);

  ModelId id() const noexcept { return id_; }
  std::size_t size() const noexcept { return fixed_.size(); }
  std::size_t index_of(std::string_view name) const;

  bool is_fixed(std::size_t i) const { return fixed_[i]; }
  const Bounds& bounds(std::size_t i) const { return bounds_[i]; }
  std::size_t free_count() const;

  ModelSpec& fix(std::string_view name, bool fixed = true);
  ModelSpec& set_bounds(std::string_view name, double lower, double upper);

  /// Throws ValidationError if any lower >= upper.
  void validate() const;

 private:
  ModelId id_;
  std::vector<bool> fixed_;
  std::vector<Bounds> bounds_;
};

// Closed-form models. Each throws DomainError for non-positive time constants.

/// eta0 exp(-t / t2star) cos(omega t + phi)
double model_damped_cosine(double t, double eta0, double t2star, double omega, double phi);
/// amplitude exp(-t / tau)
double model_exponential(double t, double amplitude, double tau);
/// i_inf - amplitude exp(-t / t1); amplitude = 2 i_inf is full inversion.
double model_inversion_recovery(double t, double i_inf, double amplitude, double t1);
/// i0 exp(-(two_tau / tm)^stretch)
double model_hahn_echo(double two_tau, double i0, double tm, double stretch);

/// Model value for a parameter vector ordered as parameter_info(id).
double evaluate(ModelId id, double t, std::span<const double> params);
/// Analytic partial derivatives with respect to each parameter.
void gradient(ModelId id, double t, std::span<const double> params, std::span<double> out);

struct Window {
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
};

struct FitOptions {
  int max_iterations = 500;
  double ftol = 1e-10;           // relative cost decrease
  double gtol = 1e-10;           // infinity norm of the scaled gradient
  int consecutive_required = 3;  // iterations that must meet ftol/gtol in a row
  double lambda0 = 1e-3;
  /// Optional per-point standard deviations (same length as the trace);
  /// empty means unweighted.
  std::vector<double> sigmas;
};

struct FitResult {
  ModelId model = ModelId::damped_cosine;
  std::vector<std::string> names;
  std::vector<double> parameters;
  std::vector<double> sigma;  // NaN where undefined (fixed, or no covariance)
  std::vector<bool> fixed;
  Eigen::MatrixXd covariance;  // over all parameters; fixed rows/cols are zero
  bool covariance_valid = false;
  double residual_norm = 0.0;   // sqrt of the (weighted) residual sum of squares
  double gradient_norm = 0.0;   // infinity norm of the scaled gradient at the solution
  int n_iterations = 0;
  bool converged = false;
  /// False when the fit did not converge, the covariance is unavailable, a
  /// time constant is smaller than its own 1-sigma uncertainty, or no free
  /// amplitude reaches 5 sigma.
  bool informative = false;
  Window window;
  std::size_t n_points = 0;
  std::vector<double> cost_history;  // cost after the start and each accepted step

  double value(std::string_view name) const;
  double sigma_of(std::string_view name) const;
  double curve(double t) const { return evaluate(model, t, parameters); }
};

/// Levenberg-Marquardt with Marquardt (diagonal) scaling on the samples of
/// `trace` inside `window`. Throws DegenerateFitError if the normal matrix is
/// singular at the start point; an exhausted iteration budget is reported via
/// `converged = false`.
FitResult nonlinear_least_squares(const ModelSpec& model, const TraceSeries& trace, std::span<const double> init,
                                  Window window = {}, const FitOptions& options = {});

struct Guess {
  std::vector<double> parameters;
  bool oscillating = false;  // damped cosine only: a spectral peak was found
  bool at_bound = false;     // a time constant had to be clamped to its bound
};

/// Damped-cosine start point: omega from the dominant DFT peak of the
/// mean-removed window, T2* from a log-linear fit to the peak envelope, eta0
/// and phi by linear projection. Throws GuessError with fewer than 8 points.
Guess initial_guess_damped_cosine(const TraceSeries& trace, Window window = {});

/// Refines omega by scanning the separable least-squares residual over a
/// frequency grid with T2* held at `t2star`.
Guess scan_damped_cosine(const TraceSeries& trace, Window window, double t2star, double omega_max);

/// Start point for any model (the damped cosine delegates to the function above).
Guess initial_guess(ModelId id, const TraceSeries& trace, Window window = {});

struct ExtractOptions {
  double fit_start = 0.5e-12;  // s
  std::optional<double> fit_end;
  FitOptions fit;
};

/// Damped-cosine T2* extraction over [fit_start, end]. At zero field omega and
/// phi are fixed to 0. With `field` unknown, omega is free unless the data
/// show no oscillation.
FitResult extract_t2star(const TraceSeries& trace, std::optional<double> field, const ExtractOptions& options = {});

}  // namespace spinfid::fit
