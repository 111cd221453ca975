#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinfid/error.hpp"
#include "spinfid/fit.hpp"

namespace spinfid::fit {
namespace {

constexpr double kLambdaMax = 1e16;
constexpr double kLambdaMin = 1e-12;
constexpr double kRankTolerance = 1e-10;
// A fit that stalls (no step lowers the cost at any damping) counts as
// converged only if the scaled gradient is at least this small.
constexpr double kStallGradient = 1e-6;
constexpr double kExactResidual = 1e-13;
// Fitting pure noise picks the strongest noise feature (frequency, onset), so
// its amplitude looks significant at the 2-3 sigma level. A signal must clear
// this many sigma to count as detected.
constexpr double kAmplitudeSignificance = 5.0;

double scale_for(ParamKind kind, double t_scale, double y_scale) {
  switch (kind) {
    case ParamKind::amplitude: return y_scale;
    case ParamKind::time: return t_scale;
    case ParamKind::rate: return 1.0 / t_scale;
    case ParamKind::angle:
    case ParamKind::shape: return 1.0;
  }
  return 1.0;
}

// Dimensionless copy of the problem on the selected samples.
struct Problem {
  ModelId model;
  std::vector<double> t, y, sqrt_w;
  std::vector<std::size_t> free;  // indices into the full parameter vector
  std::vector<double> lower, upper;
  bool weighted = false;

  std::size_t n() const { return t.size(); }
  std::size_t p() const { return free.size(); }

  double cost(const std::vector<double>& params, Eigen::VectorXd& r) const {
    r.resize(static_cast<Eigen::Index>(n()));
    double c = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
      const double ri = sqrt_w[i] * (y[i] - evaluate(model, t[i], params));
      r[static_cast<Eigen::Index>(i)] = ri;
      c += ri * ri;
    }
    return 0.5 * c;
  }

  void jacobian(const std::vector<double>& params, Eigen::MatrixXd& J) const {
    J.resize(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(p()));
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < n(); ++i) {
      gradient(model, t[i], params, g);
      for (std::size_t k = 0; k < p(); ++k) {
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sqrt_w[i] * g[free[k]];
      }
    }
  }
};

// Largest |cos| between the residual vector and any Jacobian column. The
// residual norm is floored at `floor` so an exact fit reports ~0.
double scaled_gradient_norm(const Eigen::MatrixXd& J, const Eigen::VectorXd& r, double floor) {
  const double rn = std::max(r.norm(), floor);
  if (rn == 0.0) return 0.0;
  double out = 0.0;
  for (Eigen::Index k = 0; k < J.cols(); ++k) {
    const double cn = J.col(k).norm();
    if (cn == 0.0) continue;
    out = std::max(out, std::abs(J.col(k).dot(r)) / (cn * rn));
  }
  return out;
}

void check_identifiable(const Eigen::MatrixXd& J, const Problem& prob, std::span<const ParameterInfo> info) {
  Eigen::MatrixXd Jn = J;
  std::vector<std::string> zero;
  for (Eigen::Index k = 0; k < Jn.cols(); ++k) {
    const double cn = Jn.col(k).norm();
    if (!(cn > 0.0) || !std::isfinite(cn)) {
      zero.emplace_back(info[prob.free[static_cast<std::size_t>(k)]].name);
    } else {
      Jn.col(k) /= cn;
    }
  }
  if (!zero.empty()) {
    std::ostringstream os;
    os << "model has no sensitivity to";
    for (const auto& z : zero) os << ' ' << z;
    os << " at the start point";
    throw DegenerateFitError("singular normal matrix at the start point", os.str());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jn, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] > kRankTolerance * s[0]) return;
  const Eigen::VectorXd v = svd.matrixV().col(s.size() - 1);
  std::ostringstream os;
  os << "parameters";
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > 0.1) os << ' ' << info[prob.free[static_cast<std::size_t>(k)]].name;
  }
  os << " are not separately identifiable from these samples";
  throw DegenerateFitError("singular normal matrix at the start point", os.str());
}

}  // namespace

FitResult nonlinear_least_squares(const ModelSpec& spec, const TraceSeries& trace, std::span<const double> init,
                                  Window window, const FitOptions& options) {
  spec.validate();
  const ModelId model = spec.id();
  const auto info = parameter_info(model);
  const std::size_t np = info.size();
  if (init.size() != np) {
    throw ValidationError("start vector has " + std::to_string(init.size()) + " values, model " +
                          std::string(to_string(model)) + " needs " + std::to_string(np));
  }
  for (std::size_t i = 0; i < np; ++i) {
    if (!std::isfinite(init[i])) throw ValidationError("start value for '" + std::string(info[i].name) + "' is not finite");
  }
  if (!options.sigmas.empty() && options.sigmas.size() != trace.size()) {
    throw ValidationError("sigmas must match the trace length");
  }
  if (options.max_iterations < 1 || options.consecutive_required < 1 || !(options.lambda0 > 0.0)) {
    throw ValidationError("fit options: max_iterations, consecutive_required and lambda0 must be positive");
  }

  const auto [i0, i1] = trace.window_indices(window.start, window.end);
  Problem prob;
  prob.model = model;
  prob.weighted = !options.sigmas.empty();
  for (std::size_t i = 0; i < np; ++i) {
    if (!spec.is_fixed(i)) prob.free.push_back(i);
  }
  const std::size_t n = i1 - i0;
  if (prob.free.empty()) throw ValidationError("all parameters are fixed");
  if (n < prob.free.size()) {
    throw ValidationError("fit window holds " + std::to_string(n) + " samples for " +
                          std::to_string(prob.free.size()) + " free parameters");
  }

  const auto ts = trace.times();
  const auto ys = trace.values();
  double t_scale = 0.0, y_scale = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    t_scale = std::max(t_scale, std::abs(ts[i]));
    y_scale = std::max(y_scale, std::abs(ys[i]));
  }
  if (t_scale == 0.0) t_scale = 1.0;
  if (y_scale == 0.0) y_scale = 1.0;

  prob.t.reserve(n);
  prob.y.reserve(n);
  prob.sqrt_w.reserve(n);
  for (std::size_t i = i0; i < i1; ++i) {
    prob.t.push_back(ts[i] / t_scale);
    prob.y.push_back(ys[i] / y_scale);
    if (prob.weighted) {
      const double s = options.sigmas[i];
      if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("sigmas must be finite and > 0");
      prob.sqrt_w.push_back(y_scale / s);
    } else {
      prob.sqrt_w.push_back(1.0);
    }
  }

  std::vector<double> scale(np);
  std::vector<double> params(np);
  for (std::size_t i = 0; i < np; ++i) scale[i] = scale_for(info[i].kind, t_scale, y_scale);
  for (const std::size_t i : prob.free) {
    double lo = spec.bounds(i).lower / scale[i];
    const double hi = spec.bounds(i).upper / scale[i];
    if (info[i].kind == ParamKind::time) lo = std::max(lo, 1e-9);
    if (info[i].kind == ParamKind::shape) lo = std::max(lo, 1e-6);
    prob.lower.push_back(lo);
    prob.upper.push_back(hi);
  }
  for (std::size_t i = 0; i < np; ++i) {
    params[i] = init[i] / scale[i];
    if (spec.is_fixed(i) && info[i].kind == ParamKind::time && !(params[i] > 0.0)) {
      throw DomainError("fixed time constant '" + std::string(info[i].name) + "' must be > 0");
    }
  }
  for (std::size_t k = 0; k < prob.p(); ++k) {
    double& v = params[prob.free[k]];
    v = std::clamp(v, prob.lower[k], prob.upper[k]);
  }

  // Cost in caller units, for the history.
  const double cost_unit = prob.weighted ? 1.0 : y_scale * y_scale;

  // Residual norms below this are round-off: the model interpolates the data.
  double y_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) y_norm += prob.sqrt_w[i] * prob.y[i] * prob.sqrt_w[i] * prob.y[i];
  const double exact_floor = kExactResidual * std::sqrt(y_norm);

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  double cost = prob.cost(params, r);
  if (!std::isfinite(cost)) throw DegenerateFitError("model is not finite at the start point", "check the start values");
  prob.jacobian(params, J);
  check_identifiable(J, prob, info);

  FitResult result;
  result.cost_history.push_back(cost * cost_unit);
  double lambda = options.lambda0;
  int consecutive = 0;
  int iter = 0;
  bool converged = false;
  std::vector<double> trial(np);
  Eigen::VectorXd r_trial;

  while (iter < options.max_iterations) {
    const double gnorm = scaled_gradient_norm(J, r, exact_floor);
    if (gnorm <= options.gtol || r.norm() <= exact_floor) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    Eigen::VectorXd D = A.diagonal();
    const double dmax = D.maxCoeff();
    for (Eigen::Index k = 0; k < D.size(); ++k) D[k] = std::max(D[k], 1e-15 * dmax);

    bool accepted = false;
    double new_cost = cost;
    while (lambda <= kLambdaMax) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * D;
      const Eigen::VectorXd delta = M.ldlt().solve(g);
      trial = params;
      for (std::size_t k = 0; k < prob.p(); ++k) {
        const double v = params[prob.free[k]] + delta[static_cast<Eigen::Index>(k)];
        trial[prob.free[k]] = std::clamp(v, prob.lower[k], prob.upper[k]);
      }
      new_cost = prob.cost(trial, r_trial);
      if (std::isfinite(new_cost) && new_cost < cost) {
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    ++iter;
    if (!accepted) {
      // No damping lowers the cost: the start of a stationary point.
      converged = gnorm <= kStallGradient || r.norm() <= exact_floor;
      break;
    }
    const double rel = cost > 0.0 ? (cost - new_cost) / cost : 0.0;
    params = trial;
    cost = new_cost;
    r = r_trial;
    prob.jacobian(params, J);
    result.cost_history.push_back(cost * cost_unit);
    lambda = std::max(lambda / 10.0, kLambdaMin);
    consecutive = rel < options.ftol ? consecutive + 1 : 0;
    if (consecutive >= options.consecutive_required) {
      converged = true;
      break;
    }
  }

  result.model = model;
  result.n_iterations = iter;
  result.converged = converged;
  result.gradient_norm = scaled_gradient_norm(J, r, exact_floor);
  result.window = window;
  result.n_points = n;
  result.residual_norm = std::sqrt(2.0 * cost * cost_unit);
  result.names.reserve(np);
  result.parameters.resize(np);
  result.fixed.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    result.names.emplace_back(info[i].name);
    result.parameters[i] = params[i] * scale[i];
    result.fixed[i] = spec.is_fixed(i);
  }

  result.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
  result.sigma.assign(np, std::numeric_limits<double>::quiet_NaN());
  const std::size_t p = prob.p();
  if (n > p) {
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s.size() > 0 && s[0] > 0.0 && s[s.size() - 1] > 1e-14 * s[0]) {
      const double s2 = 2.0 * cost / static_cast<double>(n - p);
      const Eigen::MatrixXd inv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
          const auto ia = static_cast<Eigen::Index>(prob.free[a]);
          const auto ib = static_cast<Eigen::Index>(prob.free[b]);
          result.covariance(ia, ib) = s2 * inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *
                                      scale[prob.free[a]] * scale[prob.free[b]];
        }
      }
      result.covariance_valid = result.covariance.allFinite();
    }
  }
  if (result.covariance_valid) {
    for (const std::size_t i : prob.free) {
      result.sigma[i] = std::sqrt(result.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    }
  }

  bool informative = result.converged && result.covariance_valid;
  bool any_amplitude = false;
  double best_z = 0.0;
  for (const std::size_t i : prob.free) {
    if (info[i].kind == ParamKind::time && !(result.sigma[i] < result.parameters[i])) informative = false;
    if (info[i].kind == ParamKind::amplitude) {
      any_amplitude = true;
      best_z = std::max(best_z, std::abs(result.parameters[i]) / result.sigma[i]);
    }
  }
  if (any_amplitude && !(best_z >= kAmplitudeSignificance)) informative = false;
  result.informative = informative;
  return result;
}

}  // namespace spinfid::fit
