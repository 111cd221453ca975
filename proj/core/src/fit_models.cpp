#include <array>
#include <cmath>
#include <string>

#include "spinfid/error.hpp"
#include "spinfid/fit.hpp"

namespace spinfid::fit {
namespace {

constexpr std::array<ParameterInfo, 4> kDampedCosine{{
    {"eta0", "signal", ParamKind::amplitude},
    {"t2star", "s", ParamKind::time},
    {"omega", "rad/s", ParamKind::rate},
    {"phi", "rad", ParamKind::angle},
}};
constexpr std::array<ParameterInfo, 2> kExponential{{
    {"amplitude", "signal", ParamKind::amplitude},
    {"tau", "s", ParamKind::time},
}};
constexpr std::array<ParameterInfo, 3> kInversionRecovery{{
    {"i_inf", "signal", ParamKind::amplitude},
    {"amplitude", "signal", ParamKind::amplitude},
    {"t1", "s", ParamKind::time},
}};
constexpr std::array<ParameterInfo, 3> kHahnEcho{{
    {"i0", "signal", ParamKind::amplitude},
    {"tm", "s", ParamKind::time},
    {"stretch", "1", ParamKind::shape},
}};

void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string(what) + " must be > 0");
}

}  // namespace

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::damped_cosine: return "damped_cosine";
    case ModelId::exponential: return "exponential";
    case ModelId::inversion_recovery: return "inversion_recovery";
    case ModelId::hahn_echo: return "hahn_echo";
  }
  return "unknown";
}

ModelId model_from_string(std::string_view name) {
  for (auto id : {ModelId::damped_cosine, ModelId::exponential, ModelId::inversion_recovery, ModelId::hahn_echo}) {
    if (to_string(id) == name) return id;
  }
  throw ValidationError("unknown model '" + std::string(name) + "'");
}

std::span<const ParameterInfo> parameter_info(ModelId id) {
  switch (id) {
    case ModelId::damped_cosine: return kDampedCosine;
    case ModelId::exponential: return kExponential;
    case ModelId::inversion_recovery: return kInversionRecovery;
    case ModelId::hahn_echo: return kHahnEcho;
  }
  return {};
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec::ModelSpec(ModelId id) : id_(id) {
  const auto info = parameter_info(id);
  fixed_.assign(info.size(), false);
  bounds_.assign(info.size(), Bounds{});
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].kind == ParamKind::time) bounds_[i].lower = 0.0;
  }
  if (id == ModelId::damped_cosine) bounds_[index_of("omega")].lower = 0.0;
  if (id == ModelId::hahn_echo) {
    bounds_[index_of("stretch")] = {0.05, 10.0};
    fixed_[index_of("stretch")] = true;
  }
}

std::size_t ModelSpec::index_of(std::string_view name) const {
  const auto info = parameter_info(id_);
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (info[i].name == name) return i;
  }
  throw ValidationError("model " + std::string(to_string(id_)) + " has no parameter '" + std::string(name) + "'");
}

std::size_t ModelSpec::free_count() const {
  std::size_t n = 0;
  for (bool f : fixed_) n += f ? 0 : 1;
  return n;
}

ModelSpec& ModelSpec::fix(std::string_view name, bool fixed) {
  fixed_[index_of(name)] = fixed;
  return *this;
}

ModelSpec& ModelSpec::set_bounds(std::string_view name, double lower, double upper) {
  bounds_[index_of(name)] = {lower, upper};
  return *this;
}

void ModelSpec::validate() const {
  const auto info = parameter_info(id_);
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (std::isnan(bounds_[i].lower) || std::isnan(bounds_[i].upper) || !(bounds_[i].lower < bounds_[i].upper)) {
      throw ValidationError("bounds for '" + std::string(info[i].name) + "' need lower < upper");
    }
  }
}

// ---------------------------------------------------------------------------
// Models

double model_damped_cosine(double t, double eta0, double t2star, double omega, double phi) {
  require_positive(t2star, "t2star");
  return eta0 * std::exp(-t / t2star) * std::cos(omega * t + phi);
}

double model_exponential(double t, double amplitude, double tau) {
  require_positive(tau, "tau");
  return amplitude * std::exp(-t / tau);
}

double model_inversion_recovery(double t, double i_inf, double amplitude, double t1) {
  require_positive(t1, "t1");
  return i_inf - amplitude * std::exp(-t / t1);
}

double model_hahn_echo(double two_tau, double i0, double tm, double stretch) {
  require_positive(tm, "tm");
  require_positive(stretch, "stretch");
  if (two_tau < 0.0) throw DomainError("echo delay must be >= 0");
  return i0 * std::exp(-std::pow(two_tau / tm, stretch));
}

double evaluate(ModelId id, double t, std::span<const double> p) {
  switch (id) {
    case ModelId::damped_cosine: return p[0] * std::exp(-t / p[1]) * std::cos(p[2] * t + p[3]);
    case ModelId::exponential: return p[0] * std::exp(-t / p[1]);
    case ModelId::inversion_recovery: return p[0] - p[1] * std::exp(-t / p[2]);
    case ModelId::hahn_echo: return p[0] * std::exp(-std::pow(std::max(t, 0.0) / p[1], p[2]));
  }
  return 0.0;
}

void gradient(ModelId id, double t, std::span<const double> p, std::span<double> out) {
  switch (id) {
    case ModelId::damped_cosine: {
      const double e = std::exp(-t / p[1]);
      const double arg = p[2] * t + p[3];
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      out[0] = e * c;
      out[1] = p[0] * e * c * t / (p[1] * p[1]);
      out[2] = -p[0] * e * s * t;
      out[3] = -p[0] * e * s;
      return;
    }
    case ModelId::exponential: {
      const double e = std::exp(-t / p[1]);
      out[0] = e;
      out[1] = p[0] * e * t / (p[1] * p[1]);
      return;
    }
    case ModelId::inversion_recovery: {
      const double e = std::exp(-t / p[2]);
      out[0] = 1.0;
      out[1] = -e;
      out[2] = -p[1] * e * t / (p[2] * p[2]);
      return;
    }
    case ModelId::hahn_echo: {
      const double u = std::max(t, 0.0) / p[1];
      if (u == 0.0) {
        out[0] = 1.0;
        out[1] = 0.0;
        out[2] = 0.0;
        return;
      }
      const double us = std::pow(u, p[2]);
      const double e = std::exp(-us);
      out[0] = e;
      out[1] = p[0] * e * p[2] * us / p[1];
      out[2] = -p[0] * e * us * std::log(u);
      return;
    }
  }
}

double FitResult::value(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return parameters[i];
  }
  throw ValidationError("fit result has no parameter '" + std::string(name) + "'");
}

double FitResult::sigma_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return sigma[i];
  }
  throw ValidationError("fit result has no parameter '" + std::string(name) + "'");
}

}  // namespace spinfid::fit
