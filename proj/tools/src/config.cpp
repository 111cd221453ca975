#include "spinfid/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spinfid/error.hpp"
#include "spinfid/io.hpp"

namespace spinfid::cli {
namespace {

std::string type_name(const Json& j) { return j.type_name(); }

// Reads keys from one JSON object and rejects any key nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("config: '" + path_ + "' must be an object, got " + type_name(j_));
  }

  const Json* get(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = get(key)) out = as_number(*v, key);
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const Json* v = get(key)) {
      if (v->is_null()) {
        out.reset();
      } else {
        out = as_number(*v, key);
      }
    }
  }

  void integer(const std::string& key, std::uint64_t& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_unsigned()) throw ValidationError("config: '" + where(key) + "' must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_integer()) throw ValidationError("config: '" + where(key) + "' must be an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = get(key)) {
      if (!v->is_boolean()) throw ValidationError("config: '" + where(key) + "' must be true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = get(key)) {
      if (!v->is_string()) throw ValidationError("config: '" + where(key) + "' must be a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const Json* v = get(key)) {
      if (!v->is_array()) throw ValidationError("config: '" + where(key) + "' must be an array of numbers");
      out.clear();
      for (const auto& e : *v) out.push_back(as_number(e, key));
    }
  }

  std::optional<Section> child(const std::string& key) {
    if (const Json* v = get(key)) return Section(*v, where(key));
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) throw ValidationError("config: unknown key '" + where(key) + "'");
    }
  }

 private:
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double as_number(const Json& v, const std::string& key) const {
    if (!v.is_number()) throw ValidationError("config: '" + where(key) + "' must be a number, got " + type_name(v));
    return v.get<double>();
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

dynamics::Helicity helicity_from(const std::string& s) {
  if (s == "left") return dynamics::Helicity::left;
  if (s == "right") return dynamics::Helicity::right;
  throw ValidationError("config: experiment.pump_helicity must be \"left\" or \"right\"");
}

dynamics::ExcitedStateCoupling coupling_from(const std::string& s) {
  if (s == "none") return dynamics::ExcitedStateCoupling::none;
  if (s == "decay") return dynamics::ExcitedStateCoupling::decay;
  throw ValidationError("config: experiment.excited_state_coupling must be \"none\" or \"decay\"");
}

}  // namespace

DecoherenceSettings RunConfig::default_decoherence() {
  const auto m = dynamics::DecoherenceModel::aqueous_default();
  return {m.t2_intercept * 1e12, m.t2_slope * 1e12, std::nullopt};
}

double RunConfig::resolved_viscosity() const {
  if (experiment.glycerol_mass_fraction) {
    return analysis::glycerol_viscosity(*experiment.glycerol_mass_fraction, experiment.temperature_k);
  }
  return experiment.viscosity_mpas;
}

std::vector<double> RunConfig::sweep_viscosities() const {
  if (!sweep.viscosities_mpas.empty()) return sweep.viscosities_mpas;
  std::vector<double> out;
  for (double f : sweep.glycerol_mass_fractions) out.push_back(analysis::glycerol_viscosity(f, experiment.temperature_k));
  return out;
}

analysis::ExtrapolationMode RunConfig::extrapolation_mode() const {
  if (extrapolation.mode == "log_log") return analysis::ExtrapolationMode::log_log;
  if (extrapolation.mode == "semi_log") return analysis::ExtrapolationMode::semi_log;
  if (extrapolation.mode == "linear") return analysis::ExtrapolationMode::linear;
  throw ValidationError("config: extrapolation.mode must be log_log, semi_log or linear");
}

dynamics::ExperimentConfig RunConfig::experiment_config() const {
  dynamics::ExperimentConfig c;
  const auto& e = experiment;
  c.field = physics::MagneticField(e.field_t);
  c.g = physics::GValue(e.g_iso, e.g_spread);
  c.decoherence.t2_intercept = decoherence.t2_intercept_ps * 1e-12;
  c.decoherence.t2_slope = decoherence.t2_slope_ps_per_mpas * 1e-12;
  c.decoherence.t1 = decoherence.t1_ps ? *decoherence.t1_ps * 1e-12 : dynamics::kInfinity;
  c.viscosity = resolved_viscosity();
  c.temperature = e.temperature_k;
  c.concentration = e.concentration_molar;
  c.pump_energy = e.pump_energy_uj * 1e-6;
  c.pump_helicity = helicity_from(e.pump_helicity);
  c.initialization_efficiency = e.initialization_efficiency;
  c.excited_state_lifetime = e.excited_state_lifetime_ps * 1e-12;
  c.excited_state_coupling = coupling_from(e.excited_state_coupling);
  c.phase_phi0 = e.phase_phi0_rad;
  c.phase_cubic = e.phase_cubic_rad_per_t3;
  c.oke.amplitude = oke.amplitude;
  c.oke.width = oke.width_ps * 1e-12;
  c.oke.odd_fraction = oke.odd_fraction;
  c.noise.additive_sigma = noise.additive_sigma;
  c.noise.signal_per_molar = noise.signal_per_molar;
  c.noise.rng_seed = seed + 1;
  c.rng_seed = seed;
  c.ensemble_size = static_cast<std::size_t>(e.ensemble_size);
  const auto& g = e.time_grid;
  if (!(g.step_ps > 0.0) || !(g.stop_ps >= g.start_ps) || !std::isfinite(g.start_ps) || !std::isfinite(g.stop_ps)) {
    throw ValidationError("config: experiment.time_grid needs step_ps > 0 and stop_ps >= start_ps");
  }
  if ((g.stop_ps - g.start_ps) / g.step_ps > 1e7) throw ValidationError("config: time grid exceeds 1e7 points");
  c.time_grid = uniform_grid(g.start_ps * 1e-12, g.stop_ps * 1e-12, g.step_ps * 1e-12);
  return c;
}

signal::ModulationConfig RunConfig::modulation_config() const {
  signal::ModulationConfig m;
  m.pem_frequency = modulation.pem_frequency_hz;
  m.trigger_frequency = modulation.trigger_frequency_hz;
  m.pulses_per_point = static_cast<std::size_t>(modulation.pulses_per_point);
  m.pem_phase = modulation.pem_phase_rad;
  m.phase_locked = modulation.phase_locked;
  m.shot_noise_sigma = modulation.shot_noise_sigma;
  m.even_background = modulation.even_background;
  m.rng_seed = seed + 2;
  return m;
}

void RunConfig::validate() const {
  experiment_config().validate();
  modulation_config().validate();
  fit::model_from_string(fit.model);
  if (!std::isfinite(fit.fit_start_ps)) throw ValidationError("config: fit.fit_start_ps must be finite");
  if (fit.fit_end_ps && !(*fit.fit_end_ps > fit.fit_start_ps)) {
    throw ValidationError("config: fit.fit_end_ps must be after fit.fit_start_ps");
  }
  if (fit.field_t && !(*fit.field_t >= 0.0)) throw DomainError("config: fit.field_t must be >= 0");
  if (fit.max_iterations < 1) throw ValidationError("config: fit.max_iterations must be >= 1");
  for (double f : sweep.fields_t) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw DomainError("config: sweep.fields_t must be finite and >= 0");
  }
  for (double v : sweep.viscosities_mpas) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("config: sweep.viscosities_mpas must be > 0");
  }
  sweep_viscosities();  // range-checks glycerol fractions
  if (!(sensitivity.threshold_snr > 0.0)) throw DomainError("config: sensitivity.threshold_snr must be > 0");
  if (sensitivity.reference_snr && !(*sensitivity.reference_snr > 0.0)) {
    throw DomainError("config: sensitivity.reference_snr must be > 0");
  }
  if (sensitivity.pump_energy_uj && !(*sensitivity.pump_energy_uj > 0.0)) {
    throw DomainError("config: sensitivity.pump_energy_uj must be > 0");
  }
  extrapolation_mode();
  if (!(extrapolation.fit_lo_k <= extrapolation.fit_hi_k) || !(extrapolation.target_k > 0.0)) {
    throw DomainError("config: extrapolation needs fit_lo_k <= fit_hi_k and target_k > 0");
  }
  if (!(deadtime.deadtime_ns >= 0.0) || !(deadtime.increment_ns > 0.0)) {
    throw DomainError("config: deadtime needs deadtime_ns >= 0 and increment_ns > 0");
  }
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  Section root(j, "");
  root.integer("seed", c.seed);
  if (auto s = root.child("experiment")) {
    auto& e = c.experiment;
    s->number("field_t", e.field_t);
    s->number("g_iso", e.g_iso);
    s->number("g_spread", e.g_spread);
    s->number("viscosity_mpas", e.viscosity_mpas);
    s->optional_number("glycerol_mass_fraction", e.glycerol_mass_fraction);
    s->number("temperature_k", e.temperature_k);
    s->number("concentration_molar", e.concentration_molar);
    s->number("pump_energy_uj", e.pump_energy_uj);
    s->string("pump_helicity", e.pump_helicity);
    s->number("initialization_efficiency", e.initialization_efficiency);
    s->number("excited_state_lifetime_ps", e.excited_state_lifetime_ps);
    s->string("excited_state_coupling", e.excited_state_coupling);
    s->number("phase_phi0_rad", e.phase_phi0_rad);
    s->number("phase_cubic_rad_per_t3", e.phase_cubic_rad_per_t3);
    s->integer("ensemble_size", e.ensemble_size);
    if (auto g = s->child("time_grid")) {
      g->number("start_ps", e.time_grid.start_ps);
      g->number("stop_ps", e.time_grid.stop_ps);
      g->number("step_ps", e.time_grid.step_ps);
      g->finish();
    }
    s->finish();
  }
  if (auto s = root.child("decoherence")) {
    s->number("t2_intercept_ps", c.decoherence.t2_intercept_ps);
    s->number("t2_slope_ps_per_mpas", c.decoherence.t2_slope_ps_per_mpas);
    s->optional_number("t1_ps", c.decoherence.t1_ps);
    s->finish();
  }
  if (auto s = root.child("oke")) {
    s->number("amplitude", c.oke.amplitude);
    s->number("width_ps", c.oke.width_ps);
    s->number("odd_fraction", c.oke.odd_fraction);
    s->finish();
  }
  if (auto s = root.child("noise")) {
    s->number("additive_sigma", c.noise.additive_sigma);
    s->number("signal_per_molar", c.noise.signal_per_molar);
    s->finish();
  }
  if (auto s = root.child("modulation")) {
    auto& m = c.modulation;
    s->number("pem_frequency_hz", m.pem_frequency_hz);
    s->number("trigger_frequency_hz", m.trigger_frequency_hz);
    s->integer("pulses_per_point", m.pulses_per_point);
    s->number("pem_phase_rad", m.pem_phase_rad);
    s->boolean("phase_locked", m.phase_locked);
    s->number("shot_noise_sigma", m.shot_noise_sigma);
    s->number("even_background", m.even_background);
    s->finish();
  }
  if (auto s = root.child("fit")) {
    s->string("model", c.fit.model);
    s->number("fit_start_ps", c.fit.fit_start_ps);
    s->optional_number("fit_end_ps", c.fit.fit_end_ps);
    s->optional_number("field_t", c.fit.field_t);
    s->boolean("stretch_free", c.fit.stretch_free);
    s->integer("max_iterations", c.fit.max_iterations);
    s->finish();
  }
  if (auto s = root.child("sweep")) {
    s->numbers("fields_t", c.sweep.fields_t);
    s->numbers("viscosities_mpas", c.sweep.viscosities_mpas);
    s->numbers("glycerol_mass_fractions", c.sweep.glycerol_mass_fractions);
    s->finish();
  }
  if (auto s = root.child("sensitivity")) {
    s->number("threshold_snr", c.sensitivity.threshold_snr);
    s->optional_number("reference_snr", c.sensitivity.reference_snr);
    s->optional_number("pump_energy_uj", c.sensitivity.pump_energy_uj);
    s->finish();
  }
  if (auto s = root.child("extrapolation")) {
    s->number("fit_lo_k", c.extrapolation.fit_lo_k);
    s->number("fit_hi_k", c.extrapolation.fit_hi_k);
    s->number("target_k", c.extrapolation.target_k);
    s->string("mode", c.extrapolation.mode);
    s->finish();
  }
  if (auto s = root.child("deadtime")) {
    s->boolean("enabled", c.deadtime.enabled);
    s->number("deadtime_ns", c.deadtime.deadtime_ns);
    s->number("increment_ns", c.deadtime.increment_ns);
    s->finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')) + 1;
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), line);
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_file(path)); }

Json config_to_json(const RunConfig& c) {
  const auto& e = c.experiment;
  Json j;
  j["seed"] = c.seed;
  Json ex;
  ex["field_t"] = e.field_t;
  ex["g_iso"] = e.g_iso;
  ex["g_spread"] = e.g_spread;
  ex["viscosity_mpas"] = e.viscosity_mpas;
  ex["glycerol_mass_fraction"] = nullable(e.glycerol_mass_fraction);
  ex["temperature_k"] = e.temperature_k;
  ex["concentration_molar"] = e.concentration_molar;
  ex["pump_energy_uj"] = e.pump_energy_uj;
  ex["pump_helicity"] = e.pump_helicity;
  ex["initialization_efficiency"] = e.initialization_efficiency;
  ex["excited_state_lifetime_ps"] = e.excited_state_lifetime_ps;
  ex["excited_state_coupling"] = e.excited_state_coupling;
  ex["phase_phi0_rad"] = e.phase_phi0_rad;
  ex["phase_cubic_rad_per_t3"] = e.phase_cubic_rad_per_t3;
  ex["ensemble_size"] = e.ensemble_size;
  ex["time_grid"] = Json{{"start_ps", e.time_grid.start_ps}, {"stop_ps", e.time_grid.stop_ps}, {"step_ps", e.time_grid.step_ps}};
  j["experiment"] = ex;
  j["decoherence"] = Json{{"t2_intercept_ps", c.decoherence.t2_intercept_ps},
                          {"t2_slope_ps_per_mpas", c.decoherence.t2_slope_ps_per_mpas},
                          {"t1_ps", nullable(c.decoherence.t1_ps)}};
  j["oke"] = Json{{"amplitude", c.oke.amplitude}, {"width_ps", c.oke.width_ps}, {"odd_fraction", c.oke.odd_fraction}};
  j["noise"] = Json{{"additive_sigma", c.noise.additive_sigma}, {"signal_per_molar", c.noise.signal_per_molar}};
  const auto& m = c.modulation;
  j["modulation"] = Json{{"pem_frequency_hz", m.pem_frequency_hz},   {"trigger_frequency_hz", m.trigger_frequency_hz},
                         {"pulses_per_point", m.pulses_per_point},   {"pem_phase_rad", m.pem_phase_rad},
                         {"phase_locked", m.phase_locked},           {"shot_noise_sigma", m.shot_noise_sigma},
                         {"even_background", m.even_background}};
  j["fit"] = Json{{"model", c.fit.model},
                  {"fit_start_ps", c.fit.fit_start_ps},
                  {"fit_end_ps", nullable(c.fit.fit_end_ps)},
                  {"field_t", nullable(c.fit.field_t)},
                  {"stretch_free", c.fit.stretch_free},
                  {"max_iterations", c.fit.max_iterations}};
  j["sweep"] = Json{{"fields_t", c.sweep.fields_t},
                    {"viscosities_mpas", c.sweep.viscosities_mpas},
                    {"glycerol_mass_fractions", c.sweep.glycerol_mass_fractions}};
  j["sensitivity"] = Json{{"threshold_snr", c.sensitivity.threshold_snr},
                          {"reference_snr", nullable(c.sensitivity.reference_snr)},
                          {"pump_energy_uj", nullable(c.sensitivity.pump_energy_uj)}};
  j["extrapolation"] = Json{{"fit_lo_k", c.extrapolation.fit_lo_k},
                            {"fit_hi_k", c.extrapolation.fit_hi_k},
                            {"target_k", c.extrapolation.target_k},
                            {"mode", c.extrapolation.mode}};
  j["deadtime"] = Json{{"enabled", c.deadtime.enabled},
                       {"deadtime_ns", c.deadtime.deadtime_ns},
                       {"increment_ns", c.deadtime.increment_ns}};
  return j;
}

}  // namespace spinfid::cli
