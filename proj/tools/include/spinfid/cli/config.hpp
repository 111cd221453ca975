#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinfid/analysis.hpp"
#include "spinfid/dynamics.hpp"
#include "spinfid/signal_chain.hpp"

namespace spinfid::cli {

using Json = nlohmann::ordered_json;

// Config files are JSON with one section per module. Units are part of the
// key names (field_t, step_ps, ...). Unknown keys are errors.
//
// Every numeric default below matches configs/h2o.json.

struct TimeGridSettings {
  double start_ps = 0.0;
  double stop_ps = 70.0;
  double step_ps = 0.01;
};

struct ExperimentSettings {
  double field_t = 0.0;
  double g_iso = 1.74;
  double g_spread = 0.0174;
  double viscosity_mpas = 1.0;
  std::optional<double> glycerol_mass_fraction;  // when set, viscosity comes from the correlation
  double temperature_k = 294.0;
  double concentration_molar = 2e-3;
  double pump_energy_uj = 1.0;
  std::string pump_helicity = "left";
  double initialization_efficiency = 1.0;
  double excited_state_lifetime_ps = 17.0;
  std::string excited_state_coupling = "none";
  double phase_phi0_rad = 0.0;
  double phase_cubic_rad_per_t3 = 0.0;
  std::uint64_t ensemble_size = 10000;
  TimeGridSettings time_grid;
};

struct DecoherenceSettings {
  double t2_intercept_ps;
  double t2_slope_ps_per_mpas;
  std::optional<double> t1_ps;  // empty: no T1 limit
};

struct OkeSettings {
  double amplitude = 0.0;
  double width_ps = 0.1;
  double odd_fraction = 0.05;
};

struct NoiseSettings {
  double additive_sigma = 1.0 / 300.0;
  double signal_per_molar = 500.0;
};

struct ModulationSettings {
  double pem_frequency_hz = 50.176e3;
  double trigger_frequency_hz = 1.014e3;
  std::uint64_t pulses_per_point = 1000;
  double pem_phase_rad = 1.5707963267948966;
  bool phase_locked = true;
  double shot_noise_sigma = 0.0;
  double even_background = 0.0;
};

struct FitSettings {
  std::string model = "damped_cosine";
  double fit_start_ps = 0.5;
  std::optional<double> fit_end_ps;
  std::optional<double> field_t;  // known field for `fit`; empty: unknown
  bool stretch_free = false;
  int max_iterations = 500;
};

struct SweepSettings {
  std::vector<double> fields_t{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> viscosities_mpas;
  std::vector<double> glycerol_mass_fractions{0.0, 0.1, 0.2, 0.3, 0.4};
};

struct SensitivitySettings {
  double threshold_snr = 3.0;
  std::optional<double> reference_snr;   // empty: measured from a simulated reference trace
  std::optional<double> pump_energy_uj;  // empty: same as the experiment
};

struct ExtrapolationSettings {
  double fit_lo_k = 12.0;
  double fit_hi_k = 20.0;
  double target_k = 294.0;
  std::string mode = "log_log";
};

struct DeadtimeSettings {
  bool enabled = false;
  double deadtime_ns = 120.0;
  double increment_ns = 2.0;
};

struct RunConfig {
  std::uint64_t seed = dynamics::kDefaultSeed;
  ExperimentSettings experiment;
  DecoherenceSettings decoherence = default_decoherence();
  OkeSettings oke;
  NoiseSettings noise;
  ModulationSettings modulation;
  FitSettings fit;
  SweepSettings sweep;
  SensitivitySettings sensitivity;
  ExtrapolationSettings extrapolation;
  DeadtimeSettings deadtime;

  static DecoherenceSettings default_decoherence();

  /// Library configs derived from the settings. Seeds: experiment = seed,
  /// trace noise = seed + 1, shot noise = seed + 2.
  dynamics::ExperimentConfig experiment_config() const;
  signal::ModulationConfig modulation_config() const;
  /// Viscosity actually used (mPa s), from the glycerol fraction if set.
  double resolved_viscosity() const;
  /// Sweep viscosities: explicit list, else the glycerol fractions mapped
  /// through the correlation at the experiment temperature.
  std::vector<double> sweep_viscosities() const;
  analysis::ExtrapolationMode extrapolation_mode() const;

  /// Throws DomainError/RangeError/ValidationError.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are ValidationErrors; JSON
/// syntax errors are ParseErrors with a line number. Missing keys keep
/// their defaults. The result is validated.
RunConfig config_from_json(const Json& j);
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; config_from_json(config_to_json(c)) reproduces c.
Json config_to_json(const RunConfig& c);

}  // namespace spinfid::cli
