#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "spinfid/dynamics.hpp"
#include "spinfid/trace.hpp"

namespace spinfid::signal {

using dynamics::Helicity;

/// Pump polarization modulation: a photoelastic modulator (PEM) oscillating
/// at `pem_frequency` and a laser fired at `trigger_frequency`.
///
/// With `phase_locked` set, the trigger is derived from the PEM reference and
/// its period is snapped to the nearest half-integer number of PEM periods.
/// The nominal 50.176 kHz / 1.014 kHz pair then becomes a ratio of exactly
/// 49.5, so consecutive pulses see opposite retardation. A free-running
/// trigger uses the literal ratio and drifts out of alternation.
struct ModulationConfig {
  double pem_frequency = 50.176e3;     // Hz
  double trigger_frequency = 1.014e3;  // Hz (nominal)
  std::size_t pulses_per_point = 1000; // left/right pulse pairs averaged per delay
  double pem_phase = std::numbers::pi / 2.0;  // PEM phase at the first trigger; pi/2 = peak retardation
  bool phase_locked = true;
  double shot_noise_sigma = 0.0;  // additive Gaussian noise per shot
  double even_background = 0.0;   // helicity-independent pump-induced offset
  std::uint64_t rng_seed = dynamics::kDefaultSeed + 2;

  /// PEM periods between consecutive triggers.
  double period_ratio() const;
  double effective_trigger_frequency() const { return pem_frequency / period_ratio(); }

  /// Throws DomainError unless pem > trigger > 0 and consecutive pulses fall
  /// on opposite PEM half-cycles.
  void validate() const;
};

struct RawShotPair {
  double left_shot = 0.0;
  double right_shot = 0.0;
};

/// All shot pairs recorded at one pump-probe delay.
struct ShotRecord {
  double delay = 0.0;  // s
  std::vector<RawShotPair> pairs;
};

/// Helicity of pulses 0..n-1: sign of sin(2 pi f_pem t_k + phase) at
/// t_k = k / f_trigger.
std::vector<Helicity> pulse_helicities(const ModulationConfig& config, std::size_t n);

/// Mean of (left - right) / 2. Anything common to both helicities cancels.
double demodulate(std::span<const RawShotPair> pairs);

/// Shot pairs for given per-delay components. `spin_left` is the spin signal
/// for left-handed pumping; `oke_even`/`oke_residual` as in TraceComponents.
std::vector<RawShotPair> synthesize_shots(double spin_left, double oke_even, double oke_residual,
                                          const ModulationConfig& mod, std::uint64_t delay_index);

/// Shot pairs at one delay of the experiment in `config`. Demodulating them
/// converges to simulate_trace (left-handed pumping, noise-free) at that delay.
std::vector<RawShotPair> synthesize_raw_shots(const dynamics::ExperimentConfig& config,
                                              const ModulationConfig& mod, double delay,
                                              std::uint64_t delay_index = 0);

/// Shot records for the full time grid of `config`; per-delay streams are
/// keyed by delay index.
std::vector<ShotRecord> synthesize_shot_records(const dynamics::ExperimentConfig& config,
                                                const ModulationConfig& mod,
                                                const dynamics::SimulationOptions& options = {});

/// Demodulates every record into a trace.
TraceSeries demodulate_records(std::span<const ShotRecord> records);

}  // namespace spinfid::signal
