#include "spinfid/signal_chain.hpp"

#include <cmath>
#include <random>
#include <string>

#include "parallel.hpp"
#include "spinfid/error.hpp"
#include "spinfid/random.hpp"

namespace spinfid::signal {
namespace {

constexpr double kLockTolerance = 1e-3;  // relative mismatch allowed when snapping to a half-integer ratio

// PEM phase (rad, reduced to [0, 2pi)) at pulse k.
double pulse_phase(const ModulationConfig& config, double ratio, std::size_t k) {
  const double cycles = std::fmod(static_cast<double>(k) * ratio, 1.0);
  return config.pem_phase + 2.0 * std::numbers::pi * cycles;
}

Helicity helicity_at(double phase) { return std::sin(phase) >= 0.0 ? Helicity::left : Helicity::right; }

}  // namespace

double ModulationConfig::period_ratio() const {
  const double ratio = pem_frequency / trigger_frequency;
  if (!phase_locked) return ratio;
  return std::round(2.0 * ratio) / 2.0;
}

void ModulationConfig::validate() const {
  if (!(std::isfinite(pem_frequency) && std::isfinite(trigger_frequency) && trigger_frequency > 0.0 &&
        pem_frequency > trigger_frequency)) {
    throw DomainError("modulation: need pem_frequency > trigger_frequency > 0");
  }
  if (pulses_per_point < 1) throw DomainError("modulation: pulses_per_point must be >= 1");
  if (!(std::isfinite(shot_noise_sigma) && shot_noise_sigma >= 0.0)) {
    throw DomainError("modulation: shot noise sigma must be >= 0");
  }
  if (!std::isfinite(even_background) || !std::isfinite(pem_phase)) {
    throw DomainError("modulation: background and phase must be finite");
  }
  if (std::abs(std::sin(pem_phase)) < 1e-3) {
    throw DomainError("modulation: pulses would arrive at zero PEM retardation (linear polarization)");
  }
  const double literal = pem_frequency / trigger_frequency;
  const double ratio = period_ratio();
  if (phase_locked) {
    if (std::abs(ratio - literal) > kLockTolerance * literal) {
      throw DomainError("modulation: trigger is not within tolerance of a half-integer PEM division (ratio " +
                        std::to_string(literal) + ")");
    }
    if (std::fmod(ratio, 1.0) != 0.5) {
      throw DomainError("modulation: PEM/trigger ratio " + std::to_string(ratio) +
                        " is an integer, every pulse sees the same helicity");
    }
  }
  if (helicity_at(pulse_phase(*this, ratio, 0)) == helicity_at(pulse_phase(*this, ratio, 1))) {
    throw DomainError("modulation: consecutive pulses land on the same PEM half-cycle");
  }
}

std::vector<Helicity> pulse_helicities(const ModulationConfig& config, std::size_t n) {
  if (n < 1) throw DomainError("pulse_helicities: n must be >= 1");
  config.validate();
  const double ratio = config.period_ratio();
  std::vector<Helicity> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = helicity_at(pulse_phase(config, ratio, k));
  return out;
}

double demodulate(std::span<const RawShotPair> pairs) {
  if (pairs.empty()) throw DomainError("demodulate: no shot pairs");
  double sum = 0.0;
  for (const auto& p : pairs) sum += (p.left_shot - p.right_shot) / 2.0;
  return sum / static_cast<double>(pairs.size());
}

std::vector<RawShotPair> synthesize_shots(double spin_left, double oke_even, double oke_residual,
                                          const ModulationConfig& mod, std::uint64_t delay_index) {
  const std::size_t n_pairs = mod.pulses_per_point;
  const auto helicity = pulse_helicities(mod, 2 * n_pairs);
  auto rng = substream(mod.rng_seed, kStreamShotNoise, delay_index);
  std::normal_distribution<double> noise(0.0, mod.shot_noise_sigma > 0.0 ? mod.shot_noise_sigma : 1.0);
  auto draw = [&] { return mod.shot_noise_sigma > 0.0 ? noise(rng) : 0.0; };

  const double odd = spin_left + oke_residual;
  const double even = oke_even + mod.even_background;
  std::vector<RawShotPair> pairs(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const Helicity first = helicity[2 * i];
    if (first == helicity[2 * i + 1]) {
      throw DomainError("synthesize_shots: helicity stops alternating at pulse " + std::to_string(2 * i + 1));
    }
    const double shot_a = (first == Helicity::left ? odd : -odd) + even + draw();
    const double shot_b = (first == Helicity::left ? -odd : odd) + even + draw();
    pairs[i] = first == Helicity::left ? RawShotPair{shot_a, shot_b} : RawShotPair{shot_b, shot_a};
  }
  return pairs;
}

std::vector<RawShotPair> synthesize_raw_shots(const dynamics::ExperimentConfig& config,
                                              const ModulationConfig& mod, double delay,
                                              std::uint64_t delay_index) {
  mod.validate();
  dynamics::ExperimentConfig single = config;
  single.time_grid = {delay};
  dynamics::SimulationOptions opts;
  opts.include_noise = false;
  const auto parts = dynamics::simulate_components(single, opts);
  const double sign = config.pump_helicity == Helicity::left ? 1.0 : -1.0;
  return synthesize_shots(sign * parts.spin[0], parts.oke_even[0], parts.oke_residual[0], mod, delay_index);
}

std::vector<ShotRecord> synthesize_shot_records(const dynamics::ExperimentConfig& config,
                                                const ModulationConfig& mod,
                                                const dynamics::SimulationOptions& options) {
  mod.validate();
  dynamics::SimulationOptions opts = options;
  opts.include_noise = false;
  const auto parts = dynamics::simulate_components(config, opts);
  const double sign = config.pump_helicity == Helicity::left ? 1.0 : -1.0;
  std::vector<ShotRecord> records(parts.times.size());
  detail::parallel_for(records.size(), options.threads, [&](std::size_t i) {
    records[i].delay = parts.times[i];
    records[i].pairs = synthesize_shots(sign * parts.spin[i], parts.oke_even[i], parts.oke_residual[i], mod, i);
  });
  return records;
}

TraceSeries demodulate_records(std::span<const ShotRecord> records) {
  std::vector<double> times, values;
  times.reserve(records.size());
  values.reserve(records.size());
  for (const auto& r : records) {
    times.push_back(r.delay);
    values.push_back(demodulate(r.pairs));
  }
  return TraceSeries(std::move(times), std::move(values), "demodulated shot records");
}

}  // namespace spinfid::signal
