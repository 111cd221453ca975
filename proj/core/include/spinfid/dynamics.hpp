#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "spinfid/physics.hpp"
#include "spinfid/trace.hpp"

namespace spinfid::dynamics {

using Vec3 = std::array<double, 3>;

inline constexpr std::uint64_t kDefaultSeed = 20240517;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Pump energy at which NoiseModel::signal_per_molar is specified (J).
inline constexpr double kReferencePumpEnergy = 1e-6;

enum class Helicity { left, right };

/// Whether the probe signal follows the excited-state population.
enum class ExcitedStateCoupling { none, decay };

/// Spin polarization of one ensemble member plus the member's own g value
/// and local field offset (T).
struct BlochState {
  Vec3 polarization{0.0, 0.0, 0.0};
  double member_g = 1.74;
  double member_field_offset = 0.0;
};

/// Member-level dephasing T2(eta) = intercept + slope * eta, with eta in
/// mPa s. `t1` caps T2 at 2 * T1.
struct DecoherenceModel {
  double t2_intercept = 0.0;  // s
  double t2_slope = 0.0;      // s per mPa s
  double t1 = kInfinity;      // s

  /// Line through (eta1, t2_1) and (eta2, t2_2).
  static DecoherenceModel from_anchors(double eta1, double t2_1, double eta2, double t2_2,
                                       double t1 = kInfinity);

  /// Aqueous K2IrCl6: 8.60 ps in neat water (1.0 mPa s) and 21.9 ps in 40 %
  /// w/w glycerol at 293.15 K.
  static DecoherenceModel aqueous_default();

  /// T2 at viscosity eta (mPa s). Throws DomainError when eta <= 0 or the
  /// line gives T2 <= 0.
  double member_t2(double viscosity) const;

  void validate() const;
};

/// Time-zero optical Kerr spike: Gaussian of standard deviation `width`.
/// Only `odd_fraction` of it survives pump-odd demodulation.
struct OkeArtifact {
  double amplitude = 0.0;
  double width = 0.1e-12;
  double odd_fraction = 0.05;

  double profile(double t) const;
  double even_part(double t) const { return (1.0 - odd_fraction) * profile(t); }
  double residual_part(double t) const { return odd_fraction * profile(t); }
  void validate() const;
};

/// Signal scale and additive detection noise. The spin amplitude is
/// signal_per_molar * concentration * (pump_energy / 1 uJ).
struct NoiseModel {
  double additive_sigma = 0.0;
  double signal_per_molar = 500.0;
  std::uint64_t rng_seed = kDefaultSeed + 1;

  void validate() const;
};

/// Everything needed to synthesize one TRFE trace.
struct ExperimentConfig {
  physics::MagneticField field{0.0};  // must point along x
  physics::GValue g{1.74, 0.0174};
  DecoherenceModel decoherence = DecoherenceModel::aqueous_default();
  double viscosity = 1.0;        // mPa s
  double temperature = 294.0;    // K
  double concentration = 2e-3;   // mol/L
  double pump_energy = 1e-6;     // J
  Helicity pump_helicity = Helicity::left;
  double initialization_efficiency = 1.0;
  double excited_state_lifetime = 17e-12;  // s
  ExcitedStateCoupling excited_state_coupling = ExcitedStateCoupling::none;
  double phase_phi0 = 0.0;    // rad
  double phase_cubic = 0.0;   // rad / T^3
  OkeArtifact oke;
  NoiseModel noise;
  std::vector<double> time_grid = uniform_grid(0.0, 70e-12, 0.01e-12);
  std::size_t ensemble_size = 10000;
  std::uint64_t rng_seed = kDefaultSeed;

  /// Throws DomainError/ValidationError on the first violated invariant.
  void validate() const;
};

struct SimulationOptions {
  unsigned threads = 0;  // 0: std::thread::hardware_concurrency()
  bool include_noise = true;
  bool include_oke = true;
};

/// Per-delay contributions of a simulated trace. `spin` is the ensemble
/// signal for the configured pump helicity.
struct TraceComponents {
  std::vector<double> times;
  std::vector<double> spin;
  std::vector<double> oke_even;
  std::vector<double> oke_residual;
  std::vector<double> noise;
};

Vec3 initialize_polarization(Helicity helicity, double efficiency);

/// Exact propagation over `dt` in a static field along x: (y, z) rotate about
/// x at g muB (B + offset) / hbar and decay with T2, x decays with T1 toward 0.
BlochState evolve_bloch(const BlochState& state, double field_along_x, double t2, double t1, double dt,
                        const physics::PhysicalConstants& c = physics::codata2018);

/// Ensemble T2* combining the member rate with g-spread broadening:
/// 1/T2* = 1/T2(eta) + sigma_g muB B / (sqrt(2) hbar).
double effective_t2star(const DecoherenceModel& model, double viscosity, double field,
                        const physics::GValue& g, const physics::PhysicalConstants& c = physics::codata2018);

double excited_state_weight(double t, double lifetime,
                            ExcitedStateCoupling mode = ExcitedStateCoupling::none);

/// phi(B) = phi0 + cubic_coeff * B^3.
double phase_offset(double field, double phi0, double cubic_coeff);

/// Signed eta0 of the noise-free trace: amplitude * efficiency * helicity sign.
double signal_amplitude(const ExperimentConfig& config);

/// Larmor frequency of the ensemble centre, T2 of a member and phase, i.e. the
/// parameters of the closed-form spread-free trace.
struct ClosedFormParameters {
  double eta0;
  double t2;
  double omega;
  double phi;
};
ClosedFormParameters closed_form_parameters(const ExperimentConfig& config);

TraceComponents simulate_components(const ExperimentConfig& config, const SimulationOptions& options = {});

/// spin + OKE residual + noise at every delay in the time grid. Deterministic
/// for a given config (including seeds), independent of thread count.
TraceSeries simulate_trace(const ExperimentConfig& config, const SimulationOptions& options = {});

}  // namespace spinfid::dynamics
