#pragma once

#include <array>
#include <numbers>

namespace spinfid::physics {

/// CODATA 2018 values, SI units. h, k_B and c are exact by definition of
/// the SI; hbar is derived from h.
struct PhysicalConstants {
  double bohr_magneton = 9.2740100783e-24;            // J/T
  double planck = 6.62607015e-34;                     // J s
  double reduced_planck = 6.62607015e-34 / (2.0 * std::numbers::pi);  // J s
  double boltzmann = 1.380649e-23;                    // J/K
  double speed_of_light = 299792458.0;                // m/s
};

inline constexpr PhysicalConstants codata2018{};

// Hydrodynamic radius used for [IrCl6]2- when none is supplied (m).
inline constexpr double kDefaultHydrodynamicRadius = 0.35e-9;

/// Static field of given magnitude (T) along a unit axis.
class MagneticField {
 public:
  /// Throws DomainError for negative/non-finite magnitude or an axis whose
  /// norm differs from 1 by more than 1e-12.
  explicit MagneticField(double magnitude, std::array<double, 3> axis = {1.0, 0.0, 0.0});

  double magnitude() const noexcept { return magnitude_; }
  const std::array<double, 3>& axis() const noexcept { return axis_; }

 private:
  double magnitude_;
  std::array<double, 3> axis_;
};

/// Isotropic g value and the standard deviation of its Gaussian spread over
/// the ensemble.
class GValue {
 public:
  explicit GValue(double iso, double spread_sigma = 0.0);

  double iso() const noexcept { return iso_; }
  double spread_sigma() const noexcept { return spread_sigma_; }

 private:
  double iso_;
  double spread_sigma_;
};

/// Angular Larmor frequency g * muB * B / hbar (rad/s).
double larmor_frequency(double g, double field, const PhysicalConstants& c = codata2018);

/// Field (T) at which h * nu = g * muB * B.
double resonance_field(double g, double microwave_freq, const PhysicalConstants& c = codata2018);

/// g value resonant at `field` (T) for microwave frequency `microwave_freq` (Hz).
double g_from_resonance(double field, double microwave_freq, const PhysicalConstants& c = codata2018);

/// Wavenumber (cm^-1) to energy (J) and back.
double wavenumber_to_joule(double wavenumber, const PhysicalConstants& c = codata2018);
double joule_to_wavenumber(double energy, const PhysicalConstants& c = codata2018);

/// Boltzmann fraction of the lower of two levels split by `delta_soc` (cm^-1)
/// with the given degeneracies.
double ground_level_population(double delta_soc, double temperature, int degeneracy_lower,
                               int degeneracy_upper, const PhysicalConstants& c = codata2018);

/// Stokes-Einstein-Debye rotational correlation time 4 pi eta r^3 / (3 kB T).
/// Viscosity in Pa s, radius in m, temperature in K; returns seconds.
double rotational_correlation_time(double viscosity, double hydrodynamic_radius, double temperature,
                                   const PhysicalConstants& c = codata2018);

}  // namespace spinfid::physics
