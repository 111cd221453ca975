#include "spinfid/physics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spinfid/error.hpp"

namespace spinfid::physics {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool finite_nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }
bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

MagneticField::MagneticField(double magnitude, std::array<double, 3> axis)
    : magnitude_(magnitude), axis_(axis) {
  require(finite_nonnegative(magnitude), "magnetic field magnitude must be finite and >= 0");
  const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  require(std::abs(norm - 1.0) <= 1e-12, "magnetic field axis must be a unit vector");
}

GValue::GValue(double iso, double spread_sigma) : iso_(iso), spread_sigma_(spread_sigma) {
  require(finite_positive(iso), "g value must be finite and > 0");
  require(finite_nonnegative(spread_sigma), "g spread must be finite and >= 0");
  require(spread_sigma < iso, "g spread must be smaller than the isotropic g value");
}

double larmor_frequency(double g, double field, const PhysicalConstants& c) {
  require(finite_positive(g), "larmor_frequency: g must be finite and > 0");
  require(finite_nonnegative(field), "larmor_frequency: field must be finite and >= 0");
  return g * c.bohr_magneton * field / c.reduced_planck;
}

double resonance_field(double g, double microwave_freq, const PhysicalConstants& c) {
  require(finite_positive(g), "resonance_field: g must be finite and > 0");
  require(finite_positive(microwave_freq), "resonance_field: frequency must be finite and > 0");
  return c.planck * microwave_freq / (g * c.bohr_magneton);
}

double g_from_resonance(double field, double microwave_freq, const PhysicalConstants& c) {
  require(finite_positive(field), "g_from_resonance: field must be finite and > 0");
  require(finite_positive(microwave_freq), "g_from_resonance: frequency must be finite and > 0");
  return c.planck * microwave_freq / (c.bohr_magneton * field);
}

double wavenumber_to_joule(double wavenumber, const PhysicalConstants& c) {
  return wavenumber * c.planck * c.speed_of_light * 100.0;
}

double joule_to_wavenumber(double energy, const PhysicalConstants& c) {
  return energy / (c.planck * c.speed_of_light * 100.0);
}

double ground_level_population(double delta_soc, double temperature, int degeneracy_lower,
                               int degeneracy_upper, const PhysicalConstants& c) {
  require(finite_nonnegative(delta_soc), "ground_level_population: splitting must be >= 0");
  require(finite_positive(temperature), "ground_level_population: temperature must be > 0");
  require(degeneracy_lower >= 1 && degeneracy_upper >= 1,
          "ground_level_population: degeneracies must be >= 1");
  const double boltzmann_factor =
      std::exp(-wavenumber_to_joule(delta_soc, c) / (c.boltzmann * temperature));
  const double gl = degeneracy_lower;
  return gl / (gl + degeneracy_upper * boltzmann_factor);
}

double rotational_correlation_time(double viscosity, double hydrodynamic_radius, double temperature,
                                   const PhysicalConstants& c) {
  require(finite_positive(viscosity) && finite_positive(hydrodynamic_radius) &&
              finite_positive(temperature),
          "rotational_correlation_time: inputs must be finite and > 0");
  const double r3 = hydrodynamic_radius * hydrodynamic_radius * hydrodynamic_radius;
  return 4.0 * std::numbers::pi * viscosity * r3 / (3.0 * c.boltzmann * temperature);
}

}  // namespace spinfid::physics
