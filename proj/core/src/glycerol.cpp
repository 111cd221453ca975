#include "spinfid/glycerol.hpp"

#include <cmath>
#include <string>

#include "spinfid/error.hpp"

namespace spinfid::analysis {
namespace {

constexpr double kKelvinOffset = 273.15;

double to_celsius(double temperature) { return temperature - kKelvinOffset; }

}  // namespace

double glycerol_viscosity(double glycerol_mass_fraction, double temperature) {
  if (!(glycerol_mass_fraction >= 0.0 && glycerol_mass_fraction <= 0.6)) {
    throw RangeError("glycerol_viscosity: mass fraction " + std::to_string(glycerol_mass_fraction) +
                     " outside [0, 0.6]");
  }
  if (!(temperature >= 278.0 && temperature <= 313.0)) {
    throw RangeError("glycerol_viscosity: temperature " + std::to_string(temperature) +
                     " K outside [278, 313] K");
  }
  const double t = to_celsius(temperature);
  const double mu_water = 1.790 * std::exp((-1230.0 - t) * t / (36100.0 + 360.0 * t));
  const double mu_glycerol = 12100.0 * std::exp((-1233.0 + t) * t / (9900.0 + 70.0 * t));
  const double a = 0.705 - 0.0017 * t;
  const double b = (4.9 + 0.036 * t) * std::pow(a, 2.5);
  const double cm = glycerol_mass_fraction;
  const double alpha = 1.0 - cm + a * b * cm * (1.0 - cm) / (a * cm + b * (1.0 - cm));
  return std::pow(mu_water, alpha) * std::pow(mu_glycerol, 1.0 - alpha);
}

double water_density(double temperature) {
  const double t = to_celsius(temperature);
  return 1000.0 * (1.0 - std::pow(std::abs((t - 3.98) / 615.0), 1.71));
}

double glycerol_density(double temperature) { return 1273.0 - 0.612 * to_celsius(temperature); }

double glycerol_mass_fraction_from_volume_ratio(double water_parts, double glycerol_parts,
                                                double temperature) {
  if (!(water_parts >= 0.0 && glycerol_parts >= 0.0 && water_parts + glycerol_parts > 0.0)) {
    throw DomainError("volume parts must be >= 0 and not both zero");
  }
  const double glycerol_mass = glycerol_parts * glycerol_density(temperature);
  return glycerol_mass / (glycerol_mass + water_parts * water_density(temperature));
}

}  // namespace spinfid::analysis
