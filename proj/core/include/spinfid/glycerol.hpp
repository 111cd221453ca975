#pragma once

namespace spinfid::analysis {

/// Dynamic viscosity (mPa s) of a water-glycerol mixture from the Cheng (2008)
/// correlation. Valid for glycerol mass fraction 0..0.6 and 278..313 K;
/// outside that window a RangeError is thrown.
double glycerol_viscosity(double glycerol_mass_fraction, double temperature);

/// Pure-component densities (kg/m^3) after Volk & Kaehler (2018).
double water_density(double temperature);
double glycerol_density(double temperature);

/// Glycerol mass fraction of a mixture prepared as water:glycerol volume
/// parts (e.g. 3:2), neglecting excess volume of mixing.
double glycerol_mass_fraction_from_volume_ratio(double water_parts, double glycerol_parts,
                                                double temperature);

}  // namespace spinfid::analysis
