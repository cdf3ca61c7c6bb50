#pragma once

// CODATA 2018 values. Everything that needs a fundamental constant reads it
// from here.

namespace selforg::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double bohr_radius = 5.29177210903e-11;  // m

inline constexpr double rb87_mass_u = 86.909180527;
inline constexpr double rb87_mass = rb87_mass_u * atomic_mass_unit;

// s-wave scattering length of 87Rb |F=1, mF=-1>, in Bohr radii.
inline constexpr double rb87_scattering_length_a0 = 100.4;

}  // namespace selforg::constants
