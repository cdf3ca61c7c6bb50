#pragma once

#include <array>
#include <optional>

#include "selforg/constants.hpp"

namespace selforg {

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

// Lab-facing parameters, all in SI. Frequencies are angular (rad/s) and
// signed where the physics is signed: a red atom-pump detuning makes both
// the single-atom light shift U0 and the pump lattice depth V0 negative.
struct ExperimentParams {
  double atom_number{1.0e5};
  double pump_wavelength{784.5e-9};                    // m
  double atom_mass{constants::rb87_mass};              // kg
  double cavity_decay{constants::two_pi * 1.3e6};      // rad/s, kappa
  double pump_cavity_detuning{-constants::two_pi * 23.0e6};  // rad/s, Delta_c
  double single_atom_lightshift{-6.5 * constants::two_pi * 1.3e6 / 1.0e5};  // rad/s, U0

  // Exactly one of pump_depth / pump_power is authoritative. When
  // pump_depth is unset the depth follows from calibration * pump_power.
  std::optional<double> pump_depth;  // J, V0
  double pump_power{0.0};            // W
  double calibration{default_calibration()};  // J/W, c_cal (signed like V0)

  std::array<double, 3> trap_frequencies{constants::two_pi * 252.0, constants::two_pi * 48.0,
                                         constants::two_pi * 238.0};  // rad/s
  double cavity_waist{25e-6};                      // m
  std::array<double, 2> pump_waists{29e-6, 53e-6};  // m (w_x, w_y)
  double scattering_length{constants::rb87_scattering_length_a0 * constants::bohr_radius};

  // V0 in joules.
  double lattice_depth() const { return pump_depth ? *pump_depth : calibration * pump_power; }

  // -25 recoil energies per mW at 784.5 nm for 87Rb.
  static double default_calibration();
};

// Throws ConfigError if any invariant of ExperimentParams is violated.
void validate(const ExperimentParams& p);

struct DerivedParams {
  double wavenumber{};          // k = 2 pi / lambda_p, 1/m
  double recoil_frequency{};    // omega_r = hbar k^2 / 2m, rad/s
  double recoil_energy{};       // E_r = hbar omega_r, J
  double lattice_depth{};       // V0, J
  double two_photon_rabi{};     // eta >= 0, rad/s
  double dicke_coupling{};      // lambda = eta sqrt(N) / 2, rad/s
  double two_level_splitting{}; // omega_0 = 2 omega_r, rad/s
  double cavity_frequency{};    // omega = -Delta_c + U0 N / 2, rad/s
};

// eta^2 = U0 V0 / hbar. Requires U0 and V0 of the same sign (or either zero);
// a mixed-sign pair means an inconsistent calibration and is rejected.
DerivedParams derive(const ExperimentParams& p);

double recoil_frequency(double wavelength, double mass);

// eta for a given lattice depth (J), with the same sign rule as derive().
double two_photon_rabi(double lightshift, double lattice_depth);
// Inverse maps between pump power and eta under the linear calibration.
double eta_from_power(const ExperimentParams& p, double power);
double power_from_eta(const ExperimentParams& p, double eta);

// Mode functions at a point in metres.
//   cavity: cos(kx) exp(-(y^2+z^2)/w_c^2)
//   pump:   cos(kz) exp(-x^2/w_x^2 - y^2/w_y^2)
double cavity_profile(const ExperimentParams& p, const Vec3& r);
double pump_profile(const ExperimentParams& p, const Vec3& r);

// Harmonic trap plus pump lattice V0 phi_p^2, in joules.
double external_potential(const ExperimentParams& p, const Vec3& r);

// Reduced units: energies in E_r, lengths in 1/k, times in 1/omega_r,
// frequencies in omega_r.
struct RecoilUnits {
  double wavenumber{};
  double recoil_frequency{};
  double recoil_energy{};

  static RecoilUnits from(const ExperimentParams& p);

  double energy(double joule) const { return joule / recoil_energy; }
  double energy_si(double e) const { return e * recoil_energy; }
  double length(double metre) const { return metre * wavenumber; }
  double length_si(double l) const { return l / wavenumber; }
  double time(double second) const { return second * recoil_frequency; }
  double time_si(double t) const { return t / recoil_frequency; }
  double frequency(double rad_per_s) const { return rad_per_s / recoil_frequency; }
  double frequency_si(double f) const { return f * recoil_frequency; }
};

}  // namespace selforg
