#include "selforg/params.hpp"

#include <cmath>
#include <string>

#include "selforg/error.hpp"

namespace selforg {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid parameters: " + what);
}

}  // namespace

double ExperimentParams::default_calibration() {
  const double er = constants::hbar * recoil_frequency(784.5e-9, constants::rb87_mass);
  return -25.0 * er / 1.0e-3;
}

double recoil_frequency(double wavelength, double mass) {
  const double k = constants::two_pi / wavelength;
  return constants::hbar * k * k / (2.0 * mass);
}

void validate(const ExperimentParams& p) {
  require(std::isfinite(p.atom_number) && p.atom_number >= 1.0, "atom_number must be >= 1");
  require(p.pump_wavelength > 0.0, "pump_wavelength must be > 0");
  require(p.atom_mass > 0.0, "atom_mass must be > 0");
  require(p.cavity_decay > 0.0, "cavity_decay must be > 0");
  require(std::isfinite(p.pump_cavity_detuning), "pump_cavity_detuning must be finite");
  require(std::isfinite(p.single_atom_lightshift), "single_atom_lightshift must be finite");
  require(p.cavity_waist > 0.0, "cavity_waist must be > 0");
  require(p.pump_waists[0] > 0.0 && p.pump_waists[1] > 0.0, "pump waists must be > 0");
  for (double w : p.trap_frequencies) require(w > 0.0, "trap frequencies must be > 0");
  require(p.pump_power >= 0.0, "pump_power must be >= 0");
  require(std::isfinite(p.calibration), "calibration must be finite");
  require(std::isfinite(p.scattering_length), "scattering_length must be finite");
}

double two_photon_rabi(double lightshift, double lattice_depth) {
  const double product = lightshift * lattice_depth;
  if (product < 0.0) {
    throw ConfigError(
        "inconsistent calibration: single_atom_lightshift and lattice depth have opposite "
        "signs, eta^2 = U0 V0 / hbar would be negative");
  }
  return std::sqrt(product / constants::hbar);
}

DerivedParams derive(const ExperimentParams& p) {
  validate(p);
  DerivedParams d;
  d.wavenumber = constants::two_pi / p.pump_wavelength;
  d.recoil_frequency = recoil_frequency(p.pump_wavelength, p.atom_mass);
  d.recoil_energy = constants::hbar * d.recoil_frequency;
  d.lattice_depth = p.lattice_depth();
  d.two_photon_rabi = two_photon_rabi(p.single_atom_lightshift, d.lattice_depth);
  d.dicke_coupling = d.two_photon_rabi * std::sqrt(p.atom_number) / 2.0;
  d.two_level_splitting = 2.0 * d.recoil_frequency;
  d.cavity_frequency = -p.pump_cavity_detuning + p.single_atom_lightshift * p.atom_number / 2.0;
  return d;
}

double eta_from_power(const ExperimentParams& p, double power) {
  return two_photon_rabi(p.single_atom_lightshift, p.calibration * power);
}

double power_from_eta(const ExperimentParams& p, double eta) {
  if (p.single_atom_lightshift == 0.0 || p.calibration == 0.0) {
    throw ConfigError("power_from_eta needs nonzero single_atom_lightshift and calibration");
  }
  const double depth = constants::hbar * eta * eta / p.single_atom_lightshift;
  const double power = depth / p.calibration;
  if (power < 0.0) {
    throw ConfigError("inconsistent calibration: calibration and single_atom_lightshift differ in sign");
  }
  return power;
}

double cavity_profile(const ExperimentParams& p, const Vec3& r) {
  const double k = constants::two_pi / p.pump_wavelength;
  const double w2 = p.cavity_waist * p.cavity_waist;
  return std::cos(k * r.x) * std::exp(-(r.y * r.y + r.z * r.z) / w2);
}

double pump_profile(const ExperimentParams& p, const Vec3& r) {
  const double k = constants::two_pi / p.pump_wavelength;
  const double wx = p.pump_waists[0];
  const double wy = p.pump_waists[1];
  return std::cos(k * r.z) * std::exp(-r.x * r.x / (wx * wx) - r.y * r.y / (wy * wy));
}

double external_potential(const ExperimentParams& p, const Vec3& r) {
  const auto& w = p.trap_frequencies;
  const double harmonic =
      0.5 * p.atom_mass * (w[0] * w[0] * r.x * r.x + w[1] * w[1] * r.y * r.y + w[2] * w[2] * r.z * r.z);
  const double phi = pump_profile(p, r);
  return harmonic + p.lattice_depth() * phi * phi;
}

RecoilUnits RecoilUnits::from(const ExperimentParams& p) {
  RecoilUnits u;
  u.wavenumber = constants::two_pi / p.pump_wavelength;
  u.recoil_frequency = selforg::recoil_frequency(p.pump_wavelength, p.atom_mass);
  u.recoil_energy = constants::hbar * u.recoil_frequency;
  return u;
}

}  // namespace selforg
