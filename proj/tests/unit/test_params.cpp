#include <cmath>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "selforg/error.hpp"
#include "selforg/params.hpp"

using namespace selforg;
using doctest::Approx;

TEST_CASE("recoil frequency of 87Rb at 784.5 nm") {
  const double wr = recoil_frequency(784.5e-9, constants::rb87_mass);
  CHECK(wr == Approx(oracle::recoil_frequency).epsilon(1e-8));
  CHECK(wr / constants::two_pi == Approx(3730.1).epsilon(1e-4));
}

TEST_CASE("single atom: eta = 2 lambda gives lambda") {
  ExperimentParams p;
  p.atom_number = 1.0;
  const double target = 2.0 * constants::pi * 1.0e4;
  const double eta = 2.0 * target;
  p.pump_depth = constants::hbar * eta * eta / p.single_atom_lightshift;
  const auto d = derive(p);
  CHECK(d.two_photon_rabi == Approx(eta).epsilon(1e-12));
  CHECK(d.dicke_coupling == Approx(target).epsilon(1e-12));
}

TEST_CASE("effective cavity frequency from the dispersive shift") {
  ExperimentParams p;
  p.cavity_decay = constants::two_pi * 1.3e6;
  p.single_atom_lightshift = -6.5 * p.cavity_decay / p.atom_number;
  p.pump_cavity_detuning = -constants::two_pi * 14.9e6;
  const auto d = derive(p);
  CHECK(d.cavity_frequency == Approx(constants::two_pi * (14.9e6 - 4.225e6)).epsilon(1e-12));
  CHECK(d.two_level_splitting == Approx(2.0 * d.recoil_frequency).epsilon(1e-15));
}

TEST_CASE("opposite signs of U0 and V0 are rejected") {
  ExperimentParams p;
  p.pump_depth = 1e-30;
  CHECK_THROWS_AS(derive(p), ConfigError);
  p.pump_depth = -1e-30;
  CHECK_NOTHROW(derive(p));
  CHECK_THROWS_AS(two_photon_rabi(1.0, -1.0), ConfigError);
}

TEST_CASE("eta and pump power are inverse maps") {
  ExperimentParams p;
  for (double power : {0.0, 1e-6, 3e-4, 1.3e-3}) {
    CHECK(power_from_eta(p, eta_from_power(p, power)) == Approx(power).epsilon(1e-12));
  }
  p.calibration = 0.0;
  CHECK_THROWS_AS(power_from_eta(p, 1.0), ConfigError);
}

TEST_CASE("mode functions") {
  ExperimentParams p;
  CHECK(cavity_profile(p, {}) == 1.0);
  CHECK(pump_profile(p, {}) == 1.0);
  CHECK(std::abs(cavity_profile(p, {p.pump_wavelength / 4.0, 0.0, 0.0})) < 1e-15);
  CHECK(pump_profile(p, {p.pump_waists[0], 0.0, 0.0}) == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(cavity_profile(p, {0.0, p.cavity_waist, 0.0}) == Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("external potential") {
  ExperimentParams p;
  CHECK(external_potential(p, {}) == 0.0);
  const double z = 1e-6;
  const double wz = p.trap_frequencies[2];
  const double expect = 0.5 * p.atom_mass * wz * wz * z * z;
  CHECK(external_potential(p, {0.0, 0.0, z}) == Approx(expect).epsilon(1e-15));
  ExperimentParams q;
  const double er = constants::hbar * recoil_frequency(q.pump_wavelength, q.atom_mass);
  q.pump_depth = er;
  CHECK(external_potential(q, {}) == Approx(er).epsilon(1e-15));
}

TEST_CASE("validation") {
  ExperimentParams p;
  CHECK_NOTHROW(validate(p));
  p.atom_number = 0.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = {};
  p.cavity_decay = -1.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = {};
  p.trap_frequencies[1] = 0.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("recoil units round trip") {
  const auto u = RecoilUnits::from(ExperimentParams{});
  CHECK(u.energy(u.energy_si(3.5)) == Approx(3.5));
  CHECK(u.length(1.0 / u.wavenumber) == Approx(1.0));
  CHECK(u.time(1.0 / u.recoil_frequency) == Approx(1.0));
  CHECK(u.frequency(u.recoil_frequency) == Approx(1.0));
}
