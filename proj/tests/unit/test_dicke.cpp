#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/oracles.hpp"
#include "selforg/dicke.hpp"
#include "selforg/error.hpp"

using namespace selforg;
using namespace selforg::dicke;
using doctest::Approx;

namespace {

DickeParams closed(int n, double lambda) {
  DickeParams p;
  p.atom_number = n;
  p.lambda = lambda;
  return p;
}

Eigen::VectorXcd random_vector(Eigen::Index dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = {normal(rng), normal(rng)};
  return v.normalized();
}

}  // namespace

TEST_CASE("critical coupling") {
  CHECK(*critical_coupling(1.0, 1.0, 0.0) == Approx(0.5).epsilon(1e-15));
  CHECK(*critical_coupling(1.0, 1.0, 1.0) == Approx(0.70710678118654752).epsilon(1e-15));
  CHECK(*critical_coupling(3.0, 2.0, 0.0) == Approx(0.5 * std::sqrt(6.0)).epsilon(1e-15));
  CHECK_FALSE(critical_coupling(0.0, 1.0, 1.0).has_value());
  CHECK_FALSE(critical_coupling(-2.0, 1.0, 1.0).has_value());
  CHECK_THROWS_AS(critical_coupling(1.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("decoupled spectrum") {
  DickeParams p = closed(4, 0.0);
  p.omega = 1.3;
  p.omega0 = 0.7;
  const int cutoff = 5;
  const Eigen::MatrixXd h(build_hamiltonian(p, cutoff));
  for (int mi = 0; mi <= 4; ++mi) {
    for (int n = 0; n <= cutoff; ++n) {
      const auto i = mi * (cutoff + 1) + n;
      CHECK(h(i, i) == Approx(p.omega * n + p.omega0 * (mi - 2)).epsilon(1e-15));
    }
  }
  CHECK((h - Eigen::MatrixXd(h.diagonal().asDiagonal())).norm() == 0.0);
  const auto obs = ground_state_observables(build_hamiltonian(p, cutoff), 4, cutoff);
  CHECK(obs.energy == Approx(-p.omega0 * 2.0).epsilon(1e-12));
  CHECK(obs.photon_fraction == Approx(0.0).epsilon(1e-15));
  CHECK(obs.inversion == Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("single atom, single photon matrix") {
  const Eigen::MatrixXd h(build_hamiltonian(closed(1, 0.3), 1));
  REQUIRE(h.rows() == 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) CHECK(h(r, c) == Approx(oracle::jc_matrix[4 * r + c]).epsilon(1e-15));
  }
}

TEST_CASE("parity commutes with H") {
  DickeParams p = closed(6, 0.9);
  p.omega = 1.4;
  p.dispersive_shift = true;
  p.lightshift = -0.2;
  const int cutoff = 12;
  const Eigen::MatrixXd h(build_hamiltonian(p, cutoff));
  const Eigen::MatrixXd parity = parity_diagonal(6, cutoff).asDiagonal();
  CHECK((h * parity - parity * h).cwiseAbs().maxCoeff() < 1e-12);

  const auto vacuum = ExactState::basis(6, cutoff, 0, 0);
  CHECK((parity_transform(vacuum).amplitudes - vacuum.amplitudes).norm() < 1e-15);
  const auto one = ExactState::basis(6, cutoff, 0, 1);
  CHECK((parity_transform(one).amplitudes + one.amplitudes).norm() < 1e-15);

  ExactState s = vacuum;
  s.amplitudes = random_vector(vacuum.dimension(), 7);
  const Eigen::VectorXcd ps = parity_transform(s).amplitudes;
  const auto expect = [&](const Eigen::VectorXcd& v) { return v.dot(h.cast<cplx>() * v).real(); };
  CHECK(expect(ps) == Approx(expect(s.amplitudes)).epsilon(1e-12));
  CHECK((parity_transform(parity_transform(s)).amplitudes - s.amplitudes).norm() < 1e-14);
}

TEST_CASE("exact ground state matches dense diagonalization") {
  for (const auto& ref : oracle::ed_n8) {
    const auto obs = ground_state_observables(build_hamiltonian(closed(8, ref.lambda), 60), 8, 60);
    CAPTURE(ref.lambda);
    CHECK(obs.photon_fraction == Approx(ref.photon_fraction).epsilon(1e-8));
    CHECK(obs.inversion == Approx(ref.inversion).epsilon(1e-8));
    CHECK(obs.energy == Approx(ref.energy).epsilon(1e-10));
    CHECK(obs.gap == Approx(ref.gap).epsilon(1e-6).scale(1e-6));
    CHECK(std::abs(obs.order) < 1e-12);
  }
}

TEST_CASE("cutoff convergence") {
  const auto obs = converged_ground_state(closed(8, 1.0), 20, 1e-8);
  CHECK(obs.photon_fraction == Approx(oracle::ed_n8[5].photon_fraction).epsilon(1e-7));
  CHECK(obs.photon_cutoff >= 30);
  CHECK_THROWS_AS(converged_ground_state(closed(8, 3.0), 10, 1e-10, 10, 20), EngineError);
}

TEST_CASE("finite-size photon fraction against mean field") {
  const double lc = *critical_coupling(1.0, 1.0, 0.0);
  DickeParams p = closed(8, 2.0 * lc);
  const auto obs = converged_ground_state(p);
  const double mf = steadystate_photon_fraction(p);
  CHECK(mf == Approx(0.9375).epsilon(1e-14));
  CHECK(obs.photon_fraction > 0.5 * mf);
  CHECK(obs.photon_fraction == Approx(mf).epsilon(0.01));
}

TEST_CASE("free field decays as a damped rotation") {
  DickeParams p;
  p.omega = 2.0;
  p.kappa = 0.3;
  p.lambda = 0.0;
  SemiclassicalState s = normal_state();
  s.alpha = 1.0;
  const auto traj = integrate_semiclassical(s, p, 5.0, 0.005, 200);
  for (const auto& pt : traj.points) {
    const cplx expect = std::exp(-cplx(p.kappa, p.omega) * pt.t);
    CHECK(std::abs(pt.alpha - expect) < 1e-9);
  }
}

TEST_CASE("normal state is stationary") {
  for (double lambda : {0.0, 0.3, 2.0}) {
    DickeParams p;
    p.kappa = 1.0;
    p.lambda = lambda;
    const auto r = semiclassical_rhs(normal_state(), p);
    CHECK(std::abs(r.alpha) == 0.0);
    CHECK(std::abs(r.j_minus) == 0.0);
    CHECK(r.j_z == 0.0);
  }
}

TEST_CASE("linear instability sets in at the critical coupling") {
  for (double omega : {0.5, 1.0, 2.0}) {
    for (double kappa : {0.0, 0.5, 1.0}) {
      DickeParams p;
      p.omega = omega;
      p.kappa = kappa;
      const double lc = *critical_coupling(omega, 1.0, kappa);
      const auto found = instability_coupling(p, 0.0, 3.0 * lc);
      REQUIRE(found.has_value());
      CHECK(*found == Approx(lc).epsilon(1e-3));
    }
  }
  DickeParams p;
  p.kappa = 1.0;
  p.lambda = 0.5 * *critical_coupling(1.0, 1.0, 1.0);
  CHECK(normal_phase_growth_rate(p) < 0.0);
  p.lambda *= 4.0;
  CHECK(normal_phase_growth_rate(p) > 0.0);
}

TEST_CASE("below threshold the field decays") {
  DickeParams p;
  p.kappa = 1.0;
  p.lambda = 0.5 * *critical_coupling(1.0, 1.0, 1.0);
  const auto traj = integrate_semiclassical(seeded_state(3, 1e-2), p, 60.0, 0.01, 100);
  CHECK(traj.points.front().photon_fraction > 1e-6);
  CHECK(traj.final_state.photon_fraction() < 1e-10);
}

TEST_CASE("above threshold the field saturates with a seed-dependent sign") {
  DickeParams p;
  p.kappa = 1.0;
  p.lambda = 2.0 * *critical_coupling(1.0, 1.0, 1.0);
  SemiclassicalState plus = normal_state();
  plus.j_minus = 1e-3;
  plus.j_z = -std::sqrt(0.25 - 1e-6);
  SemiclassicalState minus = plus;
  minus.j_minus = -1e-3;
  const auto a = integrate_semiclassical(plus, p, 8000.0, 0.02, 1000);
  const auto b = integrate_semiclassical(minus, p, 8000.0, 0.02, 1000);
  CHECK(a.final_state.photon_fraction() == Approx(oracle::ode_photon_fraction_2x).epsilon(1e-6));
  CHECK(b.final_state.photon_fraction() == Approx(oracle::ode_photon_fraction_2x).epsilon(1e-6));
  CHECK(a.final_state.order() * b.final_state.order() < 0.0);
  CHECK(a.final_state.alpha.real() * b.final_state.alpha.real() < 0.0);
  CHECK(steadystate_photon_fraction(p) == Approx(oracle::ode_photon_fraction_2x).epsilon(1e-9));
}

TEST_CASE("closed system conserves the spin length") {
  DickeParams p;
  p.lambda = 1.2;
  const auto s0 = seeded_state(11, 1e-2);
  const auto traj = integrate_semiclassical(s0, p, 100.0, 0.002, 1000);
  CHECK(std::abs(traj.final_state.spin_length_sq() - s0.spin_length_sq()) < 1e-8);
  CHECK(s0.spin_length_sq() == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("steady state photon fraction") {
  DickeParams p;
  p.kappa = 0.7;
  p.omega = 1.5;
  p.omega0 = 0.8;
  p.lambda = *critical_coupling(p.omega, p.omega0, p.kappa);
  CHECK(steadystate_photon_fraction(p) == 0.0);
  p.lambda *= 0.9;
  CHECK(steadystate_photon_fraction(p) == 0.0);

  // closed-system fixed point (lambda/omega)^2 (1 - (lambda_cr/lambda)^4)
  DickeParams q;
  q.omega = 1.7;
  q.omega0 = 0.6;
  q.lambda = 1.1;
  const double lc = *critical_coupling(q.omega, q.omega0, 0.0);
  const double ratio = q.lambda / q.omega;
  CHECK(steadystate_photon_fraction(q) ==
        Approx(ratio * ratio * (1.0 - std::pow(lc / q.lambda, 4))).epsilon(1e-14));
}

TEST_CASE("step size and parameter guards") {
  DickeParams p;
  p.lambda = 1.0;
  CHECK_THROWS_AS(integrate_semiclassical(normal_state(), p, 1.0, 0.1), ConfigError);
  p.omega0 = 0.0;
  CHECK_THROWS_AS(build_hamiltonian(p, 4), ConfigError);
  CHECK_THROWS_AS(build_hamiltonian(closed(8, 1.0), 100, 100), ConfigError);
}
