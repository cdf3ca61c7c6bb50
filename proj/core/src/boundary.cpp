#include "selforg/boundary.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "selforg/error.hpp"
#include "selforg/param_file.hpp"

namespace selforg::boundary {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

void check_convergence(const char* name, double value, double error, double rel_tol) {
  if (!(error <= 10.0 * rel_tol * std::abs(value)) && error > 1e-300) {
    throw EngineError(std::string("overlap_integrals: ") + name + " did not converge: estimate " +
                      format_double(value) + ", error bound " + format_double(error));
  }
}

}  // namespace

double ThomasFermiProfile::density(const Vec3& r) const {
  const double s = r.x * r.x / (radii[0] * radii[0]) + r.y * r.y / (radii[1] * radii[1]) +
                   r.z * r.z / (radii[2] * radii[2]);
  return s >= 1.0 ? 0.0 : peak_density * (1.0 - s);
}

ThomasFermiProfile thomas_fermi(const ExperimentParams& p) {
  validate(p);
  if (!(p.scattering_length > 0.0)) throw ConfigError("thomas_fermi: scattering_length must be > 0");
  const auto& w = p.trap_frequencies;
  const double w_bar = std::cbrt(w[0] * w[1] * w[2]);
  const double a_ho = std::sqrt(constants::hbar / (p.atom_mass * w_bar));

  ThomasFermiProfile tf;
  tf.atom_number = p.atom_number;
  tf.coupling = 4.0 * constants::pi * constants::hbar * constants::hbar * p.scattering_length / p.atom_mass;
  tf.chemical_potential =
      0.5 * constants::hbar * w_bar * std::pow(15.0 * p.atom_number * p.scattering_length / a_ho, 0.4);
  for (int i = 0; i < 3; ++i) {
    tf.radii[i] = std::sqrt(2.0 * tf.chemical_potential / (p.atom_mass * w[i] * w[i]));
  }
  tf.peak_density = tf.chemical_potential / tf.coupling;
  return tf;
}

OverlapIntegrals overlap_integrals(const ThomasFermiProfile& tf, const ExperimentParams& p,
                                   const QuadratureOptions& opts) {
  const double k = constants::two_pi / p.pump_wavelength;
  const auto [rx, ry, rz] = tf.radii;
  const double wc2 = p.cavity_waist * p.cavity_waist;
  const double wx2 = p.pump_waists[0] * p.pump_waists[0];
  const double wy2 = p.pump_waists[1] * p.pump_waists[1];

  // Integrate over the positive octant of the unit ball (u, v, w) =
  // (x/Rx, y/Ry, z/Rz); every integrand is even in each coordinate. Each
  // nested limit is mapped through a sine so the integrands stay smooth at
  // the ellipsoid surface.
  const double half_pi = 0.5 * constants::pi;
  auto integrate = [&](auto&& weight, double& error) {
    auto over_y = [&](double u, double w) {
      const double vmax2 = 1.0 - u * u - w * w;
      if (vmax2 <= 0.0) return 0.0;
      const double vmax = std::sqrt(vmax2);
      auto f = [&](double b) {
        const double v = vmax * std::sin(b);
        return vmax * std::cos(b) * weight(u * rx, v * ry, w * rz, vmax2 - v * v);
      };
      return Kronrod::integrate(f, 0.0, half_pi, opts.max_depth, opts.rel_tol * 1e-2);
    };
    auto over_z = [&](double u) {
      const double wmax = std::sqrt(std::max(0.0, 1.0 - u * u));
      auto f = [&](double c) { return wmax * std::cos(c) * over_y(u, wmax * std::sin(c)); };
      return Kronrod::integrate(f, 0.0, half_pi, opts.max_depth, opts.rel_tol * 1e-1);
    };
    auto outer = [&](double a) { return std::cos(a) * over_z(std::sin(a)); };
    const double value = Kronrod::integrate(outer, 0.0, half_pi, opts.max_depth, opts.rel_tol, &error);
    const double scale = 8.0 * rx * ry * rz;
    error *= scale;
    return value * scale;
  };

  const double n0 = tf.peak_density;
  auto cavity_sq = [&](double x, double y, double z) {
    const double c = std::cos(k * x);
    return c * c * std::exp(-2.0 * (y * y + z * z) / wc2);
  };
  auto pump_sq = [&](double x, double y, double z) {
    const double c = std::cos(k * z);
    return c * c * std::exp(-2.0 * x * x / wx2 - 2.0 * y * y / wy2);
  };

  OverlapIntegrals out;
  out.n_eff = integrate(
      [&](double x, double y, double z, double s) { return n0 * s * cavity_sq(x, y, z) * pump_sq(x, y, z); },
      out.n_eff_error);
  out.bunching =
      integrate([&](double x, double y, double z, double s) { return n0 * s * cavity_sq(x, y, z); },
                out.bunching_error);
  const double density_sq =
      integrate([&](double, double, double, double s) { return n0 * n0 * s * s; }, out.interaction_energy_error);
  const double pref = tf.coupling / (2.0 * tf.atom_number);
  out.interaction_energy = pref * density_sq;
  out.interaction_energy_error *= pref;
  out.shifted_detuning = p.pump_cavity_detuning - p.single_atom_lightshift * out.bunching;

  check_convergence("N_eff", out.n_eff, out.n_eff_error, opts.rel_tol);
  check_convergence("B0", out.bunching, out.bunching_error, opts.rel_tol);
  check_convergence("E_int", out.interaction_energy, out.interaction_energy_error, opts.rel_tol);
  return out;
}

CriticalPump critical_pump(double delta_c, const OverlapIntegrals& integrals, const ExperimentParams& p) {
  if (!(integrals.n_eff > 0.0)) throw ConfigError("critical_pump: N_eff must be > 0");
  CriticalPump out;
  const double w_r = recoil_frequency(p.pump_wavelength, p.atom_mass);
  out.shifted_detuning = delta_c - p.single_atom_lightshift * integrals.bunching;
  out.omega0_eff = 2.0 * w_r + 4.0 * integrals.interaction_energy / constants::hbar;
  const double d = out.shifted_detuning;
  if (!(d < 0.0)) return out;

  Threshold th;
  th.lambda_eff = 0.5 * std::sqrt((d * d + p.cavity_decay * p.cavity_decay) / (-d)) * std::sqrt(out.omega0_eff);
  th.eta = th.lambda_eff / std::sqrt(integrals.n_eff);
  if (p.single_atom_lightshift != 0.0) {
    th.lattice_depth = constants::hbar * th.eta * th.eta / p.single_atom_lightshift;
    th.power = p.calibration != 0.0 ? th.lattice_depth / p.calibration : 0.0;
  }
  out.threshold = th;
  return out;
}

std::vector<BoundaryRow> boundary_curve(const std::vector<double>& delta_c, const OverlapIntegrals& integrals,
                                        const ExperimentParams& p) {
  std::vector<BoundaryRow> rows;
  rows.reserve(delta_c.size());
  for (double dc : delta_c) rows.push_back({dc, critical_pump(dc, integrals, p)});
  return rows;
}

std::vector<BoundaryRow> boundary_curve(const std::vector<double>& delta_c, const ExperimentParams& p) {
  const auto tf = thomas_fermi(p);
  return boundary_curve(delta_c, overlap_integrals(tf, p), p);
}

void write_boundary_csv(std::ostream& os, const std::vector<BoundaryRow>& rows) {
  os << "delta_c_hz,delta_tilde_hz,eta_cr,lambda_cr,p_cr_watt,transition_exists\n";
  for (const auto& r : rows) {
    os << format_double(r.delta_c / constants::two_pi) << ','
       << format_double(r.pump.shifted_detuning / constants::two_pi) << ',';
    if (r.pump.threshold) {
      const auto& t = *r.pump.threshold;
      os << format_double(t.eta / constants::two_pi) << ',' << format_double(t.lambda_eff / constants::two_pi)
         << ',' << format_double(t.power) << ",1\n";
    } else {
      os << ",,,0\n";
    }
  }
}

}  // namespace selforg::boundary
