#include "selforg/gpe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "selforg/constants.hpp"
#include "selforg/error.hpp"
#include "selforg/fft.hpp"
#include "selforg/param_file.hpp"
#include "selforg/rng.hpp"

namespace selforg::gpe {

namespace {

using constants::pi;
using constants::two_pi;

double kinetic_energy_from_spectrum(const Grid2D& grid, std::span<const cplx> spec, double scale2) {
  double e = 0.0;
  for (int iz = 0; iz < grid.n_z; ++iz) {
    const double kz = grid.kz(iz);
    for (int ix = 0; ix < grid.n_x; ++ix) {
      const double kx = grid.kx(ix);
      e += (kx * kx + kz * kz) * std::norm(spec[grid.index(ix, iz)]);
    }
  }
  return e * scale2 * grid.cell_area() / static_cast<double>(grid.size());
}

std::vector<double> kinetic_table(const Grid2D& grid) {
  std::vector<double> k2(grid.size());
  for (int iz = 0; iz < grid.n_z; ++iz) {
    const double kz = grid.kz(iz);
    for (int ix = 0; ix < grid.n_x; ++ix) {
      const double kx = grid.kx(ix);
      k2[grid.index(ix, iz)] = kx * kx + kz * kz;
    }
  }
  return k2;
}

// 2D Thomas-Fermi chemical potential and radii for V = c_x x^2 + c_z z^2.
struct TrapFill {
  double mu{};
  double radius_x{};
  double radius_z{};
};

TrapFill trap_fill(const GpeModel& m) {
  const double cx = m.trap_coefficients[0];
  const double cz = m.trap_coefficients[1];
  TrapFill f;
  if (m.coupling > 0.0) {
    f.mu = std::sqrt(2.0 * m.coupling * m.atom_number * std::sqrt(cx * cz) / pi);
    f.radius_x = std::sqrt(f.mu / cx);
    f.radius_z = std::sqrt(f.mu / cz);
  } else {
    // Oscillator ground state exp(-sqrt(c) x^2 / 2); report 3 widths.
    f.radius_x = 3.0 / std::pow(cx, 0.25);
    f.radius_z = 3.0 / std::pow(cz, 0.25);
  }
  return f;
}

}  // namespace

// ----------------------------------------------------------------- model --

GpeModel GpeModel::from_experiment(const ExperimentParams& p, const ModelOptions& opts) {
  selforg::validate(p);
  const auto u = RecoilUnits::from(p);
  GpeModel m;
  m.units = u;
  m.atom_number = p.atom_number;
  m.kappa = u.frequency(p.cavity_decay);
  m.delta_c = u.frequency(p.pump_cavity_detuning);
  m.lightshift = u.frequency(p.single_atom_lightshift);
  m.envelopes = opts.envelopes;
  m.cavity_waist = u.length(p.cavity_waist);
  m.pump_waist_x = u.length(p.pump_waists[0]);
  m.calibration = u.energy(p.calibration);

  const double two_wr = 2.0 * u.recoil_frequency;
  if (opts.trap) {
    m.trap_coefficients = {std::pow(p.trap_frequencies[0] / two_wr, 2), std::pow(p.trap_frequencies[2] / two_wr, 2)};
  }

  if (opts.coupling) {
    m.coupling = *opts.coupling;
  } else {
    // g3D in E_r / k^3 is 8 pi a k.
    const double g3 = 8.0 * pi * p.scattering_length * u.wavenumber;
    double sigma_y = 0.0;
    if (opts.sigma_y == SigmaY::oscillator) {
      sigma_y = u.length(std::sqrt(constants::hbar / (p.atom_mass * p.trap_frequencies[1])));
    } else {
      if (!(p.scattering_length > 0.0)) throw ConfigError("gpe: thomas_fermi sigma_y needs scattering_length > 0");
      const double w_bar = std::cbrt(p.trap_frequencies[0] * p.trap_frequencies[1] * p.trap_frequencies[2]);
      const double a_ho = std::sqrt(constants::hbar / (p.atom_mass * w_bar));
      const double mu = 0.5 * constants::hbar * w_bar * std::pow(15.0 * p.atom_number * p.scattering_length / a_ho, 0.4);
      const double r_y = std::sqrt(2.0 * mu / (p.atom_mass * p.trap_frequencies[1] * p.trap_frequencies[1]));
      sigma_y = u.length(r_y) / std::sqrt(7.0);
    }
    m.coupling = g3 / (std::sqrt(two_pi) * sigma_y);
  }
  m.validate();
  return m;
}

void GpeModel::validate() const {
  if (!(atom_number >= 1.0)) throw ConfigError("gpe: atom_number must be >= 1");
  if (!(kappa > 0.0)) throw ConfigError("gpe: kappa must be > 0");
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw ConfigError("gpe: coupling must be finite and >= 0");
  if (trap_coefficients[0] < 0.0 || trap_coefficients[1] < 0.0) throw ConfigError("gpe: trap must be >= 0");
  if ((trap_coefficients[0] > 0.0) != (trap_coefficients[1] > 0.0)) {
    throw ConfigError("gpe: trap must confine both x and z or neither");
  }
  if (envelopes && !(cavity_waist > 0.0 && pump_waist_x > 0.0)) throw ConfigError("gpe: waists must be > 0");
}

PumpState PumpState::from_power(const GpeModel& m, double power) {
  if (!(power >= 0.0)) throw ConfigError("gpe: pump power must be >= 0");
  return from_depth(m, m.calibration * power);
}

PumpState PumpState::from_depth(const GpeModel& m, double depth) {
  const double product = m.lightshift * depth;
  if (product < 0.0) {
    throw ConfigError("inconsistent calibration: lattice depth and single_atom_lightshift differ in sign");
  }
  PumpState s;
  s.depth = depth;
  s.eta = std::sqrt(product);
  s.power = m.calibration != 0.0 ? depth / m.calibration : 0.0;
  return s;
}

PumpState PumpState::from_eta(const GpeModel& m, double eta) {
  if (m.lightshift == 0.0) throw ConfigError("gpe: eta needs a nonzero single_atom_lightshift");
  return from_depth(m, eta * eta / m.lightshift);
}

ModeTables ModeTables::build(const Grid2D& grid, const GpeModel& m) {
  ModeTables t;
  t.cavity_sq.resize(grid.size());
  t.pump_sq.resize(grid.size());
  t.product.resize(grid.size());
  t.trap.resize(grid.size());
  for (int iz = 0; iz < grid.n_z; ++iz) {
    const double z = grid.z(iz);
    for (int ix = 0; ix < grid.n_x; ++ix) {
      const double x = grid.x(ix);
      double pc = std::cos(x);
      double pp = std::cos(z);
      if (m.envelopes) {
        pc *= std::exp(-z * z / (m.cavity_waist * m.cavity_waist));
        pp *= std::exp(-x * x / (m.pump_waist_x * m.pump_waist_x));
      }
      const auto i = grid.index(ix, iz);
      t.cavity_sq[i] = pc * pc;
      t.pump_sq[i] = pp * pp;
      t.product[i] = pc * pp;
      t.trap[i] = m.trap_coefficients[0] * x * x + m.trap_coefficients[1] * z * z;
    }
  }
  return t;
}

// ------------------------------------------------------- cavity / order --

std::pair<double, double> order_parameters(const CondensateField& f, const ModeTables& t) {
  double theta = 0.0, bunching = 0.0;
  for (std::size_t i = 0; i < f.psi.size(); ++i) {
    const double n = std::norm(f.psi[i]);
    theta += t.product[i] * n;
    bunching += t.cavity_sq[i] * n;
  }
  const double da = f.grid.cell_area();
  return {theta * da, bunching * da};
}

std::pair<double, double> order_parameters(const CondensateField& f, const GpeModel& m) {
  return order_parameters(f, ModeTables::build(f.grid, m));
}

std::complex<double> cavity_amplitude(double theta, double bunching, double eta, const GpeModel& m) {
  return eta * theta / std::complex<double>(m.delta_c - m.lightshift * bunching, m.kappa);
}

CavityState cavity_state(const CondensateField& f, const ModeTables& t, double eta, const GpeModel& m) {
  const auto [theta, bunching] = order_parameters(f, t);
  return {cavity_amplitude(theta, bunching, eta, m), theta, bunching};
}

std::vector<double> dynamic_potential(const ModeTables& t, const PumpState& pump, std::complex<double> alpha,
                                      const GpeModel& m) {
  const double cav = m.lightshift * std::norm(alpha);
  const double interference = 2.0 * pump.eta * alpha.real();
  std::vector<double> v(t.trap.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = t.trap[i] + pump.depth * t.pump_sq[i] + cav * t.cavity_sq[i] + interference * t.product[i];
  }
  return v;
}

// --------------------------------------------------------------- energy --

namespace {

double kinetic_energy(const CondensateField& f) {
  std::vector<cplx> spec = f.psi;
  Fft2D fft(f.grid.n_x, f.grid.n_z);
  fft.forward(spec);
  return kinetic_energy_from_spectrum(f.grid, spec, 1.0);
}

// sum over the grid of (V |psi|^2 + g/2 |psi|^4) dA for a frozen alpha.
double potential_energy(const CondensateField& f, const ModeTables& t, const PumpState& pump,
                        std::complex<double> alpha, const GpeModel& m) {
  const double cav = m.lightshift * std::norm(alpha);
  const double interference = 2.0 * pump.eta * alpha.real();
  double e = 0.0;
  for (std::size_t i = 0; i < f.psi.size(); ++i) {
    const double n = std::norm(f.psi[i]);
    const double v = t.trap[i] + pump.depth * t.pump_sq[i] + cav * t.cavity_sq[i] + interference * t.product[i];
    e += (v + 0.5 * m.coupling * n) * n;
  }
  return e * f.grid.cell_area();
}

}  // namespace

EnergyParts energy(const CondensateField& f, const ModeTables& t, const PumpState& pump, const GpeModel& m) {
  EnergyParts e;
  e.kinetic = kinetic_energy(f);
  double ext = 0.0, inter = 0.0;
  for (std::size_t i = 0; i < f.psi.size(); ++i) {
    const double n = std::norm(f.psi[i]);
    ext += (t.trap[i] + pump.depth * t.pump_sq[i]) * n;
    inter += n * n;
  }
  e.external = ext * f.grid.cell_area();
  e.interaction = 0.5 * m.coupling * inter * f.grid.cell_area();
  const auto [theta, bunching] = order_parameters(f, t);
  const double d = m.delta_c - m.lightshift * bunching;
  e.cavity = pump.eta * pump.eta * theta * theta * d / (d * d + m.kappa * m.kappa);
  return e;
}

double frozen_energy(const CondensateField& f, const ModeTables& t, const PumpState& pump,
                     std::complex<double> alpha, const GpeModel& m) {
  return kinetic_energy(f) + potential_energy(f, t, pump, alpha, m);
}

// ------------------------------------------------------------ grid checks --

void validate_grid(const Grid2D& grid, const GpeModel& m) {
  const double wavelength = two_pi;
  if (grid.length_x < 4.0 * wavelength - 1e-9 || grid.length_z < 4.0 * wavelength - 1e-9) {
    throw ConfigError("grid: each extent must cover at least 4 pump wavelengths");
  }
  if (grid.points_per_wavelength_x() < 8.0 - 1e-9 || grid.points_per_wavelength_z() < 8.0 - 1e-9) {
    throw ConfigError("grid: need at least 8 points per pump wavelength on each axis");
  }
  if (m.trapped()) {
    const auto fill = trap_fill(m);
    if (grid.length_x < 6.0 * fill.radius_x || grid.length_z < 6.0 * fill.radius_z) {
      throw ConfigError("grid: extents must cover 6 Thomas-Fermi radii of the trapped cloud (need " +
                        format_double(6.0 * fill.radius_x) + " x " + format_double(6.0 * fill.radius_z) +
                        " in units of 1/k)");
    }
  }
}

void check_edge_density(const CondensateField& f, const GpeModel& m) {
  if (!m.trapped()) return;
  const auto& g = f.grid;
  double edge = 0.0;
  for (int ix = 0; ix < g.n_x; ++ix) {
    edge = std::max({edge, std::norm(f.psi[g.index(ix, 0)]), std::norm(f.psi[g.index(ix, g.n_z - 1)])});
  }
  for (int iz = 0; iz < g.n_z; ++iz) {
    edge = std::max({edge, std::norm(f.psi[g.index(0, iz)]), std::norm(f.psi[g.index(g.n_x - 1, iz)])});
  }
  const double peak = f.peak_density();
  if (edge > 1e-10 * peak) {
    throw EngineError("edge density " + format_double(edge / peak) +
                      " of peak exceeds 1e-10; enlarge the grid");
  }
}

// ------------------------------------------------------------- noise etc --

void seed_noise(CondensateField& f, std::uint64_t seed, double amplitude, bool mirrored) {
  if (amplitude == 0.0) return;
  auto rng = make_rng(seed);
  std::vector<cplx> xi(f.psi.size());
  for (auto& v : xi) v = complex_normal(rng);
  if (mirrored) {
    CondensateField tmp{f.grid, std::move(xi), f.atom_number};
    xi = shift_half_wavelength_x(tmp).psi;
  }
  for (std::size_t i = 0; i < f.psi.size(); ++i) f.psi[i] *= 1.0 + amplitude * xi[i];
  f.normalize();
}

CondensateField shift_half_wavelength_x(const CondensateField& f) {
  const double shift = pi / f.grid.dx();
  const int s = static_cast<int>(std::lround(shift));
  if (std::abs(shift - s) > 1e-9) {
    throw ConfigError("shift_half_wavelength_x: half a wavelength is not a whole number of grid cells");
  }
  CondensateField out = f;
  const int n = f.grid.n_x;
  for (int iz = 0; iz < f.grid.n_z; ++iz) {
    for (int ix = 0; ix < n; ++ix) {
      out.psi[f.grid.index(ix, iz)] = f.psi[f.grid.index((ix + s) % n, iz)];
    }
  }
  return out;
}

CondensateField initial_state(const Grid2D& grid, const GpeModel& m) {
  if (!m.trapped()) return CondensateField::uniform(grid, m.atom_number);
  CondensateField f;
  f.grid = grid;
  f.atom_number = m.atom_number;
  f.psi.resize(grid.size());
  const double cx = m.trap_coefficients[0], cz = m.trap_coefficients[1];
  const auto fill = trap_fill(m);
  for (int iz = 0; iz < grid.n_z; ++iz) {
    const double z = grid.z(iz);
    for (int ix = 0; ix < grid.n_x; ++ix) {
      const double x = grid.x(ix);
      double amp;
      if (m.coupling > 0.0) {
        // Small Gaussian floor keeps the wings nonzero for imaginary time.
        amp = std::sqrt(std::max(0.0, fill.mu - cx * x * x - cz * z * z) / m.coupling) +
              1e-6 * std::exp(-0.5 * (std::sqrt(cx) * x * x + std::sqrt(cz) * z * z));
      } else {
        amp = std::exp(-0.5 * (std::sqrt(cx) * x * x + std::sqrt(cz) * z * z));
      }
      f.psi[grid.index(ix, iz)] = amp;
    }
  }
  f.normalize();
  return f;
}

// ------------------------------------------------------- imaginary time --

GroundState imaginary_time_ground_state(CondensateField start, const GpeModel& m, const PumpState& pump,
                                        const ImaginaryTimeOptions& opts) {
  if (!(opts.dtau > 0.0)) throw ConfigError("imaginary time: dtau must be > 0");
  const Grid2D grid = start.grid;
  validate_grid(grid, m);
  const auto tables = ModeTables::build(grid, m);
  const auto k2 = kinetic_table(grid);
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  std::vector<double> half_kin(grid.size());
  for (std::size_t i = 0; i < k2.size(); ++i) half_kin[i] = std::exp(-0.5 * opts.dtau * k2[i]) * inv_n;

  Fft2D fft(grid.n_x, grid.n_z);
  CondensateField f = std::move(start);
  f.normalize();
  const double n_atoms = f.atom_number;
  auto& psi = f.psi;
  std::vector<cplx> buf(psi.size());

  GroundState out;
  double kin = kinetic_energy(f);
  CavityState cav = cavity_state(f, tables, pump.eta, m);
  double e_prev = kin + potential_energy(f, tables, pump, cav.alpha, m);
  int quiet = 0;

  for (long long step = 1; step <= opts.max_steps; ++step) {
    const auto alpha = cav.alpha;
    const double frozen_before = opts.track_monotonicity ? kin + potential_energy(f, tables, pump, alpha, m) : 0.0;

    std::copy(psi.begin(), psi.end(), buf.begin());
    fft.forward(buf);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= half_kin[i];
    fft.backward(buf);
    const double cavl = m.lightshift * std::norm(alpha);
    const double inter = 2.0 * pump.eta * alpha.real();
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const double v = tables.trap[i] + pump.depth * tables.pump_sq[i] + cavl * tables.cavity_sq[i] +
                       inter * tables.product[i] + m.coupling * std::norm(buf[i]);
      buf[i] *= std::exp(-opts.dtau * v);
    }
    fft.forward(buf);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= half_kin[i];
    // Kinetic energy of the unnormalized spectrum; rescaled after the norm
    // is known.
    const double n_pts = static_cast<double>(grid.size());
    const double kin_raw = kinetic_energy_from_spectrum(grid, buf, n_pts * n_pts);
    fft.backward(buf);
    std::copy(buf.begin(), buf.end(), psi.begin());
    const double norm = f.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ConvergenceError("imaginary time: field collapsed at step " + std::to_string(step), out.theta_trace);
    }
    const double scale = std::sqrt(n_atoms / norm);
    for (auto& v : psi) v *= scale;
    kin = kin_raw * scale * scale;

    if (opts.track_monotonicity) {
      const double frozen_after = kin + potential_energy(f, tables, pump, alpha, m);
      out.max_energy_increase = std::max(out.max_energy_increase, frozen_after - frozen_before);
      if (step == 1) out.max_energy_increase = frozen_after - frozen_before;
    }

    const double theta_prev = cav.theta;
    cav = cavity_state(f, tables, pump.eta, m);
    const double e_now = kin + potential_energy(f, tables, pump, cav.alpha, m);
    if (opts.trace_every > 0 && step % opts.trace_every == 0) out.theta_trace.push_back(cav.theta);

    const bool quiet_step = std::abs(e_now - e_prev) < opts.energy_tol * n_atoms &&
                            std::abs(cav.theta - theta_prev) < opts.theta_tol * n_atoms;
    quiet = quiet_step ? quiet + 1 : 0;
    e_prev = e_now;
    if (step >= opts.min_steps && quiet >= opts.patience) {
      out.steps = step;
      out.cavity = cav;
      out.field = std::move(f);
      out.energy = energy(out.field, tables, pump, m).total();
      check_edge_density(out.field, m);
      return out;
    }
  }
  throw ConvergenceError("imaginary time: not converged after " + std::to_string(opts.max_steps) +
                             " steps (last Theta/N = " + format_double(cav.theta / n_atoms) + ")",
                         out.theta_trace);
}

// ---------------------------------------------------------------- ramps --

PumpRamp::PumpRamp(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw ConfigError("ramp: needs at least one knot");
  if (knots_.front().first != 0.0) throw ConfigError("ramp: first knot must be at t = 0");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i].second >= 0.0)) throw ConfigError("ramp: powers must be >= 0");
    if (i > 0 && !(knots_[i].first > knots_[i - 1].first)) throw ConfigError("ramp: knot times must increase");
  }
}

PumpRamp PumpRamp::linear(double duration, double p_start, double p_end, double hold) {
  if (!(duration > 0.0)) throw ConfigError("ramp: duration must be > 0");
  if (hold < 0.0) throw ConfigError("ramp: hold must be >= 0");
  std::vector<std::pair<double, double>> k{{0.0, p_start}, {duration, p_end}};
  if (hold > 0.0) k.emplace_back(duration + hold, p_end);
  return PumpRamp(std::move(k));
}

double PumpRamp::power(double t) const {
  if (t <= knots_.front().first) return knots_.front().second;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (t <= knots_[i].first) {
      const auto [t0, p0] = knots_[i - 1];
      const auto [t1, p1] = knots_[i];
      return p0 + (p1 - p0) * (t - t0) / (t1 - t0);
    }
  }
  return knots_.back().second;
}

double PumpRamp::max_power() const {
  double p = 0.0;
  for (const auto& k : knots_) p = std::max(p, k.second);
  return p;
}

// ------------------------------------------------------------ real time --

Trajectory real_time_evolve(CondensateField psi0, const PumpRamp& ramp, const GpeModel& m,
                            const RealTimeOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigError("real time: dt must be > 0");
  if (opts.record_every < 1) throw ConfigError("real time: record_every must be >= 1");
  const Grid2D grid = psi0.grid;
  validate_grid(grid, m);
  if (opts.dt * grid.max_k2() > pi) {
    throw ConfigError("real time: dt " + format_double(opts.dt) + " does not resolve the grid kinetic scale (dt * k_max^2 = " +
                      format_double(opts.dt * grid.max_k2()) + " > pi)");
  }
  const auto tables = ModeTables::build(grid, m);
  {
    const auto top = PumpState::from_power(m, ramp.max_power());
    double vmax = 0.0;
    for (std::size_t i = 0; i < tables.trap.size(); ++i) {
      vmax = std::max(vmax, std::abs(tables.trap[i] + top.depth * tables.pump_sq[i]));
    }
    if (opts.dt * vmax > 1.0) {
      throw ConfigError("real time: dt does not resolve the static potential (dt * max|V| = " +
                        format_double(opts.dt * vmax) + ")");
    }
  }
  const auto k2 = kinetic_table(grid);
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  std::vector<cplx> half_kin(grid.size());
  for (std::size_t i = 0; i < k2.size(); ++i) half_kin[i] = std::polar(inv_n, -0.5 * opts.dt * k2[i]);

  Fft2D fft(grid.n_x, grid.n_z);
  CondensateField f = std::move(psi0);
  auto& psi = f.psi;

  const long long steps = static_cast<long long>(std::llround(ramp.duration() / opts.dt));
  ThresholdDetector detector(opts.threshold, steps);
  auto snap_powers = opts.snapshot_powers;
  std::sort(snap_powers.begin(), snap_powers.end());
  std::size_t next_snap = 0;

  Trajectory traj;
  traj.steps = steps;
  double norm = f.norm();
  double checkpoint_norm = norm;
  const double cell = grid.cell_area();

  auto record = [&](double t, const PumpState& pump, const CavityState& cav) {
    traj.samples.push_back({t, pump.power, pump.eta, cav, norm});
  };

  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * opts.dt;
    const auto pump = PumpState::from_power(m, ramp.power(t));
    const auto cav = cavity_state(f, tables, pump.eta, m);
    detector.feed(step, pump.power, cav.photons());
    if (step % opts.record_every == 0) record(t, pump, cav);
    while (next_snap < snap_powers.size() && pump.power >= snap_powers[next_snap]) {
      traj.snapshots.push_back({t, pump.power, f});
      ++next_snap;
    }

    fft.forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half_kin[i];
    fft.backward(psi);
    const double cavl = m.lightshift * cav.photons();
    const double inter = 2.0 * pump.eta * cav.alpha.real();
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double v = tables.trap[i] + pump.depth * tables.pump_sq[i] + cavl * tables.cavity_sq[i] +
                       inter * tables.product[i] + m.coupling * std::norm(psi[i]);
      psi[i] *= std::polar(1.0, -opts.dt * v);
    }
    fft.forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half_kin[i];
    fft.backward(psi);

    double s = 0.0;
    for (const auto& v : psi) s += std::norm(v);
    const double new_norm = s * cell;
    if (!std::isfinite(new_norm)) {
      throw EngineError("real time: field became non-finite at t = " + format_double(t));
    }
    traj.max_step_norm_drift = std::max(traj.max_step_norm_drift, std::abs(new_norm - norm) / norm);
    norm = new_norm;
    if (opts.renormalize) {
      const double scale = std::sqrt(f.atom_number / norm);
      for (auto& v : psi) v *= scale;
      norm = f.atom_number;
    }
    if ((step + 1) % opts.norm_check_every == 0) {
      const double drift = std::abs(norm - checkpoint_norm) / checkpoint_norm;
      if (drift > opts.norm_drift_tol) {
        throw EngineError("real time: norm drift " + format_double(drift) + " over " +
                          std::to_string(opts.norm_check_every) + " steps; reduce dt");
      }
      checkpoint_norm = norm;
    }
  }

  const double t_end = static_cast<double>(steps) * opts.dt;
  const auto pump = PumpState::from_power(m, ramp.power(t_end));
  record(t_end, pump, cavity_state(f, tables, pump.eta, m));
  traj.critical_power = detector.critical_power();
  traj.baseline_photons = detector.baseline();
  check_edge_density(f, m);
  traj.final_field = std::move(f);
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const GpeModel& m) {
  os << "t,P,eta,alpha_re,alpha_im,nphoton,theta,bunching,norm\n";
  for (const auto& s : traj.samples) {
    os << format_double(m.units.time_si(s.t)) << ',' << format_double(s.power) << ','
       << format_double(m.units.frequency_si(s.eta)) << ',' << format_double(s.cavity.alpha.real()) << ','
       << format_double(s.cavity.alpha.imag()) << ',' << format_double(s.cavity.photons()) << ','
       << format_double(s.cavity.theta) << ',' << format_double(s.cavity.bunching) << ','
       << format_double(s.norm) << '\n';
  }
}

std::vector<double> photon_trace(const Trajectory& traj, double t_from) {
  std::vector<double> out;
  for (const auto& s : traj.samples) {
    if (s.t >= t_from) out.push_back(s.cavity.photons());
  }
  return out;
}

// ------------------------------------------------------------- overlaps --

boundary::OverlapIntegrals overlap_integrals_2d(const CondensateField& f, const GpeModel& m,
                                                const ExperimentParams& p) {
  const auto t = ModeTables::build(f.grid, m);
  double n_eff = 0.0, bunching = 0.0, quartic = 0.0;
  for (std::size_t i = 0; i < f.psi.size(); ++i) {
    const double n = std::norm(f.psi[i]);
    n_eff += t.cavity_sq[i] * t.pump_sq[i] * n;
    bunching += t.cavity_sq[i] * n;
    quartic += n * n;
  }
  const double da = f.grid.cell_area();
  boundary::OverlapIntegrals o;
  o.n_eff = n_eff * da;
  o.bunching = bunching * da;
  o.interaction_energy = m.units.energy_si(0.5 * m.coupling * quartic * da / f.atom_number);
  o.shifted_detuning = p.pump_cavity_detuning - p.single_atom_lightshift * o.bunching;
  return o;
}

}  // namespace selforg::gpe
