#include "selforg/dicke.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "selforg/error.hpp"
#include "selforg/param_file.hpp"
#include "selforg/rng.hpp"

namespace selforg::dicke {

void DickeParams::validate() const {
  if (!(omega0 > 0.0)) throw ConfigError("dicke: omega0 must be > 0");
  if (!(kappa >= 0.0)) throw ConfigError("dicke: kappa must be >= 0");
  if (atom_number < 1) throw ConfigError("dicke: atom_number must be >= 1");
  if (!std::isfinite(omega) || !std::isfinite(lambda)) throw ConfigError("dicke: non-finite parameter");
}

std::optional<double> critical_coupling(double omega, double omega0, double kappa) {
  if (!(omega0 > 0.0)) throw ConfigError("critical_coupling: omega0 must be > 0");
  if (omega <= 0.0) return std::nullopt;
  return 0.5 * std::sqrt((omega * omega + kappa * kappa) / omega * omega0);
}

// ---------------------------------------------------------------- exact --

namespace {

Eigen::Index flat_index(int m_index, int photons, int photon_cutoff) {
  return static_cast<Eigen::Index>(m_index) * (photon_cutoff + 1) + photons;
}

// <m+1| J+ |m> for spin j = N/2, m = m_index - N/2.
double raising_element(int atom_number, int m_index) {
  const double j = 0.5 * atom_number;
  const double m = m_index - j;
  return std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m + 1.0)));
}

}  // namespace

ExactState ExactState::basis(int atom_number, int photon_cutoff, int m_index, int photons) {
  ExactState s;
  s.atom_number = atom_number;
  s.photon_cutoff = photon_cutoff;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(atom_number + 1) * (photon_cutoff + 1));
  s.amplitudes(flat_index(m_index, photons, photon_cutoff)) = 1.0;
  return s;
}

Eigen::SparseMatrix<double> build_hamiltonian(const DickeParams& p, int photon_cutoff,
                                              Eigen::Index dimension_cap) {
  p.validate();
  if (photon_cutoff < 1) throw ConfigError("build_hamiltonian: photon cutoff must be >= 1");
  const int n_spin = p.atom_number + 1;
  const Eigen::Index dim = static_cast<Eigen::Index>(n_spin) * (photon_cutoff + 1);
  if (dim > dimension_cap) {
    throw ConfigError("build_hamiltonian: dimension " + std::to_string(dim) + " exceeds cap " +
                      std::to_string(dimension_cap));
  }
  const double g = p.lambda / std::sqrt(static_cast<double>(p.atom_number));
  const double half_n = 0.5 * p.atom_number;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(dim) * 3);
  for (int mi = 0; mi < n_spin; ++mi) {
    const double m = mi - half_n;
    for (int n = 0; n <= photon_cutoff; ++n) {
      const auto i = flat_index(mi, n, photon_cutoff);
      double diag = p.omega0 * m + p.omega * n;
      if (p.dispersive_shift) diag += 0.75 * p.lightshift * mi * n;
      entries.emplace_back(i, i, diag);
      if (mi + 1 < n_spin) {
        const double jp = raising_element(p.atom_number, mi);
        if (n + 1 <= photon_cutoff) {
          const auto j = flat_index(mi + 1, n + 1, photon_cutoff);
          const double v = g * jp * std::sqrt(n + 1.0);
          entries.emplace_back(i, j, v);
          entries.emplace_back(j, i, v);
        }
        if (n >= 1) {
          const auto j = flat_index(mi + 1, n - 1, photon_cutoff);
          const double v = g * jp * std::sqrt(static_cast<double>(n));
          entries.emplace_back(i, j, v);
          entries.emplace_back(j, i, v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

Eigen::VectorXd parity_diagonal(int atom_number, int photon_cutoff) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(atom_number + 1) * (photon_cutoff + 1));
  for (int mi = 0; mi <= atom_number; ++mi) {
    for (int n = 0; n <= photon_cutoff; ++n) {
      d(flat_index(mi, n, photon_cutoff)) = ((mi + n) % 2 == 0) ? 1.0 : -1.0;
    }
  }
  return d;
}

ExactState parity_transform(const ExactState& state) {
  ExactState out = state;
  out.amplitudes = parity_diagonal(state.atom_number, state.photon_cutoff).cast<cplx>().cwiseProduct(
      state.amplitudes);
  return out;
}

ExactObservables ground_state_observables(const Eigen::SparseMatrix<double>& h, int atom_number,
                                          int photon_cutoff) {
  const Eigen::Index dim = static_cast<Eigen::Index>(atom_number + 1) * (photon_cutoff + 1);
  if (h.rows() != dim || h.cols() != dim) {
    throw ConfigError("ground_state_observables: matrix does not match (N, cutoff)");
  }
  const Eigen::VectorXd parity = parity_diagonal(atom_number, photon_cutoff);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(h);

  struct Sector {
    std::vector<Eigen::Index> index;
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd ground;
  };
  Sector sectors[2];
  for (Eigen::Index i = 0; i < dim; ++i) sectors[parity(i) > 0 ? 0 : 1].index.push_back(i);

  for (auto& s : sectors) {
    const auto k = static_cast<Eigen::Index>(s.index.size());
    Eigen::MatrixXd block(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) block(a, b) = dense(s.index[a], s.index[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
    if (solver.info() != Eigen::Success) throw EngineError("ground_state_observables: eigensolver failed");
    s.eigenvalues = solver.eigenvalues();
    s.ground = solver.eigenvectors().col(0);
  }

  std::vector<double> levels;
  for (const auto& s : sectors) {
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(2, s.eigenvalues.size()); ++i) {
      levels.push_back(s.eigenvalues(i));
    }
  }
  std::sort(levels.begin(), levels.end());

  const int best = sectors[0].eigenvalues(0) <= sectors[1].eigenvalues(0) ? 0 : 1;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(dim);
  for (std::size_t a = 0; a < sectors[best].index.size(); ++a) {
    psi(sectors[best].index[a]) = sectors[best].ground(static_cast<Eigen::Index>(a));
  }

  const double half_n = 0.5 * atom_number;
  double photons = 0.0, jz = 0.0, jx2 = 0.0;
  for (int mi = 0; mi <= atom_number; ++mi) {
    for (int n = 0; n <= photon_cutoff; ++n) {
      const double w = psi(flat_index(mi, n, photon_cutoff));
      photons += w * w * n;
      jz += w * w * (mi - half_n);
      if (mi + 1 <= atom_number) {
        jx2 += 2.0 * psi(flat_index(mi + 1, n, photon_cutoff)) * w * raising_element(atom_number, mi);
      }
    }
  }

  ExactObservables obs;
  obs.photon_fraction = photons / atom_number;
  obs.inversion = jz / atom_number;
  obs.order = jx2 / atom_number;
  obs.energy = levels[0];
  obs.gap = levels.size() > 1 ? levels[1] - levels[0] : 0.0;
  obs.photon_cutoff = photon_cutoff;
  obs.parity = best == 0 ? 1 : -1;
  return obs;
}

ExactObservables converged_ground_state(const DickeParams& p, int initial_cutoff, double tolerance,
                                        int step, int max_cutoff) {
  int cutoff = std::max(1, initial_cutoff);
  auto solve = [&p](int c) {
    return ground_state_observables(build_hamiltonian(p, c), p.atom_number, c);
  };
  ExactObservables prev = solve(cutoff);
  while (cutoff + step <= max_cutoff) {
    ExactObservables next = solve(cutoff + step);
    const double change = std::max({std::abs(next.photon_fraction - prev.photon_fraction),
                                    std::abs(next.inversion - prev.inversion),
                                    std::abs(next.order - prev.order)});
    if (change < tolerance) {
      // report the smaller cutoff: it already reproduces the larger one
      prev.photon_cutoff = cutoff;
      return prev;
    }
    prev = next;
    cutoff += step;
  }
  throw EngineError("converged_ground_state: photon cutoff not converged below " +
                    std::to_string(max_cutoff));
}

// ---------------------------------------------------------- semiclassical --

SemiclassicalState normal_state() { return {}; }

SemiclassicalState seeded_state(std::uint64_t seed, double amplitude) {
  auto rng = make_rng(seed);
  SemiclassicalState s;
  s.alpha = amplitude * complex_normal(rng);
  s.j_minus = amplitude * complex_normal(rng);
  s.j_z = -std::sqrt(std::max(0.0, 0.25 - std::norm(s.j_minus)));
  return s;
}

SemiclassicalState semiclassical_rhs(const SemiclassicalState& s, const DickeParams& p) {
  const cplx i{0.0, 1.0};
  const double lam = p.lambda;
  const double shift = p.dispersive_shift ? 0.75 * p.lightshift * p.atom_number : 0.0;
  const double field = 2.0 * s.alpha.real();     // alpha + alpha*
  const double spin = 2.0 * s.j_minus.real();    // j+ + j-

  SemiclassicalState d;
  d.alpha = -(i * (p.omega + shift * (s.j_z + 0.5)) + p.kappa) * s.alpha - i * lam * spin;
  d.j_minus = -i * (p.omega0 + shift * std::norm(s.alpha)) * s.j_minus + 2.0 * i * lam * field * s.j_z;
  d.j_z = -2.0 * lam * field * s.j_minus.imag();
  return d;
}

namespace {

SemiclassicalState axpy(const SemiclassicalState& s, double h, const SemiclassicalState& d) {
  return {s.alpha + h * d.alpha, s.j_minus + h * d.j_minus, s.j_z + h * d.j_z};
}

bool finite(const SemiclassicalState& s) {
  return std::isfinite(s.alpha.real()) && std::isfinite(s.alpha.imag()) && std::isfinite(s.j_minus.real()) &&
         std::isfinite(s.j_minus.imag()) && std::isfinite(s.j_z);
}

TrajectoryPoint record(double t, const SemiclassicalState& s) {
  return {t, s.alpha, s.photon_fraction(), s.j_z, s.order()};
}

}  // namespace

namespace {

void check_step(const DickeParams& p, double dt) {
  const double fastest = std::max({std::abs(p.omega), p.omega0, p.kappa, std::abs(p.lambda)});
  if (!(dt > 0.0) || dt > 0.05 / fastest * (1.0 + 1e-12)) {
    throw ConfigError("integrate_semiclassical: dt must satisfy 0 < dt <= 0.05 / max(w, w0, kappa, lambda)");
  }
}

template <class CouplingAt>
Trajectory integrate(const SemiclassicalState& s0, DickeParams p, CouplingAt&& lambda_at, double t_final,
                     double dt, int record_every) {
  if (record_every < 1) record_every = 1;
  const auto steps = static_cast<long long>(std::llround(t_final / dt));

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(steps / record_every + 2));
  SemiclassicalState s = s0;
  p.lambda = lambda_at(0.0);
  check_step(p, dt);
  traj.points.push_back(record(0.0, s));
  for (long long n = 1; n <= steps; ++n) {
    const double t = (n - 1) * dt;
    // RK4 with the coupling sampled at t, t + dt/2, t + dt.
    DickeParams pm = p, pe = p;
    p.lambda = lambda_at(t);
    pm.lambda = lambda_at(t + 0.5 * dt);
    pe.lambda = lambda_at(t + dt);
    check_step(pe, dt);
    const auto k1 = semiclassical_rhs(s, p);
    const auto k2 = semiclassical_rhs(axpy(s, 0.5 * dt, k1), pm);
    const auto k3 = semiclassical_rhs(axpy(s, 0.5 * dt, k2), pm);
    const auto k4 = semiclassical_rhs(axpy(s, dt, k3), pe);
    s.alpha += dt / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
    s.j_minus += dt / 6.0 * (k1.j_minus + 2.0 * k2.j_minus + 2.0 * k3.j_minus + k4.j_minus);
    s.j_z += dt / 6.0 * (k1.j_z + 2.0 * k2.j_z + 2.0 * k3.j_z + k4.j_z);
    if (!finite(s) || std::norm(s.alpha) > 1e12) {
      throw EngineError("integrate_semiclassical: divergence at t = " + format_double(n * dt) +
                        " (|alpha|^2/N = " + format_double(std::norm(s.alpha)) + ")");
    }
    if (n % record_every == 0 || n == steps) traj.points.push_back(record(n * dt, s));
  }
  traj.final_state = s;
  return traj;
}

}  // namespace

Trajectory integrate_semiclassical(const SemiclassicalState& s0, const DickeParams& p, double t_final,
                                   double dt, int record_every) {
  p.validate();
  return integrate(s0, p, [&](double) { return p.lambda; }, t_final, dt, record_every);
}

Trajectory integrate_semiclassical(const SemiclassicalState& s0, const DickeParams& p,
                                   const std::function<double(double)>& lambda_at, double t_final, double dt,
                                   int record_every) {
  p.validate();
  return integrate(s0, p, lambda_at, t_final, dt, record_every);
}

double steadystate_photon_fraction(const DickeParams& p) {
  p.validate();
  const auto lc = critical_coupling(p.omega, p.omega0, p.kappa);
  if (!lc || std::abs(p.lambda) <= *lc) return 0.0;
  const double lam2 = p.lambda * p.lambda;
  const double k2 = p.kappa * p.kappa;

  if (!p.dispersive_shift || p.lightshift == 0.0) {
    const double r = *lc / std::abs(p.lambda);
    return lam2 / (k2 + p.omega * p.omega) * (1.0 - r * r * r * r);
  }

  // With the dispersive term the fixed point solves
  //   w0'(kappa^2 + w'^2) + 8 lambda^2 w' jz = 0,
  //   w' = w + c (jz + 1/2),  w0' = w0 + c |alpha|^2,  c = 3/4 U0 N,
  // on the branch continuously connected to the normal state.
  const double c = 0.75 * p.lightshift * p.atom_number;
  auto photons = [&](double jz, double w) { return 4.0 * lam2 * (0.25 - jz * jz) / (k2 + w * w); };
  auto f = [&](double jz) {
    const double w = p.omega + c * (jz + 0.5);
    const double w0 = p.omega0 + c * photons(jz, w);
    return w0 * (k2 + w * w) + 8.0 * lam2 * w * jz;
  };
  const int scan = 4000;
  double lo = -0.5;
  double flo = f(lo);
  for (int i = 1; i <= scan; ++i) {
    double hi = -0.5 + 0.5 * i / scan;
    const double fhi = f(hi);
    if ((flo < 0.0) != (fhi < 0.0)) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double jz = 0.5 * (lo + hi);
      return photons(jz, p.omega + c * (jz + 0.5));
    }
    lo = hi;
    flo = fhi;
  }
  return 0.0;
}

double normal_phase_growth_rate(const DickeParams& p) {
  auto pack = [](const SemiclassicalState& s) {
    return Eigen::Vector4d(s.alpha.real(), s.alpha.imag(), s.j_minus.real(), s.j_minus.imag());
  };
  auto unpack = [](const Eigen::Vector4d& v) {
    SemiclassicalState s;
    s.alpha = {v(0), v(1)};
    s.j_minus = {v(2), v(3)};
    s.j_z = -std::sqrt(std::max(0.0, 0.25 - std::norm(s.j_minus)));
    return s;
  };
  const double h = 1e-6;
  Eigen::Matrix4d jac;
  for (int c = 0; c < 4; ++c) {
    Eigen::Vector4d e = Eigen::Vector4d::Zero();
    e(c) = h;
    const auto fp = pack(semiclassical_rhs(unpack(e), p));
    const auto fm = pack(semiclassical_rhs(unpack(-e), p));
    jac.col(c) = (fp - fm) / (2.0 * h);
  }
  Eigen::EigenSolver<Eigen::Matrix4d> solver(jac, false);
  return solver.eigenvalues().real().maxCoeff();
}

std::optional<double> instability_coupling(DickeParams p, double lambda_lo, double lambda_hi, int scan_points,
                                           double rel_tol) {
  auto unstable = [&p](double lam) {
    p.lambda = lam;
    return normal_phase_growth_rate(p) > 0.0;
  };
  double prev = lambda_lo;
  if (unstable(prev)) return prev;
  for (int i = 1; i <= scan_points; ++i) {
    const double lam = lambda_lo + (lambda_hi - lambda_lo) * i / scan_points;
    if (unstable(lam)) {
      double lo = prev, hi = lam;
      while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (unstable(mid) ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = lam;
  }
  return std::nullopt;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,alpha_re,alpha_im,photon_frac,jz,order\n";
  for (const auto& pt : traj.points) {
    os << format_double(pt.t) << ',' << format_double(pt.alpha.real()) << ',' << format_double(pt.alpha.imag())
       << ',' << format_double(pt.photon_fraction) << ',' << format_double(pt.j_z) << ','
       << format_double(pt.order) << '\n';
  }
}

void write_observables_csv(std::ostream& os, const std::vector<EdRow>& rows) {
  os << "lambda,photon_frac,jz,order,gap\n";
  for (const auto& r : rows) {
    os << format_double(r.lambda) << ',' << format_double(r.obs.photon_fraction) << ','
       << format_double(r.obs.inversion) << ',' << format_double(r.obs.order) << ',' << format_double(r.obs.gap)
       << '\n';
  }
}

}  // namespace selforg::dicke
