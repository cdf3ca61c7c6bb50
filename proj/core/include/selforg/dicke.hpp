#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace selforg::dicke {

using cplx = std::complex<double>;

// Two-mode Dicke model
//   H/hbar = w0 Jz + w a^dag a + (lambda/sqrt N)(a^dag + a)(J+ + J-)
//            [+ (3/4) U0 c1^dag c1 a^dag a]
// with c1^dag c1 = Jz + N/2. All frequencies share one unit (angular).
struct DickeParams {
  double omega{1.0};   // field frequency
  double omega0{1.0};  // two-level splitting, > 0
  double lambda{0.0};  // collective coupling
  double kappa{0.0};   // field decay, semiclassical engine only
  int atom_number{1};
  bool dispersive_shift{false};
  double lightshift{0.0};  // U0, used only with dispersive_shift

  void validate() const;
};

// lambda_cr = sqrt((w^2 + kappa^2) w0 / w) / 2. No transition for w <= 0.
std::optional<double> critical_coupling(double omega, double omega0, double kappa);

// ---------------------------------------------------------------- exact --

// Basis |j = N/2, m> (x) |n>, flattened as (m + N/2) * (n_max + 1) + n.
struct ExactState {
  int atom_number{1};
  int photon_cutoff{1};
  Eigen::VectorXcd amplitudes;

  static ExactState basis(int atom_number, int photon_cutoff, int m_index, int photons);
  Eigen::Index dimension() const { return amplitudes.size(); }
};

inline constexpr Eigen::Index default_dimension_cap = 40000;

Eigen::SparseMatrix<double> build_hamiltonian(const DickeParams& p, int photon_cutoff,
                                              Eigen::Index dimension_cap = default_dimension_cap);

// Parity (-1)^(n + m + N/2); an involution commuting with H.
ExactState parity_transform(const ExactState& state);
Eigen::VectorXd parity_diagonal(int atom_number, int photon_cutoff);

struct ExactObservables {
  double photon_fraction{};  // <a^dag a>/N
  double inversion{};        // <Jz>/N
  double order{};            // <J+ + J->/N, zero in a parity eigenstate
  double gap{};              // E1 - E0
  double energy{};
  int photon_cutoff{};
  int parity{};              // +1 / -1 sector of the ground state
};

// Diagonalizes each parity sector separately, so the reported ground state
// is a parity eigenstate.
ExactObservables ground_state_observables(const Eigen::SparseMatrix<double>& h, int atom_number,
                                          int photon_cutoff);

// Raises the cutoff in steps of `step` until all observables move by less
// than `tolerance` (absolute). Throws EngineError if the cap is hit first.
ExactObservables converged_ground_state(const DickeParams& p, int initial_cutoff = 20,
                                        double tolerance = 1e-6, int step = 10,
                                        int max_cutoff = 400);

// ---------------------------------------------------------- semiclassical --

// Per-particle variables: alpha = <a>/sqrt(N), j_minus = <J->/N, j_z = <Jz>/N.
struct SemiclassicalState {
  cplx alpha{};
  cplx j_minus{};
  double j_z{-0.5};

  double photon_fraction() const { return std::norm(alpha); }
  double order() const { return 2.0 * j_minus.real(); }  // Re<J+ + J->/N
  double spin_length_sq() const { return std::norm(j_minus) + j_z * j_z; }
};

SemiclassicalState normal_state();
// Complex Gaussian noise of the given amplitude on alpha and j_minus, with j_z
// placed back on the Bloch sphere of radius 1/2 (lower hemisphere).
SemiclassicalState seeded_state(std::uint64_t seed, double amplitude = 1e-4);

SemiclassicalState semiclassical_rhs(const SemiclassicalState& s, const DickeParams& p);

struct TrajectoryPoint {
  double t{};
  cplx alpha{};
  double photon_fraction{};
  double j_z{};
  double order{};
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  SemiclassicalState final_state;
};

// Fixed-step RK4. Requires dt <= 0.05 / max(w, w0, kappa, lambda).
Trajectory integrate_semiclassical(const SemiclassicalState& s0, const DickeParams& p, double t_final,
                                   double dt, int record_every = 1);
// Time-dependent coupling lambda(t), e.g. a pump ramp; p.lambda is ignored.
Trajectory integrate_semiclassical(const SemiclassicalState& s0, const DickeParams& p,
                                   const std::function<double(double)>& lambda_at, double t_final, double dt,
                                   int record_every = 1);

// Analytic superradiant fixed point |alpha|^2 / N; 0 at or below threshold.
double steadystate_photon_fraction(const DickeParams& p);

// Largest real part among the linearized normal-phase eigenvalues, from a
// central finite-difference Jacobian of semiclassical_rhs in the tangent
// plane of the Bloch sphere at the south pole.
double normal_phase_growth_rate(const DickeParams& p);

// lambda at which normal_phase_growth_rate first turns positive, located by
// a scan over [lambda_lo, lambda_hi] followed by bisection. nullopt if the
// normal phase stays stable over the whole range.
std::optional<double> instability_coupling(DickeParams p, double lambda_lo, double lambda_hi,
                                           int scan_points = 200, double rel_tol = 1e-7);

// CSV writers: trajectory `t,alpha_re,alpha_im,photon_frac,jz,order` and
// eigen-observables `lambda,photon_frac,jz,order,gap`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
struct EdRow {
  double lambda{};
  ExactObservables obs;
};
void write_observables_csv(std::ostream& os, const std::vector<EdRow>& rows);

}  // namespace selforg::dicke
