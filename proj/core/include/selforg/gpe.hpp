#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "selforg/analysis.hpp"
#include "selforg/boundary.hpp"
#include "selforg/grid.hpp"
#include "selforg/params.hpp"

namespace selforg::gpe {

// Reduction of the 3D contact coupling to the (x, z) plane:
// g2D = g / (sqrt(2 pi) sigma_y).
enum class SigmaY { oscillator, thomas_fermi };

struct ModelOptions {
  bool trap{true};        // harmonic confinement in x and z
  bool envelopes{true};   // Gaussian waists on the mode functions (else cos only)
  SigmaY sigma_y{SigmaY::oscillator};
  std::optional<double> coupling;  // explicit g2D in E_r / k^2, overrides sigma_y
};

// Everything in recoil units: energies E_r, lengths 1/k, times 1/omega_r,
// frequencies omega_r. The GPE reads
//   i dpsi/dt = [-lap + V_trap + V0 phi_p^2 + U0 |alpha|^2 phi_c^2
//                + 2 eta Re(alpha) phi_c phi_p + g |psi|^2] psi
// with alpha = eta Theta / (Delta_c - U0 B + i kappa).
struct GpeModel {
  double atom_number{1e5};
  double kappa{};
  double delta_c{};
  double lightshift{};        // U0
  double coupling{};          // g2D
  std::array<double, 2> trap_coefficients{};  // V_trap = c_x x^2 + c_z z^2
  bool envelopes{true};
  double cavity_waist{};      // w_c
  double pump_waist_x{};      // w_x
  double calibration{};       // V0 per watt, E_r / W
  RecoilUnits units;

  static GpeModel from_experiment(const ExperimentParams& p, const ModelOptions& opts = {});

  void validate() const;
  bool trapped() const { return trap_coefficients[0] > 0.0 || trap_coefficients[1] > 0.0; }
};

// Pump operating point: P -> V0 = c_cal P -> eta = sqrt(U0 V0).
struct PumpState {
  double power{};  // W
  double depth{};  // V0, E_r
  double eta{};    // omega_r

  static PumpState from_power(const GpeModel& m, double power);
  static PumpState from_depth(const GpeModel& m, double depth);
  static PumpState from_eta(const GpeModel& m, double eta);
};

struct CavityState {
  std::complex<double> alpha;
  double theta{};
  double bunching{};

  double photons() const { return std::norm(alpha); }
  double phase() const { return std::arg(alpha); }
};

// Mode functions on the grid at y = 0 (cos only without envelopes).
struct ModeTables {
  std::vector<double> cavity_sq;    // phi_c^2
  std::vector<double> pump_sq;      // phi_p^2
  std::vector<double> product;      // phi_c phi_p
  std::vector<double> trap;         // V_trap

  static ModeTables build(const Grid2D& grid, const GpeModel& m);
};

// Theta = <psi|phi_c phi_p|psi>, B = <psi|phi_c^2|psi>.
std::pair<double, double> order_parameters(const CondensateField& f, const ModeTables& t);
std::pair<double, double> order_parameters(const CondensateField& f, const GpeModel& m);

std::complex<double> cavity_amplitude(double theta, double bunching, double eta, const GpeModel& m);
CavityState cavity_state(const CondensateField& f, const ModeTables& t, double eta, const GpeModel& m);

// V0 phi_p^2 + U0 |alpha|^2 phi_c^2 + 2 eta Re(alpha) phi_c phi_p + V_trap.
// The density-dependent g |psi|^2 term is not included.
std::vector<double> dynamic_potential(const ModeTables& t, const PumpState& pump, std::complex<double> alpha,
                                      const GpeModel& m);

struct EnergyParts {
  double kinetic{};
  double external{};     // trap + pump lattice
  double interaction{};  // g/2 int |psi|^4
  double cavity{};       // eta^2 Theta^2 D / (D^2 + kappa^2), D = Delta_c - U0 B
  double total() const { return kinetic + external + interaction + cavity; }
};

// Energy with alpha eliminated self-consistently.
EnergyParts energy(const CondensateField& f, const ModeTables& t, const PumpState& pump, const GpeModel& m);
// Energy in the potential generated by a frozen alpha (no self-consistency).
// This is the functional each imaginary-time step decreases.
double frozen_energy(const CondensateField& f, const ModeTables& t, const PumpState& pump,
                     std::complex<double> alpha, const GpeModel& m);

// Rejects grids that do not resolve the pump lattice or do not contain the
// trapped cloud: L >= 4 lambda_p, >= 8 points per lambda_p per axis, and
// L >= 6 Thomas-Fermi radii when trapped.
void validate_grid(const Grid2D& grid, const GpeModel& m);
// Throws EngineError when the density on the outermost grid rows/columns
// exceeds 1e-10 of the peak (trapped runs only).
void check_edge_density(const CondensateField& f, const GpeModel& m);

// Multiplies psi by (1 + amplitude xi) with xi circular complex Gaussian,
// then renormalizes. With `mirrored` the noise pattern is shifted by half a
// pump wavelength along x before it is applied.
void seed_noise(CondensateField& f, std::uint64_t seed, double amplitude, bool mirrored = false);

// psi(x, z) -> psi(x + lambda_p / 2, z). Requires an even number of grid
// points per half wavelength along x.
CondensateField shift_half_wavelength_x(const CondensateField& f);

// Thomas-Fermi density in the 2D trap (or uniform without trap), normalized.
CondensateField initial_state(const Grid2D& grid, const GpeModel& m);

// --------------------------------------------------------- imaginary time --

struct ImaginaryTimeOptions {
  double dtau{0.005};
  long long max_steps{400000};
  long long min_steps{100};
  double energy_tol{1e-10};  // per step, in units of E_r N
  double theta_tol{1e-8};    // per step, in units of N
  int patience{200};         // consecutive steps that must meet both tolerances
  bool track_monotonicity{false};
  int trace_every{100};
};

struct GroundState {
  CondensateField field;
  CavityState cavity;
  double energy{};  // total self-consistent energy, E_r
  long long steps{};
  std::vector<double> theta_trace;  // Theta every trace_every steps
  // Largest per-step increase of the frozen-alpha energy (<= 0 means
  // monotone); only filled with track_monotonicity.
  double max_energy_increase{};
};

// Failure carries the Theta trace for diagnosis.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), theta_trace(std::move(trace)) {}
  std::vector<double> theta_trace;
};

// Split-step relaxation: alpha from the pre-step psi, half kinetic step,
// potential (with g |psi|^2 of the current field), half kinetic step,
// renormalize to N.
GroundState imaginary_time_ground_state(CondensateField start, const GpeModel& m, const PumpState& pump,
                                        const ImaginaryTimeOptions& opts = {});

// ---------------------------------------------------------------- ramps --

// Piecewise-linear P(t) through (t, P) knots, t in 1/omega_r, constant
// beyond the last knot.
class PumpRamp {
 public:
  explicit PumpRamp(std::vector<std::pair<double, double>> knots);
  // P_start -> P_end over `duration`, then held for `hold`.
  static PumpRamp linear(double duration, double p_start, double p_end, double hold = 0.0);

  double power(double t) const;
  double duration() const { return knots_.back().first; }
  double max_power() const;
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

struct RealTimeOptions {
  double dt{0.01};
  int record_every{10};
  ThresholdOptions threshold;
  std::vector<double> snapshot_powers;  // W; first step with P >= value
  bool renormalize{false};
  int norm_check_every{1000};
  double norm_drift_tol{1e-6};  // relative, per norm_check_every steps
};

struct TrajectorySample {
  double t{};      // 1/omega_r
  double power{};  // W
  double eta{};    // omega_r
  CavityState cavity;
  double norm{};
};

struct Snapshot {
  double t{};
  double power{};
  CondensateField field;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<double> critical_power;  // W
  double baseline_photons{};
  std::vector<Snapshot> snapshots;
  CondensateField final_field;
  long long steps{};
  double max_step_norm_drift{};  // max |N_{n+1} - N_n| / N_n
};

Trajectory real_time_evolve(CondensateField psi, const PumpRamp& ramp, const GpeModel& m,
                            const RealTimeOptions& opts = {});

// `t,P,eta,alpha_re,alpha_im,nphoton,theta,bunching,norm` with t in s,
// P in W, eta in rad/s; theta, bunching and norm in atoms.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const GpeModel& m);

// Photon numbers of the samples with t >= t_from.
std::vector<double> photon_trace(const Trajectory& traj, double t_from = 0.0);

// ------------------------------------------------------------- momentum --

struct MomentumSpectrum {
  Grid2D grid;
  std::vector<double> weight;  // |psi~|^2 normalized so the sum equals N
};

struct MomentumPeak {
  double px{};  // units of hbar k
  double pz{};
  double weight{};
};

MomentumSpectrum momentum_spectrum(const CondensateField& f);
// Weights summed over square boxes of half-width `half_width` (units of k)
// at (0,0), (0,+-2), (+-1,+-1).
std::vector<MomentumPeak> momentum_peaks(const MomentumSpectrum& s, double half_width = 0.45);
void write_peaks_csv(std::ostream& os, const std::vector<MomentumPeak>& peaks);

// ------------------------------------------------------------ snapshots --

// Binary: "SOFIELD\0", u32 version, i32 n_x, i32 n_z, f64 L_x, f64 L_z
// (units of 1/k), f64 N, then n_x n_z (re, im) f64 pairs, x fastest.
// Native little-endian.
void write_snapshot(const std::filesystem::path& path, const CondensateField& f);
CondensateField read_snapshot(const std::filesystem::path& path);

// ------------------------------------------------------------- overlaps --

// N_eff, B0 and E_int of a 2D field, converted to SI for critical_pump().
boundary::OverlapIntegrals overlap_integrals_2d(const CondensateField& f, const GpeModel& m,
                                                const ExperimentParams& p);

}  // namespace selforg::gpe
