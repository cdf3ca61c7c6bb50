#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "selforg/params.hpp"

namespace selforg::boundary {

// Interaction-dominated ground state of the crossed dipole trap:
// n(r) = max(0, (mu - V_harm(r)) / g), R_i = sqrt(2 mu / m w_i^2).
struct ThomasFermiProfile {
  double chemical_potential{};       // J
  std::array<double, 3> radii{};     // m
  double peak_density{};             // 1/m^3
  double atom_number{};
  double coupling{};                 // g = 4 pi hbar^2 a / m, J m^3

  double density(const Vec3& r) const;
};

ThomasFermiProfile thomas_fermi(const ExperimentParams& p);

struct OverlapIntegrals {
  double n_eff{};               // <psi0| phi_c^2 phi_p^2 |psi0>
  double bunching{};            // B0 = <psi0| phi_c^2 |psi0>
  double interaction_energy{};  // E_int = (g / 2N) int |psi0|^4, J
  double shifted_detuning{};    // Delta_c - U0 B0 for the params used, rad/s

  // absolute quadrature error estimates
  double n_eff_error{};
  double bunching_error{};
  double interaction_energy_error{};
};

struct QuadratureOptions {
  double rel_tol{1e-8};
  unsigned max_depth{18};
};

// 3D adaptive Gauss-Kronrod over the TF ellipsoid; the cos^2 factors are
// integrated numerically. Throws EngineError with the estimate and error
// bound if the requested tolerance is not met.
OverlapIntegrals overlap_integrals(const ThomasFermiProfile& profile, const ExperimentParams& p,
                                   const QuadratureOptions& opts = {});

struct Threshold {
  double eta{};          // eta_cr, rad/s
  double lambda_eff{};   // eta_cr sqrt(N_eff), rad/s
  double power{};        // W, via the calibration map
  double lattice_depth{};  // J
};

struct CriticalPump {
  double shifted_detuning{};  // Delta_c - U0 B0, rad/s
  double omega0_eff{};        // 2 w_r + 4 E_int / hbar, rad/s
  std::optional<Threshold> threshold;  // empty: no transition (shifted detuning >= 0)

  bool transition_exists() const { return threshold.has_value(); }
};

// eta_cr sqrt(N_eff) = 1/2 sqrt((D^2 + kappa^2) / (-D)) sqrt(2 w_r + 4 E_int / hbar)
// with D = delta_c - U0 B0.
CriticalPump critical_pump(double delta_c, const OverlapIntegrals& integrals, const ExperimentParams& p);

struct BoundaryRow {
  double delta_c{};  // rad/s
  CriticalPump pump;
};

std::vector<BoundaryRow> boundary_curve(const std::vector<double>& delta_c, const OverlapIntegrals& integrals,
                                        const ExperimentParams& p);
// Thomas-Fermi overlaps computed from p.
std::vector<BoundaryRow> boundary_curve(const std::vector<double>& delta_c, const ExperimentParams& p);

// `delta_c_hz,delta_tilde_hz,eta_cr,lambda_cr,p_cr_watt,transition_exists`.
// Frequencies are written as ordinary frequencies (angular / 2 pi) in Hz.
void write_boundary_csv(std::ostream& os, const std::vector<BoundaryRow>& rows);

}  // namespace selforg::boundary
