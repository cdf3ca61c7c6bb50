#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selforg/analysis.hpp"
#include "selforg/gpe.hpp"
#include "selforg/param_file.hpp"
#include "selforg/params.hpp"

namespace selforg::run {

enum class Command { ramp, diagram, ensemble, boundary, dicke_ed, dicke_ode };
enum class Engine { gpe, dicke_semiclassical, dicke_exact, boundary };

Command parse_command(const std::string& name);
std::string command_name(Command c);
std::string engine_name(Engine e);

// Grid extents are given in pump wavelengths.
struct GridSpec {
  int n_x{64};
  int n_z{64};
  double wavelengths_x{8.0};
  double wavelengths_z{8.0};

  gpe::Grid2D make() const;
};

struct GpeSpec {
  gpe::ModelOptions model;
  double dt{};         // s
  double noise{1e-4};  // relative amplitude of the t = 0 seed noise
  bool relax{true};    // start from the imaginary-time ground state
  gpe::ImaginaryTimeOptions imaginary;
  int record_every{10};
};

// Powers are in W, or multiples of the predicted threshold when relative.
struct RampSpec {
  double duration{};  // s
  double hold{0.0};   // s
  double p_start{0.0};
  double p_end{0.0};
  bool relative{false};
  std::optional<double> cap;  // W
};

struct SweepSpec {
  std::vector<double> delta_c;  // rad/s
  std::vector<double> powers;   // W or relative (ramp.relative)
  std::vector<double> caps;     // W per detuning, 0 = none
  std::optional<double> window; // s; default: hold if > 0, else a quarter of the ramp
  double frustration_threshold{0.5};
};

struct EnsembleSpec {
  int count{100};
  double power{0.0};  // W or relative
  bool relative{true};
  int mirrored{0};    // number of seeds also run with mirrored noise
};

struct DickeSpec {
  int atom_number{8};
  double omega{1.0};
  double omega0{1.0};
  double kappa{0.0};
  std::vector<double> lambda;  // absolute, or multiples of lambda_cr when relative
  bool relative{false};
  bool dispersive{false};
  double lightshift{0.0};
  bool from_experiment{false};  // take omega, omega0, kappa (units of omega_r) from the physics keys
  int cutoff{20};
  double tolerance{1e-6};
  int max_cutoff{400};
  double t_final{200.0};
  std::optional<double> dt;
  double noise{1e-4};
  int record_every{10};
};

struct RunConfig {
  Command command{Command::ramp};
  Engine engine{Engine::gpe};
  ExperimentParams physics;
  std::uint64_t seed{0};
  GridSpec grid;
  GpeSpec gpe;
  RampSpec ramp;
  ThresholdOptions threshold;
  std::vector<double> snapshot_powers;  // W or relative (ramp.relative)
  SweepSpec sweep;
  EnsembleSpec ensemble;
  std::vector<double> boundary_delta_c;  // rad/s
  boundary::QuadratureOptions quadrature;
  DickeSpec dicke;

  // Every key this command consumed, with defaults filled in.
  std::map<std::string, std::string> resolved;
};

// Reads the keys relevant to `command`; anything left over is rejected.
RunConfig resolve_config(Command command, KeyValues kv);

// `key = value` lines, physical parameters first, then run settings.
void write_resolved(std::ostream& os, const RunConfig& cfg);
std::string resolved_text(const RunConfig& cfg);

}  // namespace selforg::run
