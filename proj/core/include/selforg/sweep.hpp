#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "selforg/run_config.hpp"

namespace selforg::run {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_engine = 3;
inline constexpr int exit_partial = 4;

struct RunContext {
  std::filesystem::path out;
  unsigned workers{1};
  const std::atomic<bool>* stop{nullptr};  // checked before each work item
  std::ostream* log{nullptr};
};

struct PointLog {
  std::size_t index{};
  double wall_time{};  // s
  bool resumed{false};
  std::string status{"ok"};
  std::string error;
};

// Bookkeeping for manifest.json; never written into data files so reruns
// stay byte-identical.
struct RunLog {
  std::vector<std::string> files;
  std::vector<PointLog> points;
  bool complete{true};
};

// ------------------------------------------------------------------ ramp --

struct RampReport {
  std::optional<double> critical_power;   // W, detected
  std::optional<double> predicted_power;  // W, from the overlaps of the P = 0 state
  double baseline_photons{};
  std::size_t snapshots{};
};

// Writes trajectory.csv, threshold.csv and (gpe) snapshots/.
RampReport run_ramp(const RunConfig& cfg, const RunContext& ctx, RunLog& log);

// --------------------------------------------------------------- diagram --

struct SweepRecord {
  std::size_t index{};
  double delta_c{};  // rad/s
  double power{};    // W, end of the ramp
  double mean_photons{};
  double theta_final{};
  bool threshold{false};
  std::optional<double> critical_power;   // W
  std::optional<double> predicted_power;  // W
  double oscillation{};
  bool frustrated{false};
  std::uint64_t seed{};
  bool ok{true};
};

void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRecord& r);
// Parses one data row produced by write_sweep_row.
SweepRecord parse_sweep_row(const std::string& line);

// Writes points/point_NNNNN.csv as each point finishes, then sweep.csv in
// point order and boundary.csv. Existing point files of an identical
// configuration are reused.
std::vector<SweepRecord> run_phase_diagram(const RunConfig& cfg, const RunContext& ctx, RunLog& log);

// -------------------------------------------------------------- ensemble --

struct EnsembleRecord {
  std::size_t index{};
  std::uint64_t seed{};
  bool mirrored{false};
  double theta{};
  double photons{};
  long long steps{};
  bool ok{true};

  int sign() const { return theta > 0.0 ? 1 : (theta < 0.0 ? -1 : 0); }
};

struct EnsembleSummary {
  std::size_t count{};
  std::size_t positive{};
  std::size_t negative{};
  double p_value{1.0};
  double mean_abs_positive{};
  double mean_abs_negative{};
  double relative_difference{};  // ||Theta+| - |Theta-|| / mean
  std::size_t mirrored_pairs{};
  std::size_t mirrored_opposite{};
};

EnsembleSummary summarize(const std::vector<EnsembleRecord>& records);

struct EnsembleResult {
  std::vector<EnsembleRecord> records;
  EnsembleSummary summary;
};

// Writes ensemble.csv and ensemble_summary.csv.
EnsembleResult run_symmetry_ensemble(const RunConfig& cfg, const RunContext& ctx, RunLog& log);

// ----------------------------------------------------------------- other --

// boundary.csv and overlaps.csv.
void run_boundary(const RunConfig& cfg, const RunContext& ctx, RunLog& log);
// observables.csv.
void run_dicke_ed(const RunConfig& cfg, const RunContext& ctx, RunLog& log);
// trajectory.csv and steady.csv.
void run_dicke_ode(const RunConfig& cfg, const RunContext& ctx, RunLog& log);

// Creates the output directory, refuses one holding a different
// configuration, writes config.resolved, dispatches on cfg.command and
// writes manifest.json. Returns the process exit code; ConfigError and
// EngineError propagate after the manifest records the failure.
int execute(const RunConfig& cfg, const RunContext& ctx);

}  // namespace selforg::run
