#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pfcflow/energy.hpp"
#include "pfcflow/linsolve.hpp"
#include "pfcflow/scenarios.hpp"
#include "pfcflow/schemes.hpp"
#include "pfcflow/stability.hpp"

namespace pfcflow {

/// Malformed config or snapshot input. offset is a byte offset for files and
/// a 1-based line number for configs.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset) : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// A step raised the scheme energy beyond 1e-12 relative.
class EnergyGuardError : public std::runtime_error {
public:
  EnergyGuardError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

struct StabilitySettings {
  StabilityModel model = StabilityModel::AllenCahn;
  int k = 1;
  int l = 0;
  double phi_ss = 0.0;
  double amplitude = 1e-6;
  int steps = 200;
  int n = 64;
};

struct RunConfig {
  SchemeId scheme = SchemeId::AcEq;
  /// Scheme list for compare; empty means {scheme}.
  std::vector<SchemeId> schemes;
  std::string preset = "accuracy";
  double scale = 1.0;
  GridSpec grid{256, 256, 1.0, 1.0};
  ModelParams params;
  ScenarioParams scenario;
  double dt = 0.05;
  double t_end = 1.0;
  int snapshot_every = 1000;
  int diag_every = 1;
  SolverOptions solver;
  /// Empty keeps everything in memory.
  std::string output_dir;
  /// When false wall_ms is written as 0, making diagnostics byte-reproducible.
  bool record_timing = true;
  /// Number of dt halvings levels for converge (dt, dt/2, ..., dt/2^(levels-1)).
  int levels = 5;
  StabilitySettings stability;

  /// Preset defaults with m0 set to the initial mass.
  static RunConfig from_preset(std::string_view name, double scale = 1.0);
  /// Throws UsageError on violated invariants.
  void validate() const;
  long step_count() const;
};

/// key = value lines with # comments. Unknown or repeated keys are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Replaces output_dir with $PFCFLOW_OUTPUT_DIR when that is set.
void apply_environment(RunConfig& cfg);

struct DiagRecord {
  long step = 0;
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  /// ||q||_d (EQ), r (SAV) or zeta (penalty).
  double aux = 0.0;
  double L = 0.0;
  int solver_iters = 0;
  double residual = 0.0;
  double wall_ms = 0.0;
};

std::string_view diag_header() noexcept;
std::string format_diag(const DiagRecord& r);
DiagRecord make_diag(const StepperState& s, const ModelParams& p);

struct RunResult {
  StepperState final_state;
  std::vector<DiagRecord> diagnostics;
  std::vector<std::string> snapshot_paths;
  double wall_ms = 0.0;
};

using StepObserver = std::function<void(const StepperState& before, const StepperState& after, const StepReport&)>;

/// Bootstraps and steps cfg.scheme to t_end. Files go to output_dir as
/// diag_<SCHEME>.csv and snap_<SCHEME>_<step>.pfc. On an energy guard
/// violation or solver failure the last good state is flushed as a snapshot
/// and the error is rethrown.
RunResult run(const RunConfig& cfg, const StepObserver& observer = {});

struct ConvergenceRow {
  double dt_coarse = 0.0;
  double dt_fine = 0.0;
  double l2_error = 0.0;
  /// log2 of the previous row's error over this one; NaN on the first row.
  double order = 0.0;
};

struct ConvergenceResult {
  std::vector<double> dts;
  std::vector<StepperState> finals;
  std::vector<ConvergenceRow> rows;
};

/// Runs cfg.scheme at dt / 2^k, k < levels, and tabulates ||phi_dt - phi_dt/2||_d.
ConvergenceResult converge(const RunConfig& cfg);

struct CompareResult {
  std::vector<SchemeId> schemes;
  std::vector<RunResult> runs;
};

/// Runs every scheme in cfg.schemes from the same initial field. With an
/// output_dir also writes compare.csv (aligned mass/energy columns).
CompareResult compare(const RunConfig& cfg);

struct Snapshot {
  Field field;
  double t = 0.0;
};

/// "PFCFIELD 1 nx ny lx ly t\n" then nx*ny little-endian doubles, x-fastest.
void write_snapshot(const Field& f, double t, const std::string& path);
Snapshot read_snapshot(const std::string& path);
std::string encode_snapshot(const Field& f, double t);
Snapshot decode_snapshot(std::string_view bytes);

}  // namespace pfcflow
