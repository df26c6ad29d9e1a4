#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "fnls/ground_state.hpp"
#include "fnls/runner/config.hpp"
#include "fnls/runner/report.hpp"

namespace fnls::runner {

/// $FNLS_OUTPUT_ROOT, or ./fnls_runs when unset.
std::filesystem::path output_root();
/// output_root() / (output.directory or name).
std::filesystem::path run_directory(const SimulationConfig& config);

Geometry build_geometry(const SimulationConfig& config);

/// The initial state described by the config. For ground_state_scaled the
/// solved ground state is stored in *ground_state when provided.
ComplexField build_initial_state(const SimulationConfig& config,
                                 std::optional<GroundState>* ground_state = nullptr);

struct RunOptions {
  /// Overrides run_directory(config).
  std::optional<std::filesystem::path> directory;
  /// When false nothing is written to disk.
  bool write = true;
};

struct ScenarioResult {
  RunReport report;
  /// Set for evolve scenarios.
  std::shared_ptr<TrajectoryRecord> record;
  std::filesystem::path directory;
};

/// Validates, runs and reports. Artifacts: config.yaml, report.json,
/// timeseries.csv (evolve), final.ckpt (evolve) or Q.ckpt
/// (groundstate_table), decay.csv (decay scenarios).
ScenarioResult run_scenario(const SimulationConfig& config, const RunOptions& options = {});

/// Ground-state table row: solve on the given geometry and on one with
/// twice the points, with residual, Pohozaev, GN and threshold verdicts.
RunReport groundstate_report(int n, const Geometry& geometry, const Geometry& refined,
                             std::optional<GroundState>* solved = nullptr);

}  // namespace fnls::runner
