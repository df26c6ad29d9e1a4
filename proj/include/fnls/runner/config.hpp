#pragma once

#include <array>
#include <string>
#include <vector>

#include "fnls/error.hpp"
#include "fnls/evolution.hpp"

namespace fnls::runner {

/// Validation failure with the location of the offending YAML node
/// (1-based; 0 when the config was built in code).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class ScenarioKind { Evolve, LinearDecay, BandDecay, RefinedStrichartz, SymmetryAudit, GroundstateTable };
const char* scenario_kind_name(ScenarioKind k);

/// Parameters of the non-evolution scenarios. Fields that a kind does not
/// use are ignored.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Evolve;
  std::array<double, 2> window{0.0, 0.0};
  int samples = 12;
  /// Band level N (band_decay).
  double level = 4.0;
  /// Near-delta width in cells; <= 0 selects the discrete delta.
  double near_delta_cells = 0.0;
  double tolerance = 0.0;
  double wraparound_tolerance = 1e-2;
  int draws = 20;
  double horizon = 0.05;
  int time_nodes = 33;
  double rescale = 2.0;
  unsigned seed = 1;
};

struct GeometryConfig {
  bool radial = false;
  int points = 256;
  /// Box half width L, or r_max for radial grids.
  double extent = 20.0;
  int stencil_order = 12;
};

enum class InitialKind { Gaussian, GroundStateScaled, PureMode, BoostedGaussian, FromCheckpoint };
const char* initial_kind_name(InitialKind k);

struct InitialConfig {
  InitialKind kind = InitialKind::Gaussian;
  double sigma = 1.0;
  double amplitude = 1.0;
  /// Target L^2 mass; 0 keeps the amplitude.
  double mass = 0.0;
  /// ground_state_scaled: mass as a multiple of the computed M(Q).
  double mass_factor = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  /// boosted_gaussian: e^{i X d.x} applied after shaping.
  double boost = 0.0;
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  /// pure_mode: integer mode numbers per axis.
  std::array<int, 3> mode{1, 0, 0};
  std::string checkpoint;
};

enum class ProbeKind { Conservation, StandingWave, Scattering, BlowupFit, H2Bound, Outcome, Virial, MassMoment, ZNorm };
const char* probe_kind_name(ProbeKind k);

struct ProbeConfig {
  ProbeKind kind = ProbeKind::Conservation;
  /// Verdict and column prefix; defaults to the kind name.
  std::string name;
  double tolerance = 0.0;
  /// conservation
  double mass_tolerance = 1e-10;
  double momentum_tolerance = 1e-10;
  /// standing_wave: comparison time (0 = end of run).
  double time = 0.0;
  /// scattering
  double epsilon = 1e-3;
  bool expect_fired = true;
  /// blowup_fit acceptance band for the exponent.
  std::array<double, 2> band{0.15, 0.35};
  /// h2_bound: max ||Delta u|| <= factor * initial.
  double factor = 3.0;
  /// outcome: expected classification name.
  std::string expect;
  /// virial / mass_moment
  double radius = 10.0;
  int doublings = 0;
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double outside_tolerance = 1e-3;
  /// z_norm: linear fit of the running integral over t >= fit_from.
  double fit_from = 0.0;
  double min_r_squared = 0.9999;
};

struct OutputConfig {
  /// Relative to the output root; empty uses the run name.
  std::string directory;
  bool json = true;
  bool csv = true;
  bool checkpoint = true;
};

struct SimulationConfig {
  std::string name = "run";
  ScenarioConfig scenario;
  EquationParams equation;
  GeometryConfig geometry;
  InitialConfig initial;
  RunControls time;
  std::vector<ProbeConfig> probes;
  OutputConfig output;
};

/// Parses a YAML document. `overrides` are "dotted.path=value" strings
/// applied to the document before validation (sequence entries by index,
/// e.g. "probes.0.radius=20"). Throws ConfigError with line:column.
SimulationConfig parse_config(const std::string& text, const std::string& source = "<config>",
                              const std::vector<std::string>& overrides = {});
SimulationConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Cross-field checks shared by parsed and hand-built configs.
void validate_config(const SimulationConfig& config);

/// Canonical YAML rendering; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const SimulationConfig& config);

}  // namespace fnls::runner
