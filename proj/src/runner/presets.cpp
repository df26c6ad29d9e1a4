#include "fnls/runner/presets.hpp"

namespace fnls::runner {

namespace {

const std::vector<std::pair<std::string, std::string>>& table() {
  static const std::vector<std::pair<std::string, std::string>> presets = {
      {"linear_decay", R"(name: linear_decay
scenario:
  kind: linear_decay
  window: [3, 30]
  samples: 12
equation: {n: 1, lambda: 0}
geometry: {kind: full, points: 16384, extent: 800}
initial_condition: {kind: gaussian, sigma: 1}
)"},
      {"band_decay", R"(name: band_decay
scenario:
  kind: band_decay
  window: [0.02, 0.2]
  samples: 12
  level: 8
equation: {n: 1, lambda: 0}
geometry: {kind: full, points: 65536, extent: 6000}
)"},
      {"refined_strichartz", R"(name: refined_strichartz
scenario:
  kind: refined_strichartz
  draws: 50
  horizon: 0.05
  time_nodes: 33
  rescale: 2
  seed: 7
equation: {n: 1, lambda: 0}
geometry: {kind: full, points: 512, extent: 40}
)"},
      {"defocusing_scatter", R"(name: defocusing_scatter
equation: {n: 1, lambda: 1}
geometry: {kind: full, points: 4096, extent: 2048}
initial_condition: {kind: gaussian, sigma: 2, mass: 0.01}
time: {t_end: 50, dt_max: 0.01, snapshot_every: 50}
probes:
  - {kind: conservation, mass_tolerance: 1e-10, momentum_tolerance: 1e-10}
  - {kind: scattering, epsilon: 1e-3, expect_fired: true}
  - {kind: outcome, expect: scattering}
)"},
      {"focusing_subthreshold", R"(name: focusing_subthreshold
equation: {n: 1, lambda: -1}
geometry: {kind: full, points: 1024, extent: 20}
initial_condition: {kind: ground_state_scaled, mass_factor: 0.9}
time: {t_end: 20, dt_max: 1e-3, snapshot_every: 200, store_snapshots: false}
probes:
  - {kind: conservation, mass_tolerance: 1e-10, momentum_tolerance: 1e-9}
  - {kind: h2_bound, factor: 3}
)"},
      {"focusing_blowup_probe", R"(name: focusing_blowup_probe
equation: {n: 1, lambda: -1}
geometry: {kind: full, points: 8192, extent: 20}
initial_condition: {kind: ground_state_scaled, mass_factor: 1.44}
time: {t_end: 5, dt_max: 1e-3, dt_min: 1e-9, adaptive: true, snapshot_every: 20, store_snapshots: false}
probes:
  - {kind: blowup_fit, band: [0.15, 0.35]}
)"},
      {"standing_wave", R"(name: standing_wave
equation: {n: 1, lambda: -1}
geometry: {kind: full, points: 8192, extent: 160}
initial_condition: {kind: ground_state_scaled, mass_factor: 1}
time: {t_end: 1, dt_max: 1e-3, snapshot_every: 10}
probes:
  - {kind: standing_wave, time: 1, tolerance: 1e-6}
  - {kind: outcome, expect: soliton-like}
  - {kind: scattering, epsilon: 1e-3, expect_fired: false}
)"},
      {"symmetry_audit", R"(name: symmetry_audit
scenario:
  kind: symmetry_audit
  horizon: 0.01
  rescale: 2
  seed: 3
equation: {n: 1, lambda: -1}
geometry: {kind: full, points: 4096, extent: 160}
)"},
      {"virial_audit", R"(name: virial_audit
equation: {n: 1, lambda: 0}
geometry: {kind: full, points: 4096, extent: 320}
initial_condition: {kind: boosted_gaussian, sigma: 2, center: [1, 0, 0], boost: 0.5}
time: {t_end: 1, dt_max: 1e-3, snapshot_every: 25, store_snapshots: false}
probes:
  - {kind: virial, radius: 10, doublings: 2, tolerance: 2e-2}
  - {kind: mass_moment, radius: 10, doublings: 2, tolerance: 2e-2}
)"},
      {"groundstate_table", R"(name: groundstate_table
scenario: {kind: groundstate_table}
equation: {n: 1, lambda: -1}
geometry: {kind: full, points: 1024, extent: 20}
)"},
  };
  return presets;
}

}  // namespace

std::vector<std::string> list_presets() {
  std::vector<std::string> names;
  for (const auto& [name, text] : table()) names.push_back(name);
  return names;
}

const std::string& preset_yaml(const std::string& name) {
  for (const auto& [n, text] : table())
    if (n == name) return text;
  std::string known;
  for (const auto& n : list_presets()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
}

SimulationConfig preset_config(const std::string& name, const std::vector<std::string>& overrides) {
  return parse_config(preset_yaml(name), "preset:" + name, overrides);
}

}  // namespace fnls::runner
