#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "fnls/runner/checkpoint.hpp"
#include "fnls/runner/presets.hpp"
#include "fnls/runner/scenario.hpp"

namespace {

using namespace fnls;
using namespace fnls::runner;

enum Exit { kOk = 0, kFailedVerdict = 1, kBadInput = 2, kRuntime = 3 };

int finish(const RunReport& rep, const std::filesystem::path& dir) {
  std::cout << format_report(rep);
  if (!dir.empty()) std::cout << "artifacts: " << dir.string() << "\n";
  return rep.passed() ? kOk : kFailedVerdict;
}

int run_one(const SimulationConfig& cfg) {
  const auto res = run_scenario(cfg);
  return finish(res.report, res.directory);
}

/// Runs configs on `jobs` worker threads. Each scenario writes only into
/// its own directory; summaries are printed as runs complete.
int run_batch(const std::vector<SimulationConfig>& configs, unsigned jobs) {
  std::set<std::filesystem::path> dirs;
  for (const auto& c : configs)
    if (!dirs.insert(run_directory(c)).second)
      throw ValidationError("batch: two configs share the output directory '" + run_directory(c).string() + "'");

  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kOk};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      int code = kOk;
      std::string text;
      try {
        const auto res = run_scenario(configs[i]);
        text = format_report(res.report);
        code = res.report.passed() ? kOk : kFailedVerdict;
      } catch (const std::exception& e) {
        text = configs[i].name + ": error: " + e.what() + "\n";
        code = kRuntime;
      }
      std::lock_guard lock(io);
      std::cout << text << std::flush;
      for (int w = worst.load(); code > w && !worst.compare_exchange_weak(w, code);) {
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::max(1u, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return worst.load();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the mass-critical fourth-order NLS"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  auto add_set = [&](CLI::App* sub) {
    sub->add_option("--set", overrides, "Override a config value, e.g. --set time.t_end=2")->take_all();
  };

  auto* run = app.add_subcommand("run", "Run scenarios from YAML config files");
  std::vector<std::string> config_paths;
  bool batch = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  run->add_option("configs", config_paths, "Config files")->required()->check(CLI::ExistingFile);
  run->add_flag("--batch", batch, "Run the configs in parallel");
  run->add_option("--jobs", jobs, "Worker threads for --batch")->check(CLI::PositiveNumber);
  add_set(run);

  auto* preset = app.add_subcommand("preset", "Run a built-in scenario");
  std::string preset_name;
  bool dump = false;
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_flag("--dump", dump, "Print the resolved config instead of running it");
  add_set(preset);

  auto* presets = app.add_subcommand("presets", "List the built-in scenarios");

  auto* gs = app.add_subcommand("groundstate", "Solve for Q and print its table row");
  int gs_n = 1;
  int gs_points = 1024;
  double gs_extent = 20.0;
  bool gs_radial = false;
  int gs_order = 12;
  gs->add_option("n", gs_n, "Spatial dimension")->required()->check(CLI::Range(1, 16));
  gs->add_option("--points", gs_points, "Points per axis, or radial points");
  gs->add_option("--extent", gs_extent, "Box half width L, or r_max");
  gs->add_flag("--radial", gs_radial, "Use the radial grid");
  gs->add_option("--stencil-order", gs_order, "Radial stencil order");

  auto* report = app.add_subcommand("report", "Print the stored report of a run");
  auto* verify = app.add_subcommand("verify", "Re-check the verdicts of a run from its CSV and JSON");
  std::string run_dir;
  for (auto* sub : {report, verify})
    sub->add_option("dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      for (const auto& n : list_presets()) std::cout << n << "\n";
      return kOk;
    }
    if (*preset) {
      const auto cfg = preset_config(preset_name, overrides);
      if (dump) {
        std::cout << to_yaml(cfg);
        return kOk;
      }
      return run_one(cfg);
    }
    if (*run) {
      std::vector<SimulationConfig> configs;
      for (const auto& p : config_paths) configs.push_back(load_config(p, overrides));
      if (batch) return run_batch(configs, jobs);
      int worst = kOk;
      for (const auto& c : configs) worst = std::max(worst, run_one(c));
      return worst;
    }
    if (*gs) {
      SimulationConfig cfg;
      cfg.name = "groundstate_n" + std::to_string(gs_n) + (gs_radial ? "_radial" : "");
      cfg.scenario.kind = ScenarioKind::GroundstateTable;
      cfg.equation.n = gs_n;
      cfg.equation.lambda = -1;
      cfg.geometry = {gs_radial, gs_points, gs_extent, gs_order};
      return run_one(cfg);
    }
    if (*report) return finish(load_report(run_dir), {});
    if (*verify) {
      const auto verdicts = verify_run(run_dir);
      RunReport rep = load_report(run_dir);
      rep.verdicts = verdicts;
      rep.caveats.insert(rep.caveats.begin(), "verdicts recomputed from stored artifacts");
      return finish(rep, {});
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
