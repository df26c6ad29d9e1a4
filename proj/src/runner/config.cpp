#include "fnls/runner/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fnls::runner {

namespace {

std::string located(const std::string& source, int line, int column, const std::string& message) {
  if (line <= 0) return source + ": " + message;
  return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

template <class E>
struct NameTable {
  E value;
  const char* name;
};

constexpr NameTable<ScenarioKind> kScenarioNames[] = {
    {ScenarioKind::Evolve, "evolve"},
    {ScenarioKind::LinearDecay, "linear_decay"},
    {ScenarioKind::BandDecay, "band_decay"},
    {ScenarioKind::RefinedStrichartz, "refined_strichartz"},
    {ScenarioKind::SymmetryAudit, "symmetry_audit"},
    {ScenarioKind::GroundstateTable, "groundstate_table"},
};

constexpr NameTable<InitialKind> kInitialNames[] = {
    {InitialKind::Gaussian, "gaussian"},
    {InitialKind::GroundStateScaled, "ground_state_scaled"},
    {InitialKind::PureMode, "pure_mode"},
    {InitialKind::BoostedGaussian, "boosted_gaussian"},
    {InitialKind::FromCheckpoint, "from_checkpoint"},
};

constexpr NameTable<ProbeKind> kProbeNames[] = {
    {ProbeKind::Conservation, "conservation"},
    {ProbeKind::StandingWave, "standing_wave"},
    {ProbeKind::Scattering, "scattering"},
    {ProbeKind::BlowupFit, "blowup_fit"},
    {ProbeKind::H2Bound, "h2_bound"},
    {ProbeKind::Outcome, "outcome"},
    {ProbeKind::Virial, "virial"},
    {ProbeKind::MassMoment, "mass_moment"},
    {ProbeKind::ZNorm, "z_norm"},
};

template <class E, std::size_t N>
const char* name_of(const NameTable<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <class E, std::size_t N>
std::string choices(const NameTable<E> (&table)[N]) {
  std::string s;
  for (const auto& e : table) s += (s.empty() ? "" : ", ") + std::string(e.name);
  return s;
}

/// Typed, strict access to one YAML mapping. Every key read is recorded so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const auto m = at.Mark();
    const int line = m.line >= 0 ? m.line + 1 : 0;
    throw ConfigError(source_, line, m.column + 1, message);
  }
  [[noreturn]] void fail_key(const std::string& key, const std::string& message) const {
    fail(node_[key], qualified(key) + ": " + message);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v.IsScalar()) fail(v, qualified(key) + ": expected a scalar");
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, qualified(key) + ": cannot read '" + v.Scalar() + "' as " + type_name<T>());
    }
    if constexpr (std::is_floating_point_v<T>)
      if (!std::isfinite(out)) fail(v, qualified(key) + ": must be finite");
  }

  template <class T, std::size_t N>
  void read_array(const std::string& key, std::array<T, N>& out, std::size_t min_len = 1) {
    if (!has(key)) return;
    seen_.insert(key);
    const YAML::Node v = node_[key];
    if (!v.IsSequence() || v.size() < min_len || v.size() > N)
      fail(v, qualified(key) + ": expected a list of " + std::to_string(min_len) + " to " + std::to_string(N) +
                  " numbers");
    out.fill(T{});
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        out[i] = v[i].as<T>();
      } catch (const YAML::Exception&) {
        fail(v[i], qualified(key) + ": entry " + std::to_string(i) + " is not a " + type_name<T>());
      }
    }
  }

  template <class E, std::size_t N>
  void read_enum(const std::string& key, const NameTable<E> (&table)[N], E& out, bool required) {
    if (!has(key)) {
      if (required) fail(node_, qualified(key) + ": missing (one of " + choices(table) + ")");
      return;
    }
    std::string s;
    read(key, s);
    for (const auto& e : table)
      if (s == e.name) {
        out = e.value;
        return;
      }
    fail_key(key, "unknown value '" + s + "' (expected one of " + choices(table) + ")");
  }

  void reject_unknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, "unknown key '" + qualified(key) + "'");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("<override>", 0, 0, "expected key.path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<override>", 0, 0, "bad value in '" + assignment + "': " + e.msg);
  }
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  YAML::Node cur = root;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    const bool last = i + 1 == parts.size();
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (...) {
        throw ConfigError("<override>", 0, 0, "'" + path + "': '" + p + "' is not a list index");
      }
      if (idx >= cur.size()) throw ConfigError("<override>", 0, 0, "'" + path + "': index " + p + " out of range");
      if (last) {
        cur[idx] = value;
        return;
      }
      YAML::Node next = cur[idx];
      cur.reset(next);
    } else {
      if (last) {
        cur[p] = value;
        return;
      }
      if (!cur[p]) cur[p] = YAML::Node(YAML::NodeType::Map);
      YAML::Node next = cur[p];
      cur.reset(next);
    }
  }
}

void read_probe(Section& s, ProbeConfig& p) {
  s.read_enum("kind", kProbeNames, p.kind, true);
  p.name = probe_kind_name(p.kind);
  switch (p.kind) {
    case ProbeKind::StandingWave: p.tolerance = 1e-6; break;
    case ProbeKind::Virial:
    case ProbeKind::MassMoment: p.tolerance = 2e-2; break;
    default: break;
  }
  s.read("name", p.name);
  s.read("tolerance", p.tolerance);
  s.read("mass_tolerance", p.mass_tolerance);
  s.read("momentum_tolerance", p.momentum_tolerance);
  s.read("time", p.time);
  s.read("epsilon", p.epsilon);
  s.read("expect_fired", p.expect_fired);
  s.read_array("band", p.band, 2);
  s.read("factor", p.factor);
  s.read("expect", p.expect);
  s.read("radius", p.radius);
  s.read("doublings", p.doublings);
  s.read_array("direction", p.direction);
  s.read_array("center", p.center);
  s.read("outside_tolerance", p.outside_tolerance);
  s.read("fit_from", p.fit_from);
  s.read("min_r_squared", p.min_r_squared);
  s.reject_unknown();
}

/// Checks that can point at a YAML node.
void check_located(const Section& root, const SimulationConfig& c) {
  auto at = [&](const char* section, const char* key, const std::string& msg) {
    YAML::Node sec = root.node()[section];
    if (sec && sec[key]) root.fail(sec[key], std::string(section) + "." + key + ": " + msg);
    if (sec) root.fail(sec, std::string(section) + "." + key + ": " + msg);
    root.fail(root.node(), std::string(section) + "." + key + ": " + msg);
  };
  try {
    validate_config(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    // Map the field named in the message back to its node.
    const std::string what = e.what();
    if (what.rfind("probes[", 0) == 0) {
      const auto close = what.find(']');
      const std::size_t idx = std::stoul(what.substr(7, close - 7));
      YAML::Node entry = root.node()["probes"][idx];
      const auto colon = what.find(':');
      const std::string key = what.substr(close + 2, colon - close - 2);
      if (entry[key]) root.fail(entry[key], what);
      root.fail(entry, what);
    }
    const auto dot = what.find('.');
    const auto colon = what.find(':');
    if (dot != std::string::npos && colon != std::string::npos && dot < colon) {
      const std::string section = what.substr(0, dot);
      const std::string key = what.substr(dot + 1, colon - dot - 1);
      if (section.find(' ') == std::string::npos && key.find(' ') == std::string::npos &&
          key.find('[') == std::string::npos)
        at(section.c_str(), key.c_str(), what.substr(colon + 2));
    }
    root.fail(root.node(), what);
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : ValidationError(located(source, line, column, message)), line_(line), column_(column) {}

const char* scenario_kind_name(ScenarioKind k) { return name_of(kScenarioNames, k); }
const char* initial_kind_name(InitialKind k) { return name_of(kInitialNames, k); }
const char* probe_kind_name(ProbeKind k) { return name_of(kProbeNames, k); }

SimulationConfig parse_config(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (!doc || doc.IsNull()) doc = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(doc, o);

  SimulationConfig c;
  Section root(doc, "", source);
  root.read("name", c.name);

  Section sc(root.raw("scenario"), "scenario", source);
  sc.read_enum("kind", kScenarioNames, c.scenario.kind, false);
  sc.read_array("window", c.scenario.window, 2);
  sc.read("samples", c.scenario.samples);
  sc.read("level", c.scenario.level);
  sc.read("near_delta_cells", c.scenario.near_delta_cells);
  sc.read("tolerance", c.scenario.tolerance);
  sc.read("wraparound_tolerance", c.scenario.wraparound_tolerance);
  sc.read("draws", c.scenario.draws);
  sc.read("horizon", c.scenario.horizon);
  sc.read("time_nodes", c.scenario.time_nodes);
  sc.read("rescale", c.scenario.rescale);
  sc.read("seed", c.scenario.seed);
  sc.reject_unknown();

  Section eq(root.raw("equation"), "equation", source);
  eq.read("n", c.equation.n);
  eq.read("lambda", c.equation.lambda);
  eq.reject_unknown();

  Section geo(root.raw("geometry"), "geometry", source);
  std::string gkind = "full";
  geo.read("kind", gkind);
  if (gkind != "full" && gkind != "radial") geo.fail_key("kind", "unknown value '" + gkind + "' (expected full or radial)");
  c.geometry.radial = gkind == "radial";
  geo.read("points", c.geometry.points);
  geo.read("extent", c.geometry.extent);
  geo.read("stencil_order", c.geometry.stencil_order);
  geo.reject_unknown();

  Section ic(root.raw("initial_condition"), "initial_condition", source);
  ic.read_enum("kind", kInitialNames, c.initial.kind, false);
  ic.read("sigma", c.initial.sigma);
  ic.read("amplitude", c.initial.amplitude);
  ic.read("mass", c.initial.mass);
  ic.read("mass_factor", c.initial.mass_factor);
  ic.read_array("center", c.initial.center);
  ic.read("boost", c.initial.boost);
  ic.read_array("direction", c.initial.direction);
  ic.read_array("mode", c.initial.mode);
  ic.read("path", c.initial.checkpoint);
  ic.reject_unknown();

  Section tm(root.raw("time"), "time", source);
  tm.read("t_end", c.time.t_end);
  tm.read("dt_max", c.time.dt_max);
  tm.read("dt_min", c.time.dt_min);
  tm.read("snapshot_every", c.time.snapshot_every);
  tm.read("adaptive", c.time.adaptive);
  tm.read("c_phase", c.time.c_phase);
  tm.read("c_curv", c.time.c_curv);
  tm.read("store_snapshots", c.time.store_snapshots);
  tm.read("max_snapshots", c.time.max_snapshots);
  tm.read("dealias", c.time.step.dealias);
  tm.read("sup_blowup_factor", c.time.sup_blowup_factor);
  tm.read("h2_growth_factor", c.time.h2_growth_factor);
  tm.read("resolution_tolerance", c.time.resolution_tolerance);
  tm.read("mass_abort", c.time.mass_abort);
  tm.reject_unknown();

  if (root.has("probes")) {
    YAML::Node list = root.raw("probes");
    if (!list.IsSequence() && !list.IsNull()) root.fail(list, "probes: expected a list");
    for (std::size_t i = 0; list.IsSequence() && i < list.size(); ++i) {
      Section ps(list[i], "probes[" + std::to_string(i) + "]", source);
      ProbeConfig p;
      read_probe(ps, p);
      c.probes.push_back(p);
    }
  }

  Section out(root.raw("output"), "output", source);
  out.read("directory", c.output.directory);
  out.read("checkpoint", c.output.checkpoint);
  if (out.has("formats")) {
    YAML::Node f = out.raw("formats");
    if (!f.IsSequence()) out.fail(f, "output.formats: expected a list");
    c.output.json = c.output.csv = false;
    for (const auto& e : f) {
      const auto s = e.as<std::string>();
      if (s == "json") c.output.json = true;
      else if (s == "csv") c.output.csv = true;
      else out.fail(e, "output.formats: unknown format '" + s + "' (expected json or csv)");
    }
  }
  out.reject_unknown();
  root.reject_unknown();

  check_located(root, c);
  return c;
}

SimulationConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, overrides);
}

void validate_config(const SimulationConfig& c) {
  c.equation.validate();
  const auto& g = c.geometry;
  if (g.radial) {
    if (c.equation.n < 1) throw ValidationError("equation.n: must be >= 1");
    if (g.points < 8 || g.points > 4096) throw ValidationError("geometry.points: radial grids need 8..4096 nodes");
    if (g.stencil_order < 2 || g.stencil_order % 2) throw ValidationError("geometry.stencil_order: must be even and >= 2");
  } else {
    if (c.equation.n > 3) throw ValidationError("equation.n: full grids support n in {1, 2, 3}; use geometry.kind: radial");
    if (g.points < 16 || (g.points & (g.points - 1)))
      throw ValidationError("geometry.points: must be a power of two >= 16");
  }
  if (!(g.extent > 0.0)) throw ValidationError("geometry.extent: must be positive");
  if (!c.name.empty() && c.name.find_first_of("/\\") != std::string::npos)
    throw ValidationError("name: must not contain path separators");

  const auto& ic = c.initial;
  if (!(ic.sigma > 0.0)) throw ValidationError("initial_condition.sigma: must be positive");
  if (ic.mass < 0.0) throw ValidationError("initial_condition.mass: must be >= 0");
  if (!(ic.mass_factor > 0.0)) throw ValidationError("initial_condition.mass_factor: must be positive");
  if (ic.kind == InitialKind::GroundStateScaled && c.equation.lambda != -1.0)
    throw ValidationError("initial_condition.kind: ground_state_scaled needs the focusing equation (lambda = -1)");
  if (ic.kind == InitialKind::FromCheckpoint && ic.checkpoint.empty())
    throw ValidationError("initial_condition.path: required for from_checkpoint");
  if ((ic.kind == InitialKind::PureMode || ic.kind == InitialKind::BoostedGaussian) && g.radial)
    throw ValidationError("initial_condition.kind: " + std::string(initial_kind_name(ic.kind)) + " needs a full grid");

  const auto& s = c.scenario;
  if (s.kind == ScenarioKind::Evolve) {
    c.time.validate();
  } else {
    if (g.radial && s.kind != ScenarioKind::GroundstateTable)
      throw ValidationError("scenario.kind: " + std::string(scenario_kind_name(s.kind)) + " needs a full grid");
    if (s.kind == ScenarioKind::LinearDecay || s.kind == ScenarioKind::BandDecay) {
      if (!(s.window[0] > 0.0) || !(s.window[1] > s.window[0]))
        throw ValidationError("scenario.window: need 0 < t_min < t_max");
      if (s.samples < 3) throw ValidationError("scenario.samples: must be >= 3");
    }
    if (s.kind == ScenarioKind::BandDecay && !(s.level > 0.0)) throw ValidationError("scenario.level: must be positive");
    if (s.kind == ScenarioKind::RefinedStrichartz) {
      if (s.draws < 1) throw ValidationError("scenario.draws: must be >= 1");
      if (!(s.horizon > 0.0)) throw ValidationError("scenario.horizon: must be positive");
      if (s.time_nodes < 3 || s.time_nodes % 2 == 0) throw ValidationError("scenario.time_nodes: must be odd and >= 3");
      if (c.equation.n > 2) throw ValidationError("equation.n: refined_strichartz supports n in {1, 2}");
    }
    if ((s.kind == ScenarioKind::RefinedStrichartz || s.kind == ScenarioKind::SymmetryAudit) && !(s.rescale > 0.0))
      throw ValidationError("scenario.rescale: must be positive");
    if (s.kind == ScenarioKind::GroundstateTable && c.equation.lambda != -1.0)
      throw ValidationError("equation.lambda: groundstate_table needs lambda = -1");
    if (!c.probes.empty()) throw ValidationError("probes: only evolve scenarios take probes");
  }

  std::set<std::string> names;
  for (std::size_t i = 0; i < c.probes.size(); ++i) {
    const auto& p = c.probes[i];
    const std::string at = "probes[" + std::to_string(i) + "]";
    if (p.name.empty() || p.name.find_first_of(" ,\"") != std::string::npos)
      throw ValidationError(at + ".name: must be non-empty without spaces, commas or quotes");
    if (!names.insert(p.name).second) throw ValidationError(at + ".name: duplicate probe name '" + p.name + "'");
    if (p.tolerance < 0.0) throw ValidationError(at + ".tolerance: must be >= 0");
    const bool spatial = p.kind == ProbeKind::Virial || p.kind == ProbeKind::MassMoment;
    if (spatial) {
      if (g.radial) throw ValidationError(at + ".kind: " + std::string(probe_kind_name(p.kind)) + " needs a full grid");
      if (!(p.radius > 0.0)) throw ValidationError(at + ".radius: must be positive");
      if (p.doublings < 0 || p.doublings > 6) throw ValidationError(at + ".doublings: must be in 0..6");
      double norm = 0.0;
      for (double d : p.direction) norm += d * d;
      if (std::abs(norm - 1.0) > 1e-9) throw ValidationError(at + ".direction: must be a unit vector");
    }
    if (p.kind == ProbeKind::Scattering && !(p.epsilon > 0.0)) throw ValidationError(at + ".epsilon: must be positive");
    if (p.kind == ProbeKind::Scattering && !c.time.store_snapshots)
      throw ValidationError(at + ".kind: scattering needs time.store_snapshots");
    if (p.kind == ProbeKind::BlowupFit && !(p.band[0] < p.band[1]))
      throw ValidationError(at + ".band: need low < high");
    if (p.kind == ProbeKind::H2Bound && !(p.factor >= 1.0)) throw ValidationError(at + ".factor: must be >= 1");
    if (p.kind == ProbeKind::Outcome && p.expect != "scattering" && p.expect != "soliton-like" &&
        p.expect != "blow-up" && p.expect != "inconclusive")
      throw ValidationError(at + ".expect: one of scattering, soliton-like, blow-up, inconclusive");
    if (p.kind == ProbeKind::StandingWave && (c.equation.lambda != -1.0 || c.initial.kind != InitialKind::GroundStateScaled ||
                                              c.initial.mass_factor != 1.0))
      throw ValidationError(at + ".kind: standing_wave needs u0 = Q (ground_state_scaled, mass_factor 1)");
    if (p.kind == ProbeKind::ZNorm && !(p.min_r_squared > 0.0 && p.min_r_squared <= 1.0))
      throw ValidationError(at + ".min_r_squared: must be in (0, 1]");
  }
}

std::string to_yaml(const SimulationConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto arr = [&](const auto& a, std::size_t n) {
    e << YAML::Flow << YAML::BeginSeq;
    for (std::size_t i = 0; i < n; ++i) e << a[i];
    e << YAML::EndSeq;
  };
  const int dims = c.equation.n < 1 ? 1 : std::min(c.equation.n, 3);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;

  const auto& s = c.scenario;
  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << scenario_kind_name(s.kind);
  if (s.kind != ScenarioKind::Evolve) {
    e << YAML::Key << "window" << YAML::Value;
    arr(s.window, 2);
    e << YAML::Key << "samples" << YAML::Value << s.samples;
    e << YAML::Key << "level" << YAML::Value << s.level;
    e << YAML::Key << "near_delta_cells" << YAML::Value << s.near_delta_cells;
    e << YAML::Key << "tolerance" << YAML::Value << s.tolerance;
    e << YAML::Key << "wraparound_tolerance" << YAML::Value << s.wraparound_tolerance;
    e << YAML::Key << "draws" << YAML::Value << s.draws;
    e << YAML::Key << "horizon" << YAML::Value << s.horizon;
    e << YAML::Key << "time_nodes" << YAML::Value << s.time_nodes;
    e << YAML::Key << "rescale" << YAML::Value << s.rescale;
    e << YAML::Key << "seed" << YAML::Value << s.seed;
  }
  e << YAML::EndMap;

  e << YAML::Key << "equation" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "n" << YAML::Value << c.equation.n;
  e << YAML::Key << "lambda" << YAML::Value << c.equation.lambda;
  e << YAML::EndMap;

  e << YAML::Key << "geometry" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << (c.geometry.radial ? "radial" : "full");
  e << YAML::Key << "points" << YAML::Value << c.geometry.points;
  e << YAML::Key << "extent" << YAML::Value << c.geometry.extent;
  if (c.geometry.radial) e << YAML::Key << "stencil_order" << YAML::Value << c.geometry.stencil_order;
  e << YAML::EndMap;

  const auto& ic = c.initial;
  e << YAML::Key << "initial_condition" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << initial_kind_name(ic.kind);
  switch (ic.kind) {
    case InitialKind::Gaussian:
    case InitialKind::BoostedGaussian:
      e << YAML::Key << "sigma" << YAML::Value << ic.sigma;
      e << YAML::Key << "amplitude" << YAML::Value << ic.amplitude;
      e << YAML::Key << "mass" << YAML::Value << ic.mass;
      e << YAML::Key << "center" << YAML::Value;
      arr(ic.center, dims);
      if (ic.kind == InitialKind::BoostedGaussian) {
        e << YAML::Key << "boost" << YAML::Value << ic.boost;
        e << YAML::Key << "direction" << YAML::Value;
        arr(ic.direction, dims);
      }
      break;
    case InitialKind::GroundStateScaled: e << YAML::Key << "mass_factor" << YAML::Value << ic.mass_factor; break;
    case InitialKind::PureMode:
      e << YAML::Key << "amplitude" << YAML::Value << ic.amplitude;
      e << YAML::Key << "mode" << YAML::Value;
      arr(ic.mode, dims);
      break;
    case InitialKind::FromCheckpoint: e << YAML::Key << "path" << YAML::Value << ic.checkpoint; break;
  }
  e << YAML::EndMap;

  const auto& t = c.time;
  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t_end" << YAML::Value << t.t_end;
  e << YAML::Key << "dt_max" << YAML::Value << t.dt_max;
  e << YAML::Key << "dt_min" << YAML::Value << t.dt_min;
  e << YAML::Key << "snapshot_every" << YAML::Value << t.snapshot_every;
  e << YAML::Key << "adaptive" << YAML::Value << t.adaptive;
  e << YAML::Key << "c_phase" << YAML::Value << t.c_phase;
  e << YAML::Key << "c_curv" << YAML::Value << t.c_curv;
  e << YAML::Key << "store_snapshots" << YAML::Value << t.store_snapshots;
  e << YAML::Key << "max_snapshots" << YAML::Value << t.max_snapshots;
  e << YAML::Key << "dealias" << YAML::Value << t.step.dealias;
  e << YAML::Key << "sup_blowup_factor" << YAML::Value << t.sup_blowup_factor;
  e << YAML::Key << "h2_growth_factor" << YAML::Value << t.h2_growth_factor;
  e << YAML::Key << "resolution_tolerance" << YAML::Value << t.resolution_tolerance;
  e << YAML::Key << "mass_abort" << YAML::Value << t.mass_abort;
  e << YAML::EndMap;

  e << YAML::Key << "probes" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.probes) {
    e << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << probe_kind_name(p.kind);
    e << YAML::Key << "name" << YAML::Value << p.name;
    switch (p.kind) {
      case ProbeKind::Conservation:
        e << YAML::Key << "mass_tolerance" << YAML::Value << p.mass_tolerance;
        e << YAML::Key << "momentum_tolerance" << YAML::Value << p.momentum_tolerance;
        e << YAML::Key << "tolerance" << YAML::Value << p.tolerance;
        break;
      case ProbeKind::StandingWave:
        e << YAML::Key << "tolerance" << YAML::Value << p.tolerance;
        e << YAML::Key << "time" << YAML::Value << p.time;
        break;
      case ProbeKind::Scattering:
        e << YAML::Key << "epsilon" << YAML::Value << p.epsilon;
        e << YAML::Key << "expect_fired" << YAML::Value << p.expect_fired;
        break;
      case ProbeKind::BlowupFit:
        e << YAML::Key << "band" << YAML::Value;
        arr(p.band, 2);
        break;
      case ProbeKind::H2Bound: e << YAML::Key << "factor" << YAML::Value << p.factor; break;
      case ProbeKind::Outcome: e << YAML::Key << "expect" << YAML::Value << p.expect; break;
      case ProbeKind::Virial:
      case ProbeKind::MassMoment:
        e << YAML::Key << "tolerance" << YAML::Value << p.tolerance;
        e << YAML::Key << "radius" << YAML::Value << p.radius;
        e << YAML::Key << "doublings" << YAML::Value << p.doublings;
        e << YAML::Key << "direction" << YAML::Value;
        arr(p.direction, dims);
        e << YAML::Key << "center" << YAML::Value;
        arr(p.center, dims);
        e << YAML::Key << "outside_tolerance" << YAML::Value << p.outside_tolerance;
        break;
      case ProbeKind::ZNorm:
        e << YAML::Key << "fit_from" << YAML::Value << p.fit_from;
        e << YAML::Key << "min_r_squared" << YAML::Value << p.min_r_squared;
        break;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << c.output.directory;
  e << YAML::Key << "formats" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  if (c.output.json) e << "json";
  if (c.output.csv) e << "csv";
  e << YAML::EndSeq;
  e << YAML::Key << "checkpoint" << YAML::Value << c.output.checkpoint;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace fnls::runner
