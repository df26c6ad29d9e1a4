#include "fnls/runner/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>

#include "fnls/conserved.hpp"
#include "fnls/diagnostics.hpp"
#include "fnls/linear.hpp"
#include "fnls/runner/checkpoint.hpp"

namespace fnls::runner {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Momentum or energy below this fraction of its natural scale at t = 0
// (e.g. zero momentum of a real field) has its drift measured against
// kDriftFloor * scale instead of its own roundoff-sized value.
constexpr double kDriftFloor = 1e-3;

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      json j = json::object();
      for (const auto& kv : node) j[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      json j = json::array();
      for (const auto& e : node) j.push_back(yaml_to_json(e));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (s == "true") return true;
      if (s == "false") return false;
      char* end = nullptr;
      const long long i = std::strtoll(s.c_str(), &end, 10);
      if (!s.empty() && *end == '\0') return i;
      const double d = std::strtod(s.c_str(), &end);
      if (!s.empty() && *end == '\0') return d;
      return s;
    }
    default: return nullptr;
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Column with int |u|^{2(n+4)/n}.
class ZDensityProbe : public TrajectoryProbe {
 public:
  std::vector<std::string> columns() const override { return {"z_density"}; }
  std::vector<double> evaluate(const ComplexField& u, const EquationParams& p) const override {
    return {lp_integral(u, 2.0 * (p.n + 4) / p.n)};
  }
};

class ScaleProbe : public TrajectoryProbe {
 public:
  std::vector<std::string> columns() const override { return {"n_est"}; }
  std::vector<double> evaluate(const ComplexField& u, const EquationParams&) const override {
    return {scale_estimate(u)};
  }
};

std::vector<double> radii_of(const ProbeConfig& p) {
  std::vector<double> r;
  for (int k = 0; k <= p.doublings; ++k) r.push_back(p.radius * std::pow(2.0, k));
  return r;
}

std::string radius_prefix(const ProbeConfig& p, double R) { return p.name + "_R" + num(R); }

double relative_distance(const ComplexField& a, const ComplexField& b) {
  ComplexField d(a.geometry());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return lp_norm(d, 2.0) / lp_norm(b, 2.0);
}

const ComplexField* state_at(const TrajectoryRecord& rec, double t) {
  if (rec.final_state && std::abs(rec.final_time - t) <= 1e-12 * std::max(1.0, t)) return rec.final_state.get();
  for (const auto& s : rec.snapshots)
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, t)) return &s.field;
  return nullptr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

ComplexField scaled(const ComplexField& u, cplx c) {
  ComplexField v(u.geometry(), CVector(u.data()), u.time_tag);
  for (auto& x : v.values()) x *= c;
  return v;
}

// ------------------------------------------------------------ evolve

void evaluate_probes(const SimulationConfig& cfg, const ComplexField& u0, const TrajectoryRecord& rec,
                     RunReport& rep) {
  for (const auto& p : cfg.probes) {
    json info = {{"kind", probe_kind_name(p.kind)}};
    const std::string& nm = p.name;
    try {
      switch (p.kind) {
        case ProbeKind::Conservation: {
          const auto d = drift_report(rec, kDriftFloor);
          const auto& s0 = rec.conserved_series.front();
          double m0 = 0.0;
          for (double m : s0.momentum) m0 += m * m;
          info["momentum_denominator"] = std::max({std::sqrt(m0), kDriftFloor * s0.momentum_scale, 1e-300});
          info["energy_denominator"] = std::max({std::abs(s0.energy), kDriftFloor * s0.energy_scale, 1e-300});
          info["momentum_trivial"] = s0.momentum_scale == 0.0 && m0 == 0.0;
          rep.verdicts.push_back(make_verdict(nm + ".mass_drift", d.mass, "<=", p.mass_tolerance));
          if (!s0.radial)
            rep.verdicts.push_back(make_verdict(nm + ".momentum_drift", d.momentum, "<=", p.momentum_tolerance));
          if (p.tolerance > 0.0) rep.verdicts.push_back(make_verdict(nm + ".energy_drift", d.energy, "<=", p.tolerance));
          break;
        }
        case ProbeKind::StandingWave: {
          const double T = p.time > 0.0 ? p.time : cfg.time.t_end;
          const ComplexField* u = state_at(rec, T);
          double err = std::numeric_limits<double>::quiet_NaN();
          std::string detail = "||u(T) - e^{-iT} Q|| / ||Q|| at T = " + num(T);
          if (u) err = relative_distance(*u, scaled(u0, std::polar(1.0, -T)));
          else detail = "no stored state at T = " + num(T);
          info["time"] = T;
          rep.verdicts.push_back(make_verdict(nm + ".error", err, "<=", p.tolerance, detail));
          break;
        }
        case ProbeKind::Scattering: {
          ScatteringOptions o;
          o.epsilon = p.epsilon;
          const auto s = scattering_probe(rec, o);
          info["cauchy_defect"] = s.cauchy_defect;
          info["fired"] = s.fired;
          info["epsilon"] = s.epsilon;
          info["window"] = {s.window_start, s.window_end};
          info["validity_end"] = s.validity_end;
          info["profile_mass"] = s.profile_mass;
          info["caveat"] = s.caveat;
          rep.verdicts.push_back(make_verdict(nm + ".fired", s.fired ? 1.0 : 0.0, "==", p.expect_fired ? 1.0 : 0.0,
                                              "cauchy defect " + num(s.cauchy_defect) + " at epsilon " + num(p.epsilon)));
          if (p.expect_fired && s.fired)
            rep.verdicts.push_back(make_verdict(nm + ".profile_mass_error", std::abs(s.profile_mass / mass(u0) - 1.0),
                                                "<=", 1e-6, "M(omega+) against M(u0)"));
          break;
        }
        case ProbeKind::BlowupFit: {
          const auto track = scale_track(rec);
          if (track.fitted_blowup) {
            const auto& f = *track.fitted_blowup;
            info["t_star"] = f.t_star;
            info["exponent"] = f.exponent;
            info["exponent_stderr"] = f.exponent_stderr;
            info["r_squared"] = f.r_squared;
            rep.verdicts.push_back(make_verdict(nm + ".exponent", f.exponent, "in", p.band[0],
                                                "T* = " + num(f.t_star) + ", R^2 = " + num(f.r_squared) +
                                                    ", stderr " + num(f.exponent_stderr),
                                                p.band[1]));
          } else {
            info["declared"] = false;
            rep.verdicts.push_back(make_verdict(nm + ".inconclusive", 1.0, "==", 1.0,
                                                "no power-law fit declared; reported as inconclusive"));
          }
          break;
        }
        case ProbeKind::H2Bound: {
          double peak = 0.0;
          for (const auto& r : rec.diagnostics) peak = std::max(peak, r.h2_seminorm);
          const double growth = peak / rec.diagnostics.front().h2_seminorm;
          rep.verdicts.push_back(make_verdict(nm + ".growth", growth, "<=", p.factor, "max ||Delta u|| / initial"));
          rep.verdicts.push_back(make_verdict(nm + ".no_blowup_trigger", rec.blowup_triggered ? 0.0 : 1.0, "==", 1.0,
                                              rec.stop_reason));
          break;
        }
        case ProbeKind::Outcome: {
          const std::string got = outcome_name(rec.outcome);
          rep.verdicts.push_back(make_verdict(nm + ".matches", got == p.expect ? 1.0 : 0.0, "==", 1.0,
                                              "classified " + got + ", expected " + p.expect));
          break;
        }
        case ProbeKind::Virial:
        case ProbeKind::MassMoment: {
          const auto radii = radii_of(p);
          std::vector<RateCheck> checks;
          std::size_t sel = radii.size() - 1;
          bool found = false;
          json per = json::array();
          for (std::size_t k = 0; k < radii.size(); ++k) {
            checks.push_back(rate_check(rec, radius_prefix(p, radii[k]), p.outside_tolerance));
            per.push_back({{"radius", radii[k]},
                           {"max_defect", checks.back().max_defect},
                           {"max_outside_fraction", checks.back().max_outside_fraction},
                           {"r_valid", checks.back().r_valid}});
            if (!found && checks.back().r_valid) {
              sel = k;
              found = true;
            }
          }
          info["radii"] = per;
          info["selected_prefix"] = radius_prefix(p, radii[sel]);
          info["selected_radius"] = radii[sel];
          info["outside_tolerance"] = p.outside_tolerance;
          const std::string at = "R = " + num(radii[sel]);
          rep.verdicts.push_back(make_verdict(nm + ".rate_defect", checks[sel].max_defect, "<=", p.tolerance, at));
          rep.verdicts.push_back(make_verdict(nm + ".outside_fraction", checks[sel].max_outside_fraction, "<=",
                                              p.outside_tolerance, at));
          if (radii.size() > 1) {
            double rise = -kInf;
            for (std::size_t k = 1; k < checks.size(); ++k)
              rise = std::max(rise, checks[k].max_defect - checks[k - 1].max_defect);
            rep.verdicts.push_back(make_verdict(nm + ".radius_monotone", rise, "<=", 1e-3,
                                                "largest defect increase when R doubles"));
          }
          if (p.kind == ProbeKind::MassMoment) {
            const auto& cols = rec.probe_columns;
            const auto c = static_cast<std::size_t>(
                std::find(cols.begin(), cols.end(), radius_prefix(p, radii[sel]) + "_value") - cols.begin());
            double worst = 0.0;
            for (std::size_t i = 0; i < rec.diagnostics.size(); ++i)
              worst = std::max(worst, std::abs(rec.diagnostics[i].probes[c]) /
                                          (moment_cutoff_constant() * radii[sel] * rec.conserved_series[i].mass));
            rep.verdicts.push_back(make_verdict(nm + ".moment_bound", worst, "<=", 1.0 + 1e-12,
                                                "max |M_R| / (C_a R M(u))"));
          }
          break;
        }
        case ProbeKind::ZNorm: {
          const auto z = z_norm_accumulate(rec, 2);
          info["total"] = z.total;
          info["fit_from"] = p.fit_from;
          const double r2 = linear_fit_r_squared(z.times, z.running, p.fit_from);
          rep.verdicts.push_back(make_verdict(nm + ".linear_r_squared", r2, ">=", p.min_r_squared,
                                              "running Z integral against t for t >= " + num(p.fit_from)));
          break;
        }
      }
    } catch (const std::exception& e) {
      info["error"] = e.what();
      rep.verdicts.push_back(make_verdict(nm + ".evaluated", 0.0, "==", 1.0, e.what()));
    }
    rep.probes[nm] = info;
  }
}

std::shared_ptr<TrajectoryRecord> run_evolve(const SimulationConfig& cfg, RunReport& rep, const RunOptions& opts,
                                             const std::filesystem::path& dir) {
  std::optional<GroundState> gs;
  const ComplexField u0 = build_initial_state(cfg, &gs);
  if (gs)
    rep.probes["ground_state"] = {{"mass_q", gs->mass_q},
                                  {"m_star", gs->threshold_m_star},
                                  {"residual", gs->residual},
                                  {"pohozaev", gs->pohozaev_residuals}};

  std::vector<std::shared_ptr<const TrajectoryProbe>> probes;
  for (const auto& p : cfg.probes) {
    if (p.kind == ProbeKind::Virial || p.kind == ProbeKind::MassMoment)
      for (double R : radii_of(p)) {
        VirialProbe vp;
        vp.radius = R;
        vp.direction = p.direction;
        vp.center = p.center;
        if (p.kind == ProbeKind::Virial) probes.push_back(std::make_shared<VirialTrajectoryProbe>(vp, radius_prefix(p, R)));
        else probes.push_back(std::make_shared<MassMomentTrajectoryProbe>(vp, radius_prefix(p, R)));
      }
    if (p.kind == ProbeKind::ZNorm) probes.push_back(std::make_shared<ZDensityProbe>());
    if (p.kind == ProbeKind::BlowupFit) probes.push_back(std::make_shared<ScaleProbe>());
  }

  const double t0 = u0.time_tag.value_or(0.0);
  double xi_max = 0.0;
  rep.validity_end = t0 + validity_horizon(u0, 1e-8, &xi_max);

  std::shared_ptr<TrajectoryRecord> rec;
  try {
    rec = std::make_shared<TrajectoryRecord>(evolve(u0, cfg.equation, cfg.time, probes));
  } catch (const InstabilityError& e) {
    rec = std::make_shared<TrajectoryRecord>(e.partial());
    rep.verdicts.push_back(make_verdict("run.mass_stability", 0.0, "==", 1.0, e.what()));
    rep.caveats.push_back(std::string("run aborted: ") + e.what());
  }
  rep.outcome = outcome_name(rec->outcome);
  rep.stop_reason = rec->stop_reason;
  rep.final_time = rec->final_time;
  rep.steps = rec->steps;
  if (rec->conserved_series.size() >= 2) rep.drift = drift_report(*rec, kDriftFloor);

  if (rep.verdicts.empty()) evaluate_probes(cfg, u0, *rec, rep);
  if (rec->final_time > rep.validity_end) {
    rep.caveats.push_back("run extends past the wraparound validity window (t > " + num(rep.validity_end) +
                          ", xi_max = " + num(xi_max) + "); periodic-box effects may enter later rows");
    for (auto& [name, info] : rep.probes.items())
      if (info.is_object() && name != "ground_state") info["evaluated_past_validity_window"] = true;
  }

  if (opts.write && cfg.output.checkpoint && rec->final_state)
    save_checkpoint(*rec->final_state, rec->final_time, rec->diagnostics.empty() ? 0.0 : rec->diagnostics.back().dt,
                    (dir / kCheckpointFile).string());
  return rec;
}

// ------------------------------------------------------------ decay

void run_decay(const SimulationConfig& cfg, RunReport& rep, const RunOptions& opts, const std::filesystem::path& dir) {
  const auto& sc = cfg.scenario;
  const int n = cfg.equation.n;
  const Geometry geom = build_geometry(cfg);
  DecayOptions o;
  o.window_min = sc.window[0];
  o.window_max = sc.window[1];
  o.wraparound_tolerance = sc.wraparound_tolerance;
  const auto times = log_spaced(sc.window[0], sc.window[1], static_cast<std::size_t>(sc.samples));
  DecayFit fit;
  double expected = 0.0, tol = sc.tolerance;
  if (sc.kind == ScenarioKind::LinearDecay) {
    fit = decay_probe(build_initial_state(cfg), times, o);
    expected = -n / 4.0;
    if (tol <= 0.0) tol = 0.05;
  } else {
    fit = band_decay_probe(geom.full_ptr(), sc.level, times, o, sc.near_delta_cells);
    expected = -n / 2.0;
    if (tol <= 0.0) tol = 0.1;
  }
  double worst = 0.0;
  for (double c : fit.box_contamination) worst = std::max(worst, c);
  rep.probes["decay"] = {{"slope", fit.fitted_slope},   {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared},  {"samples", fit.samples_in_window},
                         {"valid", fit.valid},          {"note", fit.note},
                         {"max_box_contamination", worst}};
  if (sc.kind == ScenarioKind::BandDecay) rep.probes["decay"]["level"] = sc.level;
  rep.verdicts.push_back(make_verdict("decay.slope", fit.fitted_slope, "in", expected - tol,
                                      "expected " + num(expected), expected + tol));
  rep.verdicts.push_back(make_verdict("decay.box_contamination", worst, "<=", sc.wraparound_tolerance,
                                      "sup-norm difference against a doubled box"));
  if (opts.write) {
    std::string csv = "t,sup_norm,box_contamination\n";
    char buf[96];
    for (std::size_t i = 0; i < fit.times.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fit.times[i], fit.sup_norms[i],
                    i < fit.box_contamination.size() ? fit.box_contamination[i] : 0.0);
      csv += buf;
    }
    write_text(dir / "decay.csv", csv);
  }
}

// ------------------------------------------------------------ Strichartz

void run_strichartz(const SimulationConfig& cfg, RunReport& rep) {
  const auto& sc = cfg.scenario;
  const auto coarse = make_grid(cfg.equation.n, cfg.geometry.points, cfg.geometry.extent);
  const auto fine = make_grid(cfg.equation.n, 2 * cfg.geometry.points, cfg.geometry.extent);
  const StrichartzOptions so{sc.time_nodes};
  std::mt19937_64 rng(sc.seed);
  double worst_coarse = 0.0, worst_fine = 0.0, worst_rescale = 0.0;
  int nonfinite = 0;
  const double h = sc.rescale;
  for (int d = 0; d < sc.draws; ++d) {
    const auto seed = rng();
    std::mt19937_64 r1(seed), r2(seed);
    auto uc = random_packets(Geometry(coarse), r1, 4, 0.2, 4.0);
    auto uf = random_packets(Geometry(fine), r2, 4, 0.2, 4.0);
    const auto a = refined_strichartz_ratio(uc, sc.horizon, so);
    const auto b = refined_strichartz_ratio(uf, sc.horizon, so);
    if (!std::isfinite(a.ratio) || !std::isfinite(b.ratio)) ++nonfinite;
    worst_coarse = std::max(worst_coarse, a.ratio);
    worst_fine = std::max(worst_fine, b.ratio);
    if (d < 5) {
      const auto v = rescale_g(uf, h, {0.0, 0.0, 0.0}, 1e-6);
      const auto c = refined_strichartz_ratio(v, sc.horizon / std::pow(h, 4), so);
      worst_rescale = std::max(worst_rescale, std::abs(c.ratio / b.ratio - 1.0));
    }
  }
  const double refine = std::abs(worst_fine / worst_coarse - 1.0);
  rep.probes["strichartz"] = {{"draws", sc.draws},
                              {"max_ratio_coarse", worst_coarse},
                              {"max_ratio_fine", worst_fine},
                              {"rescale_factor", h}};
  rep.verdicts.push_back(make_verdict("strichartz.nonfinite_draws", nonfinite, "==", 0.0));
  rep.verdicts.push_back(make_verdict("strichartz.rescale", worst_rescale, "<=", sc.tolerance > 0 ? sc.tolerance : 1e-2,
                                      "relative change under g-rescaling with T -> T/h^4"));
  rep.verdicts.push_back(make_verdict("strichartz.refinement", refine, "<=", 0.25,
                                      "max ratio on 2x points against the base grid"));
}

// ------------------------------------------------------------ symmetry

ComplexField run_to(const ComplexField& u0, const EquationParams& p, double t_end, double dt) {
  RunControls c;
  c.t_end = t_end;
  c.dt_max = dt;
  c.dt_min = std::min(dt, c.dt_min);
  c.snapshot_every = 1 << 30;
  c.store_snapshots = false;
  return *evolve(u0, p, c).final_state;
}

void run_symmetry(const SimulationConfig& cfg, RunReport& rep) {
  const auto& sc = cfg.scenario;
  const Geometry geom = build_geometry(cfg);
  const EquationParams eq = cfg.equation;
  std::mt19937_64 rng(sc.seed);
  const double h = sc.rescale;

  double mass_change = 0.0;
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  for (int i = 0; i < 10; ++i) {
    const auto u = random_packets(geom, rng, 3, 0.1, 1.0);
    for (double hh : {0.8, 1.25}) {
      const std::array<double, 3> x0{shift(rng), shift(rng), shift(rng)};
      const auto v = rescale_g(u, hh, x0, 1.0);
      mass_change = std::max(mass_change, std::abs(mass(v) / mass(u) - 1.0));
    }
  }
  rep.verdicts.push_back(make_verdict("symmetry.g_mass", mass_change, "<=", 1e-8, "10 fields, h in {0.8, 1.25}"));

  auto u0 = scaled(random_packets(geom, rng, 3, 0.15, 1.0), 0.5);
  const double t = sc.horizon;
  const double dt = t / 100.0;
  const auto v = run_to(rescale_g(u0, h, {0.0, 0.0, 0.0}), eq, t, dt);
  const auto u = run_to(u0, eq, std::pow(h, 4) * t, std::pow(h, 4) * dt);
  const double cov = relative_distance(v, rescale_g(u, h, {0.0, 0.0, 0.0}));
  rep.verdicts.push_back(make_verdict("symmetry.scaling_covariance", cov, "<=", 1e-4,
                                      "h = " + num(h) + ", t = " + num(t)));

  auto w0 = scaled(random_packets(geom, rng, 3, 0.05, 1.0), 0.5);
  RunControls c;
  c.t_end = 0.5;
  c.dt_max = 5e-4;
  c.snapshot_every = 20;
  const auto rec = evolve(w0, eq, c);
  std::vector<ComplexField> states;
  for (const auto& s : rec.snapshots) states.push_back(s.field);
  const double step = c.t_end / static_cast<double>(states.size() - 1);
  const double z0 = z_total(states, step);
  double worst = 0.0;
  for (double hh : {1.5, 0.7}) {
    std::vector<ComplexField> sc_states;
    for (const auto& s : states) sc_states.push_back(rescale_g(s, hh, {0.0, 0.0, 0.0}, 1e-2));
    worst = std::max(worst, std::abs(z_total(sc_states, step / std::pow(hh, 4)) / z0 - 1.0));
  }
  rep.probes["symmetry"] = {{"z_total", z0}};
  rep.verdicts.push_back(make_verdict("symmetry.z_tau", worst, "<=", 1e-4, "h in {1.5, 0.7}"));
}

}  // namespace

// ------------------------------------------------------------ public

std::filesystem::path output_root() {
  const char* env = std::getenv("FNLS_OUTPUT_ROOT");
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("fnls_runs");
}

std::filesystem::path run_directory(const SimulationConfig& c) {
  return output_root() / (c.output.directory.empty() ? c.name : c.output.directory);
}

Geometry build_geometry(const SimulationConfig& c) {
  const auto& g = c.geometry;
  if (g.radial) return Geometry(make_radial_grid(c.equation.n, g.points, g.extent, g.stencil_order));
  return Geometry(make_grid(c.equation.n, g.points, g.extent));
}

ComplexField build_initial_state(const SimulationConfig& c, std::optional<GroundState>* ground_state) {
  const auto& ic = c.initial;
  if (ic.kind == InitialKind::FromCheckpoint) {
    auto ck = load_checkpoint(ic.checkpoint);
    require_matching_geometry(ck.field.geometry(), build_geometry(c));
    return std::move(ck.field);
  }
  const Geometry geom = build_geometry(c);
  const int n = geom.dim();
  switch (ic.kind) {
    case InitialKind::GroundStateScaled: {
      auto gs = solve_ground_state(n, geom);
      auto u = scaled(gs.profile, std::sqrt(ic.mass_factor));
      if (ground_state) ground_state->emplace(std::move(gs));
      return u;
    }
    case InitialKind::PureMode: return plane_wave(geom.full_ptr(), ic.mode, ic.amplitude);
    default: break;
  }
  auto u = sample(geom, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += (x[a] - ic.center[a]) * (x[a] - ic.center[a]);
    if (geom.is_radial()) r2 = x[0] * x[0];
    return cplx(ic.amplitude * std::exp(-0.5 * r2 / (ic.sigma * ic.sigma)), 0.0);
  });
  if (ic.mass > 0.0) u = scaled(u, std::sqrt(ic.mass / mass(u)));
  if (ic.kind == InitialKind::BoostedGaussian) u = boost(u, ic.boost, ic.direction);
  return u;
}

RunReport groundstate_report(int n, const Geometry& geometry, const Geometry& refined,
                             std::optional<GroundState>* solved) {
  RunReport rep;
  rep.scenario = scenario_kind_name(ScenarioKind::GroundstateTable);
  auto gs = solve_ground_state(n, geometry);
  auto fine = solve_ground_state(n, refined);
  const auto th = mass_thresholds(gs);
  rep.probes["ground_state"] = {{"n", n},
                                {"mass_q", gs.mass_q},
                                {"mass_q_refined", fine.mass_q},
                                {"m_star", th.m_star},
                                {"residual", gs.residual},
                                {"preconditioned_residual", gs.preconditioned_residual},
                                {"pohozaev", gs.pohozaev_residuals},
                                {"gn_ratio", gs.gn_ratio_at_q},
                                {"iterations", gs.iterations},
                                {"tail_mass", gs.tail_mass}};
  // The raw residual carries eps * max|xi|^4 of roundoff; radial grids are
  // judged on the preconditioned residual.
  if (geometry.is_full())
    rep.verdicts.push_back(make_verdict("groundstate.residual", gs.residual, "<=", 1e-8));
  else
    rep.verdicts.push_back(make_verdict("groundstate.residual", gs.preconditioned_residual, "<=", 1e-8,
                                        "preconditioned; raw " + num(gs.residual)));
  rep.verdicts.push_back(make_verdict("groundstate.pohozaev_q", gs.pohozaev_residuals[0], "<=", 1e-6));
  rep.verdicts.push_back(make_verdict("groundstate.pohozaev_dilation", gs.pohozaev_residuals[1], "<=", 1e-6));
  rep.verdicts.push_back(make_verdict("groundstate.refinement", std::abs(fine.mass_q / gs.mass_q - 1.0), "<=", 1e-4,
                                      "M(Q) on twice the points"));
  rep.verdicts.push_back(make_verdict("groundstate.gn_ratio", std::abs(gs.gn_ratio_at_q - 1.0), "<=", 1e-3));
  rep.verdicts.push_back(make_verdict("groundstate.m_star_formula", std::abs(th.m_star - m_star_formula(gs.mass_q, n)),
                                      "==", 0.0, "M* = (1/4)^{n/8} M(Q)"));
  if (solved) solved->emplace(std::move(gs));
  return rep;
}

ScenarioResult run_scenario(const SimulationConfig& cfg, const RunOptions& opts) {
  validate_config(cfg);
  ScenarioResult res;
  res.directory = opts.directory ? *opts.directory : run_directory(cfg);
  if (opts.write) {
    std::error_code ec;
    std::filesystem::create_directories(res.directory, ec);
    if (ec) throw IoError("cannot create '" + res.directory.string() + "': " + ec.message());
    write_text(res.directory / kConfigFile, to_yaml(cfg));
  }

  RunReport& rep = res.report;
  const auto yaml = to_yaml(cfg);
  switch (cfg.scenario.kind) {
    case ScenarioKind::Evolve: res.record = run_evolve(cfg, rep, opts, res.directory); break;
    case ScenarioKind::LinearDecay:
    case ScenarioKind::BandDecay: run_decay(cfg, rep, opts, res.directory); break;
    case ScenarioKind::RefinedStrichartz: run_strichartz(cfg, rep); break;
    case ScenarioKind::SymmetryAudit: run_symmetry(cfg, rep); break;
    case ScenarioKind::GroundstateTable: {
      const Geometry geom = build_geometry(cfg);
      SimulationConfig fine = cfg;
      fine.geometry.points *= 2;
      std::optional<GroundState> gs;
      rep = groundstate_report(cfg.equation.n, geom, build_geometry(fine), &gs);
      if (opts.write && cfg.output.checkpoint) save_checkpoint(gs->profile, 0.0, 0.0, (res.directory / "Q.ckpt").string());
      break;
    }
  }
  rep.name = cfg.name;
  rep.scenario = scenario_kind_name(cfg.scenario.kind);
  rep.config = yaml_to_json(YAML::Load(yaml));
  if (cfg.scenario.kind != ScenarioKind::Evolve && rep.validity_end == 0.0) rep.validity_end = kInf;
  if (opts.write) emit_report(rep, res.record.get(), res.directory, cfg.output.json, cfg.output.csv);
  return res;
}

}  // namespace fnls::runner
