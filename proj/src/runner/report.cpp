#include "fnls/runner/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fnls/diagnostics.hpp"
#include "fnls/error.hpp"

namespace fnls::runner {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace

Verdict make_verdict(std::string name, double value, std::string comparator, double limit, std::string detail,
                     double limit_high) {
  Verdict v;
  v.name = std::move(name);
  v.value = value;
  v.comparator = std::move(comparator);
  v.limit = limit;
  v.limit_high = limit_high;
  v.detail = std::move(detail);
  v.passed = evaluate(v);
  return v;
}

bool evaluate(const Verdict& v) {
  if (std::isnan(v.value)) return false;
  if (v.comparator == "<=") return v.value <= v.limit;
  if (v.comparator == ">=") return v.value >= v.limit;
  if (v.comparator == "in") return v.value >= v.limit && v.value <= v.limit_high;
  if (v.comparator == "==") return v.value == v.limit;
  throw ValidationError("unknown verdict comparator '" + v.comparator + "'");
}

bool RunReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

json to_json(const RunReport& r) {
  json j;
  j["name"] = r.name;
  j["scenario"] = r.scenario;
  j["config"] = r.config;
  j["outcome"] = r.outcome;
  j["stop_reason"] = r.stop_reason;
  j["final_time"] = r.final_time;
  j["steps"] = r.steps;
  if (r.drift) j["drift"] = {{"mass", r.drift->mass}, {"momentum", r.drift->momentum}, {"energy", r.drift->energy}};
  else j["drift"] = nullptr;
  j["validity_end"] = number_or_null(r.validity_end);
  j["probes"] = r.probes;
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) {
    json e = {{"name", v.name},     {"passed", v.passed}, {"value", number_or_null(v.value)},
              {"comparator", v.comparator}, {"limit", v.limit}, {"detail", v.detail}};
    if (v.comparator == "in") e["limit_high"] = v.limit_high;
    j["verdicts"].push_back(e);
  }
  j["caveats"] = r.caveats;
  j["passed"] = r.passed();
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    r.name = j.at("name").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.config = j.at("config");
    r.outcome = j.at("outcome").get<std::string>();
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.final_time = j.at("final_time").get<double>();
    r.steps = j.at("steps").get<long>();
    if (!j.at("drift").is_null())
      r.drift = DriftReport{j["drift"].at("mass").get<double>(), j["drift"].at("momentum").get<double>(),
                            j["drift"].at("energy").get<double>()};
    r.validity_end = number_from(j.at("validity_end"), std::numeric_limits<double>::infinity());
    r.probes = j.at("probes");
    for (const auto& e : j.at("verdicts")) {
      Verdict v;
      v.name = e.at("name").get<std::string>();
      v.passed = e.at("passed").get<bool>();
      v.value = number_from(e.at("value"), std::numeric_limits<double>::quiet_NaN());
      v.comparator = e.at("comparator").get<std::string>();
      v.limit = e.at("limit").get<double>();
      v.limit_high = e.value("limit_high", 0.0);
      v.detail = e.at("detail").get<std::string>();
      r.verdicts.push_back(std::move(v));
    }
    r.caveats = j.at("caveats").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::vector<std::string> csv_columns(const TrajectoryRecord& record) {
  std::vector<std::string> c{"t", "mass", "energy"};
  for (int a = 1; a <= record.params.n; ++a) c.push_back("mom_" + std::to_string(a));
  c.insert(c.end(), {"sup_norm", "h2_seminorm", "dt"});
  c.insert(c.end(), record.probe_columns.begin(), record.probe_columns.end());
  return c;
}

void write_csv(const TrajectoryRecord& record, std::ostream& out) {
  const auto cols = csv_columns(record);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  const int n = record.params.n;
  for (std::size_t i = 0; i < record.diagnostics.size(); ++i) {
    const auto& d = record.diagnostics[i];
    const auto& s = record.conserved_series.at(i);
    out << fmt(d.t) << "," << fmt(s.mass) << "," << fmt(s.energy);
    for (int a = 0; a < n; ++a) out << "," << fmt(a < static_cast<int>(s.momentum.size()) ? s.momentum[a] : 0.0);
    out << "," << fmt(d.sup_norm) << "," << fmt(d.h2_seminorm) << "," << fmt(d.dt);
    for (double p : d.probes) out << "," << fmt(p);
    out << "\n";
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> CsvTable::series(const std::string& name) const {
  const auto c = column(name);
  std::vector<double> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back(r[c]);
  return s;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("'" + path.string() + "' is empty");
  {
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) t.columns.push_back(c);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0')
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    if (row.size() != t.columns.size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.columns.size()) + " fields, found " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void emit_report(const RunReport& report, const TrajectoryRecord* record, const std::filesystem::path& dir,
                 bool json_out, bool csv_out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  if (json_out) write_file(dir / kReportFile, to_json(report).dump(2) + "\n");
  if (csv_out && record) {
    std::ostringstream ss;
    write_csv(*record, ss);
    write_file(dir / kSeriesFile, ss.str());
  }
}

RunReport load_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / kReportFile);
  if (!in) throw IoError("no " + std::string(kReportFile) + " in '" + dir.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("cannot parse report: ") + e.what());
  }
  return report_from_json(j);
}

std::string format_report(const RunReport& r) {
  std::ostringstream out;
  out << "run " << r.name << " (" << r.scenario << ")\n";
  if (!r.outcome.empty()) out << "  outcome: " << r.outcome << " at t = " << short_fmt(r.final_time) << " after "
                              << r.steps << " steps (" << r.stop_reason << ")\n";
  if (r.drift)
    out << "  drift: mass " << short_fmt(r.drift->mass) << ", momentum " << short_fmt(r.drift->momentum)
        << ", energy " << short_fmt(r.drift->energy) << "\n";
  if (std::isfinite(r.validity_end) && r.validity_end > 0.0)
    out << "  wraparound validity window ends at t = " << short_fmt(r.validity_end) << "\n";
  for (const auto& v : r.verdicts) {
    out << "  " << (v.passed ? "PASS" : "FAIL") << "  " << v.name << ": " << short_fmt(v.value) << " " << v.comparator
        << " " << short_fmt(v.limit);
    if (v.comparator == "in") out << ".." << short_fmt(v.limit_high);
    if (!v.detail.empty()) out << "  (" << v.detail << ")";
    out << "\n";
  }
  for (const auto& c : r.caveats) out << "  caveat: " << c << "\n";
  out << "  verdict: " << (r.passed() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

namespace {

double max_relative_change(const std::vector<double>& s, double den) {
  double m = 0.0;
  for (double v : s) m = std::max(m, std::abs(v - s.front()) / den);
  return m;
}

/// Recomputes one verdict value from the time series, or returns nullopt.
std::optional<double> recompute(const Verdict& v, const json& probe, const CsvTable& csv, int n) {
  const auto dot = v.name.rfind('.');
  if (dot == std::string::npos || probe.is_null()) return std::nullopt;
  const std::string check = v.name.substr(dot + 1);
  const std::string kind = probe.value("kind", "");
  if (csv.rows.size() < 2) return std::nullopt;

  if (kind == "conservation") {
    if (check == "mass_drift") {
      const auto m = csv.series("mass");
      return m.front() == 0.0 ? 0.0 : max_relative_change(m, m.front());
    }
    if (check == "energy_drift") return max_relative_change(csv.series("energy"), probe.at("energy_denominator"));
    if (check == "momentum_drift") {
      const double den = probe.at("momentum_denominator");
      double worst = 0.0;
      for (const auto& row : csv.rows) {
        double s = 0.0;
        for (int a = 1; a <= n; ++a) {
          const auto c = csv.column("mom_" + std::to_string(a));
          s += (row[c] - csv.rows.front()[c]) * (row[c] - csv.rows.front()[c]);
        }
        worst = std::max(worst, std::sqrt(s) / den);
      }
      return probe.value("momentum_trivial", false) ? 0.0 : worst;
    }
  }
  if (kind == "virial" || kind == "mass_moment") {
    const std::string prefix = probe.at("selected_prefix");
    if (prefix.empty()) return std::nullopt;
    auto r = rate_check_series(csv.series("t"), csv.series(prefix + "_value"), csv.series(prefix + "_rhs"),
                               csv.series(prefix + "_outside"), probe.at("outside_tolerance"));
    if (check == "rate_defect") return r.max_defect;
    if (check == "outside_fraction") return r.max_outside_fraction;
    if (check == "moment_bound") {
      const double ca = moment_cutoff_constant();
      const double radius = probe.at("selected_radius");
      const auto value = csv.series(prefix + "_value");
      const auto mass = csv.series("mass");
      double worst = 0.0;
      for (std::size_t i = 0; i < value.size(); ++i) worst = std::max(worst, std::abs(value[i]) / (ca * radius * mass[i]));
      return worst;
    }
  }
  if (kind == "h2_bound" && check == "growth") {
    const auto h2 = csv.series("h2_seminorm");
    return *std::max_element(h2.begin(), h2.end()) / h2.front();
  }
  if (kind == "z_norm" && check == "linear_r_squared") {
    const auto t = csv.series("t");
    const auto f = csv.series("z_density");
    std::vector<double> running(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) running[i] = running[i - 1] + 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
    return linear_fit_r_squared(t, running, probe.at("fit_from"));
  }
  if (kind == "blowup_fit" && check == "exponent") {
    auto fit = fit_blowup_rate(csv.series("t"), csv.series("n_est"));
    if (!fit) return std::nullopt;
    return fit->exponent;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Verdict> verify_run(const std::filesystem::path& dir) {
  const RunReport report = load_report(dir);
  std::optional<CsvTable> csv;
  if (std::filesystem::exists(dir / kSeriesFile)) csv = read_csv(dir / kSeriesFile);
  const int n = report.config.contains("equation") ? report.config["equation"].value("n", 1) : 1;
  std::vector<Verdict> out;
  for (const auto& stored : report.verdicts) {
    Verdict v = stored;
    const auto dot = v.name.rfind('.');
    const std::string probe_name = dot == std::string::npos ? v.name : v.name.substr(0, dot);
    const json probe = report.probes.contains(probe_name) ? report.probes[probe_name] : json();
    std::optional<double> again;
    if (csv) again = recompute(v, probe, *csv, n);
    if (again) {
      v.value = *again;
      v.detail = "recomputed from " + std::string(kSeriesFile);
    } else {
      v.detail = "stored value re-evaluated";
    }
    v.passed = evaluate(v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fnls::runner
