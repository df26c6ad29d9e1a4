#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/conserved.hpp"
#include "fnls/evolution.hpp"

namespace fnls::runner {

/// One acceptance check: `value comparator limit`, where the comparator is
/// "<=", ">=", "in" (limit..limit_high) or "==" (booleans as 0/1).
struct Verdict {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string comparator = "<=";
  double limit = 0.0;
  double limit_high = 0.0;
  std::string detail;
};

Verdict make_verdict(std::string name, double value, std::string comparator, double limit,
                     std::string detail = {}, double limit_high = 0.0);
/// Re-evaluates value against the limits.
bool evaluate(const Verdict& v);

struct RunReport {
  std::string name;
  std::string scenario;
  nlohmann::json config = nlohmann::json::object();
  std::string outcome;
  std::string stop_reason;
  double final_time = 0.0;
  long steps = 0;
  std::optional<DriftReport> drift;
  /// Wraparound validity end t0 + L / (4 xi_max^3); infinite when unset.
  double validity_end = 0.0;
  nlohmann::json probes = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> caveats;

  bool passed() const;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// t, mass, energy, mom_1..mom_n, sup_norm, h2_seminorm, dt, then the probe
/// columns in registration order.
std::vector<std::string> csv_columns(const TrajectoryRecord& record);
/// One row per diagnostic row, values printed with 17 significant digits.
void write_csv(const TrajectoryRecord& record, std::ostream& out);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Index of a column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
  bool has(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kSeriesFile = "timeseries.csv";
inline constexpr const char* kConfigFile = "config.yaml";
inline constexpr const char* kCheckpointFile = "final.ckpt";

/// Writes report.json and (when a record is given) timeseries.csv into dir.
void emit_report(const RunReport& report, const TrajectoryRecord* record, const std::filesystem::path& dir,
                 bool json, bool csv);
RunReport load_report(const std::filesystem::path& dir);

/// Human-readable summary, one verdict per line.
std::string format_report(const RunReport& report);

/// Recomputes every verdict it can from timeseries.csv (conservation drift,
/// rate identities, H^2 bound, Z-norm linearity, blow-up fit) and
/// re-evaluates the stored value against its limits for the rest.
std::vector<Verdict> verify_run(const std::filesystem::path& dir);

}  // namespace fnls::runner
