#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fnls/conserved.hpp"
#include "fnls/error.hpp"
#include "fnls/field.hpp"

namespace fnls {

/// i u_t + Delta^2 u + lambda |u|^{8/n} u = 0. lambda = 0 gives the free flow.
struct EquationParams {
  int n = 1;
  double lambda = -1.0;

  double nonlinear_exponent() const { return 8.0 / n; }
  /// Accepts lambda in {-1, 0, +1}.
  void validate() const;
};

struct StepOptions {
  /// 2/3-rule filter on the phase potential lambda |u|^{8/n} before it is
  /// exponentiated (full grids only).
  bool dealias = true;
};

/// One Strang step: half nonlinear phase, exact linear step, half phase.
/// Throws NumericalError on non-finite output.
ComplexField step(const ComplexField& state, double dt, const EquationParams& params,
                  const StepOptions& options = {});
/// In-place variant used by the integrator.
void step_in_place(ComplexField& state, double dt, const EquationParams& params,
                   const StepOptions& options = {});

struct RunControls {
  double t_end = 1.0;
  double dt_max = 1e-3;
  double dt_min = 1e-9;
  bool adaptive = false;
  double c_phase = 0.05;
  double c_curv = 0.05;
  /// Diagnostic rows (and stored snapshots) every k steps.
  int snapshot_every = 10;
  bool store_snapshots = true;
  std::size_t max_snapshots = 4096;
  StepOptions step;
  /// Blow-up triggers.
  double sup_blowup_factor = 10.0;
  double h2_growth_factor = 4.0;
  /// Fraction of spectral mass allowed in the outer third of modes before
  /// the run is stopped as under-resolved (full grids).
  double resolution_tolerance = 1e-6;
  /// Hard abort threshold on relative mass drift.
  double mass_abort = 1e-6;
  /// Stop once the scattering Cauchy criterion fires at this epsilon (0 = off).
  double stop_on_scatter_epsilon = 0.0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// min(dt_max, c_phase / ||u||_inf^{8/n}, c_curv / ||Delta u||_2^2), clamped
/// below by dt_min. Zero norms leave the corresponding bound inactive.
double adapt_dt(double sup_norm, double h2_seminorm, const EquationParams& params,
                const RunControls& controls);
double adapt_dt(const ComplexField& state, const EquationParams& params, const RunControls& controls);

/// Extra columns sampled at every diagnostic row.
class TrajectoryProbe {
 public:
  virtual ~TrajectoryProbe() = default;
  virtual std::vector<std::string> columns() const = 0;
  virtual std::vector<double> evaluate(const ComplexField& u, const EquationParams& params) const = 0;
};

enum class Outcome { Scattering, SolitonLike, BlowUp, Inconclusive };
const char* outcome_name(Outcome o);

struct DiagnosticRow {
  double t = 0.0;
  double dt = 0.0;
  double sup_norm = 0.0;
  double h2_seminorm = 0.0;
  /// int |u|^{2(n+4)/n} dx at t.
  double z_density = 0.0;
  /// Trapezoid increment of the Z integral since the previous row.
  double z_increment = 0.0;
  double n_est = 0.0;
  std::vector<double> probes;
};

struct Snapshot {
  double t;
  ComplexField field;
};

struct BlowupEstimate {
  double t_star = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;
  double exponent_stderr = 0.0;
};

struct TrajectoryRecord {
  EquationParams params;
  Geometry geometry;
  RunControls controls;
  std::vector<Snapshot> snapshots;
  std::vector<ConservedSnapshot> conserved_series;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<std::string> probe_columns;
  Outcome outcome = Outcome::Inconclusive;
  std::optional<BlowupEstimate> blowup_estimate;
  bool blowup_triggered = false;
  std::string stop_reason;
  long steps = 0;
  double final_time = 0.0;
  std::shared_ptr<ComplexField> final_state;

  explicit TrajectoryRecord(Geometry g) : geometry(std::move(g)) {}
};

/// Raised when the mass drifts past RunControls::mass_abort. Carries the
/// trajectory up to the failing step.
class InstabilityError : public NumericalError {
 public:
  InstabilityError(const std::string& what, std::shared_ptr<TrajectoryRecord> partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const TrajectoryRecord& partial() const { return *partial_; }

 private:
  std::shared_ptr<TrajectoryRecord> partial_;
};

/// Integrates from initial.time_tag (or 0) to t_end, a blow-up trigger, an
/// under-resolution stop, or the optional scattering stop; classifies the
/// outcome at the end.
TrajectoryRecord evolve(const ComplexField& initial, const EquationParams& params,
                        const RunControls& controls,
                        const std::vector<std::shared_ptr<const TrajectoryProbe>>& probes = {});

/// Relative L^2 defect of the Duhamel formula between snapshot times t0 and
/// t1. The integral uses the stored snapshots in between (uniformly spaced)
/// with composite Simpson interpolation of |u|^{8/n}u per mode and the
/// propagator phase integrated exactly (Filon-Simpson). `stride` > 1 uses
/// every stride-th snapshot. Throws ValidationError with fewer than 8
/// quadrature nodes.
double duhamel_residual(const TrajectoryRecord& record, double t0, double t1, int stride = 1);

struct ClassifyOptions {
  /// Relative band (max - min) / mean for the soliton test.
  double soliton_band = 0.05;
  double scatter_epsilon = 1e-3;
};

Outcome classify_outcome(const TrajectoryRecord& record, const ClassifyOptions& options = {});

}  // namespace fnls
