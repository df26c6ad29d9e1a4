#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fnls/evolution.hpp"

namespace fnls {

// ------------------------------------------------------------ Z norm

struct ZNormSeries {
  std::vector<double> times;
  /// Running integral of int |u|^{2(n+4)/n} dx up to each row time.
  std::vector<double> running;
  /// Integral over consecutive windows of `nodes_per_window` rows.
  std::vector<double> window_increments;
  double total = 0.0;
};

/// Time quadrature of the Z integrand recorded in the diagnostic rows
/// (composite Simpson on uniformly spaced rows, trapezoid otherwise).
/// Throws ValidationError when fewer than nodes_per_window rows exist.
ZNormSeries z_norm_accumulate(const TrajectoryRecord& record, int nodes_per_window = 16);

/// R^2 of the least-squares line through (t_i, y_i) over t_i >= t_from.
/// Throws ValidationError with fewer than three points.
double linear_fit_r_squared(const std::vector<double>& t, const std::vector<double>& y, double t_from = 0.0);

/// Z integral of a list of equally spaced states (Simpson).
double z_total(const std::vector<ComplexField>& states, double dt);

// ------------------------------------------------------------ Scale

/// (||Delta u||_2 / ||u||_2)^{1/2}. Throws ValidationError for u = 0.
double scale_estimate(const ComplexField& u);

struct ScaleTrack {
  std::vector<double> times;
  std::vector<double> n_est;
  std::optional<BlowupEstimate> fitted_blowup;
};

struct BlowupFitOptions {
  double min_r_squared = 0.98;
  /// Required span log10((T* - t_first) / (T* - t_last)).
  double min_decades = 1.0;
  /// Only rows with N_est >= growth_start * N_est(first row) enter the fit.
  double growth_start = 1.0;
};

/// Fits log N = a - beta log(T* - t) jointly in (T*, beta). Returns nullopt
/// when the fit is not declared (R^2 or decade requirement unmet, beta <= 0,
/// fewer than 5 samples).
std::optional<BlowupEstimate> fit_blowup_rate(const std::vector<double>& times,
                                              const std::vector<double>& n_est,
                                              const BlowupFitOptions& options = {});
ScaleTrack scale_track(const TrajectoryRecord& record, const BlowupFitOptions& options = {});

// ------------------------------------------------------------ Virial

struct VirialProbe {
  double radius = 10.0;
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

/// A_R = 2 Im int a(z.d/R) (z.d) (d.grad u) conj(u), z = x - center.
double virial_action(const ComplexField& u, const VirialProbe& probe);
/// -16 int ( 1/2 |d.grad grad u|^2 + lambda/(2(n+4)) |u|^{2(n+4)/n} ).
double virial_rate_rhs(const ComplexField& u, const VirialProbe& probe, double lambda);
/// M_R = int a(z.d/R) (z.d) |u|^2.
double mass_moment(const ComplexField& u, const VirialProbe& probe);
/// -4 Im int conj(d.grad u) Delta u.
double mass_moment_rate_rhs(const ComplexField& u, const VirialProbe& probe);
/// Fraction of the mass with |z.d| > R.
double outside_mass_fraction(const ComplexField& u, const VirialProbe& probe);
/// sup_s |s a(s)|: the constant in |M_R| <= C_a R M(u).
double moment_cutoff_constant();

/// Trajectory probe recording A_R and its rate right-hand side.
class VirialTrajectoryProbe : public TrajectoryProbe {
 public:
  explicit VirialTrajectoryProbe(VirialProbe probe, std::string prefix = "virial");
  std::vector<std::string> columns() const override;
  std::vector<double> evaluate(const ComplexField& u, const EquationParams& params) const override;
  const VirialProbe& probe() const { return probe_; }

 private:
  VirialProbe probe_;
  std::string prefix_;
};

/// Trajectory probe recording M_R and its rate right-hand side.
class MassMomentTrajectoryProbe : public TrajectoryProbe {
 public:
  explicit MassMomentTrajectoryProbe(VirialProbe probe, std::string prefix = "moment");
  std::vector<std::string> columns() const override;
  std::vector<double> evaluate(const ComplexField& u, const EquationParams& params) const override;

 private:
  VirialProbe probe_;
  std::string prefix_;
};

struct RateCheck {
  double max_defect = 0.0;
  double max_outside_fraction = 0.0;
  bool r_valid = true;
  std::size_t interior_points = 0;
};

/// Compares the centred finite-difference derivative of a recorded series
/// with its recorded right-hand side: max over interior rows of
/// |dA/dt - rhs| / |rhs|. Rows must be equally spaced in t (the trailing
/// row of a run that ended off-cadence is ignored). `prefix` selects the
/// probe columns (<prefix>_value, <prefix>_rhs, <prefix>_outside).
RateCheck rate_check(const TrajectoryRecord& record, const std::string& prefix,
                     double outside_tolerance = 1e-3);
RateCheck virial_rate_check(const TrajectoryRecord& record, const std::string& prefix = "virial",
                            double outside_tolerance = 1e-3);
RateCheck mass_moment_rate_check(const TrajectoryRecord& record, const std::string& prefix = "moment",
                                 double outside_tolerance = 1e-3);

/// Same check on plain arrays (used by verify on stored CSV data).
RateCheck rate_check_series(const std::vector<double>& t, const std::vector<double>& value,
                            const std::vector<double>& rhs, const std::vector<double>& outside,
                            double outside_tolerance);

// ------------------------------------------------------------ Scattering

struct ScatteringOptions {
  double epsilon = 1e-3;
  /// Spectral tail fraction defining xi_max for the validity window.
  double tail_tolerance = 1e-8;
};

struct ScatteringReport {
  double cauchy_defect = 0.0;   ///< relative to ||u||_2
  bool fired = false;
  double epsilon = 0.0;
  double validity_end = 0.0;    ///< t with 4 xi_max^3 t = L
  double xi_max = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::size_t snapshots_used = 0;
  double profile_mass = 0.0;
  std::optional<ComplexField> profile_plus;
  std::string caveat;
};

/// xi_max such that the spectral mass beyond it is <= tail fraction, and
/// the resulting wraparound validity time L / (4 xi_max^3).
double validity_horizon(const ComplexField& u, double tail_tolerance, double* xi_max = nullptr);

/// w(t) = e^{-it Delta^2} u(t) over the last quarter of the stored snapshots
/// that lie inside the validity window; fired when all pairwise distances
/// (relative to ||u||_2) are <= epsilon. Throws ValidationError with fewer
/// than 4 snapshots in that quarter.
ScatteringReport scattering_probe(const TrajectoryRecord& record, const ScatteringOptions& options = {});

}  // namespace fnls
