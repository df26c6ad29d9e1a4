#include "fnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fnls/error.hpp"
#include "fnls/linear.hpp"

namespace fnls {

// ------------------------------------------------------------ Z norm

namespace {

bool uniformly_spaced(const std::vector<double>& t, std::size_t count) {
  if (count < 3) return true;
  const double h = t[1] - t[0];
  for (std::size_t i = 2; i < count; ++i)
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(h, 1e-300)) return false;
  return true;
}

}  // namespace

ZNormSeries z_norm_accumulate(const TrajectoryRecord& record, int nodes_per_window) {
  const auto& rows = record.diagnostics;
  if (nodes_per_window < 2) throw ValidationError("nodes_per_window must be >= 2");
  if (rows.size() < static_cast<std::size_t>(nodes_per_window))
    throw ValidationError("snapshot cadence too coarse: " + std::to_string(rows.size()) +
                          " rows, need at least " + std::to_string(nodes_per_window));
  ZNormSeries z;
  std::vector<double> f;
  for (const auto& r : rows) {
    z.times.push_back(r.t);
    f.push_back(r.z_density);
  }
  z.running.assign(rows.size(), 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i)
    z.running[i] = z.running[i - 1] + 0.5 * (f[i] + f[i - 1]) * (z.times[i] - z.times[i - 1]);

  const std::size_t per = static_cast<std::size_t>(nodes_per_window) - 1;
  for (std::size_t s = 0; s + per < rows.size(); s += per) z.window_increments.push_back(z.running[s + per] - z.running[s]);

  if (uniformly_spaced(z.times, z.times.size()) && z.times.size() >= 3) {
    auto w = simpson_weights(z.times.size(), z.times.back() - z.times.front());
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
    z.total = s;
  } else {
    z.total = z.running.back();
  }
  return z;
}

double linear_fit_r_squared(const std::vector<double>& t, const std::vector<double>& y, double t_from) {
  if (t.size() != y.size()) throw ValidationError("linear fit: array lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_from) continue;
    ++m;
    sx += t[i];
    sy += y[i];
  }
  if (m < 3) throw ValidationError("linear fit needs at least three points");
  const double tx = sx / m, ty = sy / m;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_from) continue;
    sxx += (t[i] - tx) * (t[i] - tx);
    sxy += (t[i] - tx) * (y[i] - ty);
    syy += (y[i] - ty) * (y[i] - ty);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

double z_total(const std::vector<ComplexField>& states, double dt) {
  if (states.size() < 2) throw ValidationError("z_total needs at least two states");
  auto w = simpson_weights(states.size(), dt * static_cast<double>(states.size() - 1));
  double s = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const int n = states[i].geometry().dim();
    s += w[i] * lp_integral(states[i], 2.0 * (n + 4) / n);
  }
  return s;
}

// ------------------------------------------------------------ Scale

double scale_estimate(const ComplexField& u) {
  const double m = lp_norm(u, 2.0);
  if (m == 0.0) throw ValidationError("scale estimate undefined for the zero field");
  return std::sqrt(sobolev_seminorm(u, 2.0) / m);
}

namespace {

struct PowerFit {
  double beta = 0.0;
  double intercept = 0.0;
  double sse = std::numeric_limits<double>::infinity();
  double sst = 0.0;
  double beta_stderr = 0.0;
};

PowerFit fit_for(double t_star, const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(t_star - t[i]);
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  PowerFit f;
  const double det = n * sxx - sx * sx;
  if (!(det > 0.0)) return f;
  const double slope = (n * sxy - sx * sy) / det;
  f.beta = -slope;
  f.intercept = (sy - slope * sx) / n;
  const double ybar = sy / n;
  f.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + slope * x[i]);
    f.sse += r * r;
    f.sst += (y[i] - ybar) * (y[i] - ybar);
  }
  if (n > 2) f.beta_stderr = std::sqrt(f.sse / (n - 2) * n / det);
  return f;
}

}  // namespace

std::optional<BlowupEstimate> fit_blowup_rate(const std::vector<double>& times,
                                              const std::vector<double>& n_est,
                                              const BlowupFitOptions& options) {
  if (times.size() != n_est.size()) throw ValidationError("fit_blowup_rate: array lengths differ");
  if (times.empty()) return std::nullopt;
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (n_est[i] >= options.growth_start * n_est.front() && n_est[i] > 0.0) {
      t.push_back(times[i]);
      y.push_back(std::log(n_est[i]));
    }
  if (t.size() < 5) return std::nullopt;
  const double t_first = t.front();
  const double t_last = t.back();
  const double span = t_last - t_first;
  if (!(span > 0.0)) return std::nullopt;

  // Scan s = log(T* - t_last), then refine by golden section.
  auto sse_at = [&](double s) { return fit_for(t_last + std::exp(s), t, y).sse; };
  const double s_lo = std::log(span * 1e-9);
  const double s_hi = std::log(span * 1e4);
  const int scan = 600;
  std::vector<double> grid(scan + 1), vals(scan + 1);
  int best = 0;
  for (int i = 0; i <= scan; ++i) {
    grid[i] = s_lo + (s_hi - s_lo) * i / scan;
    vals[i] = sse_at(grid[i]);
    if (vals[i] < vals[best]) best = i;
  }
  double a = grid[std::max(best - 1, 0)];
  double b = grid[std::min(best + 1, scan)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = sse_at(c), fd = sse_at(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = sse_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = sse_at(d);
    }
  }
  const double s_best = 0.5 * (a + b);
  const double t_star = t_last + std::exp(s_best);
  const PowerFit f = fit_for(t_star, t, y);
  const double r2 = f.sst > 0.0 ? 1.0 - f.sse / f.sst : 0.0;
  const double decades = std::log10((t_star - t_first) / (t_star - t_last));
  if (!(r2 >= options.min_r_squared) || !(f.beta > 0.0) || !(decades >= options.min_decades))
    return std::nullopt;
  BlowupEstimate e;
  e.t_star = t_star;
  e.exponent = f.beta;
  e.r_squared = r2;
  e.exponent_stderr = f.beta_stderr;
  return e;
}

ScaleTrack scale_track(const TrajectoryRecord& record, const BlowupFitOptions& options) {
  ScaleTrack s;
  for (const auto& r : record.diagnostics) {
    s.times.push_back(r.t);
    s.n_est.push_back(r.n_est);
  }
  s.fitted_blowup = fit_blowup_rate(s.times, s.n_est, options);
  return s;
}

// ------------------------------------------------------------ Virial

namespace {

double along(const std::array<double, 3>& v, const std::array<double, 3>& d, int n) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += v[a] * d[a];
  return s;
}

double z_along(const SpectralGrid& grid, std::size_t i, const VirialProbe& p) {
  auto x = grid.position(i);
  std::array<double, 3> z{};
  for (int a = 0; a < grid.dim(); ++a) z[a] = x[a] - p.center[a];
  return along(z, p.direction, grid.dim());
}

}  // namespace

double virial_action(const ComplexField& u, const VirialProbe& probe) {
  if (u.geometry().is_radial()) throw ValidationError("virial action requires a full grid");
  const auto& grid = u.geometry().full();
  ComplexField du = directional_derivative(u, probe.direction);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = z_along(grid, i, probe);
    s += smooth_cutoff(z / probe.radius) * z * std::imag(du[i] * std::conj(u[i]));
  }
  return 2.0 * s * grid.cell_volume();
}

double virial_rate_rhs(const ComplexField& u, const VirialProbe& probe, double lambda) {
  if (u.geometry().is_radial()) throw ValidationError("virial rate requires a full grid");
  const auto& grid = u.geometry().full();
  const int n = grid.dim();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  double kin = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double xd = along(grid.wavenumber(k), probe.direction, n);
    kin += xd * xd * grid.xi2()[k] * std::norm(c[k]);
  }
  kin *= grid.cell_volume() / static_cast<double>(grid.size());
  const double pot = lambda == 0.0 ? 0.0 : lambda / (2.0 * (n + 4)) * lp_integral(u, 2.0 * (n + 4) / n);
  return -16.0 * (0.5 * kin + pot);
}

double mass_moment(const ComplexField& u, const VirialProbe& probe) {
  if (u.geometry().is_radial()) throw ValidationError("mass moment requires a full grid");
  const auto& grid = u.geometry().full();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = z_along(grid, i, probe);
    s += smooth_cutoff(z / probe.radius) * z * std::norm(u[i]);
  }
  return s * grid.cell_volume();
}

double mass_moment_rate_rhs(const ComplexField& u, const VirialProbe& probe) {
  if (u.geometry().is_radial()) throw ValidationError("mass moment rate requires a full grid");
  const auto& grid = u.geometry().full();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    s += along(grid.wavenumber(k), probe.direction, grid.dim()) * grid.xi2()[k] * std::norm(c[k]);
  return -4.0 * s * grid.cell_volume() / static_cast<double>(grid.size());
}

double outside_mass_fraction(const ComplexField& u, const VirialProbe& probe) {
  const auto& grid = u.geometry().full();
  double out = 0.0, total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = std::norm(u[i]);
    total += m;
    if (std::abs(z_along(grid, i, probe)) > probe.radius) out += m;
  }
  return total > 0.0 ? out / total : 0.0;
}

double moment_cutoff_constant() {
  static const double value = [] {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      const double s = 2.0 * i / 200000.0;
      best = std::max(best, s * smooth_cutoff(s));
    }
    return best;
  }();
  return value;
}

VirialTrajectoryProbe::VirialTrajectoryProbe(VirialProbe probe, std::string prefix)
    : probe_(probe), prefix_(std::move(prefix)) {}

std::vector<std::string> VirialTrajectoryProbe::columns() const {
  return {prefix_ + "_value", prefix_ + "_rhs", prefix_ + "_outside"};
}

std::vector<double> VirialTrajectoryProbe::evaluate(const ComplexField& u, const EquationParams& params) const {
  return {virial_action(u, probe_), virial_rate_rhs(u, probe_, params.lambda), outside_mass_fraction(u, probe_)};
}

MassMomentTrajectoryProbe::MassMomentTrajectoryProbe(VirialProbe probe, std::string prefix)
    : probe_(probe), prefix_(std::move(prefix)) {}

std::vector<std::string> MassMomentTrajectoryProbe::columns() const {
  return {prefix_ + "_value", prefix_ + "_rhs", prefix_ + "_outside"};
}

std::vector<double> MassMomentTrajectoryProbe::evaluate(const ComplexField& u, const EquationParams&) const {
  return {mass_moment(u, probe_), mass_moment_rate_rhs(u, probe_), outside_mass_fraction(u, probe_)};
}

RateCheck rate_check_series(const std::vector<double>& t, const std::vector<double>& value,
                            const std::vector<double>& rhs, const std::vector<double>& outside,
                            double outside_tolerance) {
  RateCheck r;
  std::size_t count = t.size();
  if (count < 3) throw ValidationError("rate check needs at least three rows");
  // Drop a trailing off-cadence row.
  if (!uniformly_spaced(t, count)) --count;
  if (count < 3 || !uniformly_spaced(t, count))
    throw ValidationError("rate check rows are not equally spaced");
  const double h = t[1] - t[0];
  double rhs_max = 0.0;
  for (std::size_t i = 0; i < count; ++i) rhs_max = std::max(rhs_max, std::abs(rhs[i]));
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double fd = (value[i + 1] - value[i - 1]) / (2.0 * h);
    const double den = std::max(std::abs(rhs[i]), 1e-12 * rhs_max + 1e-300);
    r.max_defect = std::max(r.max_defect, std::abs(fd - rhs[i]) / den);
    ++r.interior_points;
  }
  for (std::size_t i = 0; i < count; ++i) r.max_outside_fraction = std::max(r.max_outside_fraction, outside[i]);
  r.r_valid = r.max_outside_fraction <= outside_tolerance;
  return r;
}

RateCheck rate_check(const TrajectoryRecord& record, const std::string& prefix, double outside_tolerance) {
  const auto& cols = record.probe_columns;
  auto col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw ValidationError("record has no probe column '" + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t iv = col(prefix + "_value");
  const std::size_t ir = col(prefix + "_rhs");
  const std::size_t io = col(prefix + "_outside");
  std::vector<double> t, v, rhs, out;
  for (const auto& row : record.diagnostics) {
    t.push_back(row.t);
    v.push_back(row.probes[iv]);
    rhs.push_back(row.probes[ir]);
    out.push_back(row.probes[io]);
  }
  return rate_check_series(t, v, rhs, out, outside_tolerance);
}

RateCheck virial_rate_check(const TrajectoryRecord& record, const std::string& prefix, double tol) {
  return rate_check(record, prefix, tol);
}

RateCheck mass_moment_rate_check(const TrajectoryRecord& record, const std::string& prefix, double tol) {
  return rate_check(record, prefix, tol);
}

// ------------------------------------------------------------ Scattering

double validity_horizon(const ComplexField& u, double tail_tolerance, double* xi_max_out) {
  std::vector<std::pair<double, double>> shells;
  const auto& geom = u.geometry();
  if (geom.is_full()) {
    const auto& grid = geom.full();
    CVector c(u.values().begin(), u.values().end());
    grid.dft_forward(c.data());
    shells.resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) shells[k] = {std::sqrt(grid.xi2()[k]), std::norm(c[k])};
  } else {
    const auto& rg = geom.radial();
    Eigen::MatrixX2d c = rg.to_eigenbasis(u.values());
    const auto& mu = rg.biharmonic_eigenvalues();
    for (Eigen::Index j = 0; j < c.rows(); ++j)
      shells.emplace_back(std::pow(std::max(mu[j], 0.0), 0.25), c.row(j).squaredNorm());
  }
  std::sort(shells.begin(), shells.end());
  double total = 0.0;
  for (const auto& s : shells) total += s.second;
  double tail = 0.0, xi_max = 0.0;
  for (std::size_t k = shells.size(); k-- > 0;) {
    tail += shells[k].second;
    if (tail > tail_tolerance * total) {
      xi_max = shells[k].first;
      break;
    }
  }
  if (xi_max_out) *xi_max_out = xi_max;
  if (xi_max <= 0.0) return std::numeric_limits<double>::infinity();
  return geom.extent() / (4.0 * xi_max * xi_max * xi_max);
}

ScatteringReport scattering_probe(const TrajectoryRecord& record, const ScatteringOptions& options) {
  const auto& snaps = record.snapshots;
  if (snaps.size() < 4) throw ValidationError("scattering probe needs at least 4 snapshots");
  ScatteringReport rep;
  rep.epsilon = options.epsilon;
  const double t_begin = snaps.front().t;
  rep.validity_end = t_begin + validity_horizon(snaps.front().field, options.tail_tolerance, &rep.xi_max);
  const double window_end = std::min(snaps.back().t, rep.validity_end);
  const double q_start = t_begin + 0.75 * (window_end - t_begin);
  std::vector<std::size_t> sel;
  for (std::size_t i = 0; i < snaps.size(); ++i)
    if (snaps[i].t >= q_start - 1e-12 && snaps[i].t <= window_end + 1e-12) sel.push_back(i);
  if (sel.size() < 4) throw ValidationError("scattering window holds fewer than 4 snapshots");
  if (sel.size() > 64) {
    std::vector<std::size_t> thin;
    for (int k = 0; k < 64; ++k) thin.push_back(sel[(sel.size() - 1) * k / 63]);
    sel = thin;
  }
  rep.window_start = snaps[sel.front()].t;
  rep.window_end = snaps[sel.back()].t;
  rep.snapshots_used = sel.size();

  std::vector<ComplexField> w;
  for (auto i : sel) w.push_back(propagate_linear(snaps[i].field, -snaps[i].t));
  const double scale = lp_norm(snaps.front().field, 2.0);
  double defect = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a)
    for (std::size_t b = a + 1; b < w.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < w[a].size(); ++i)
        s += quadrature_weight(w[a].geometry(), i) * std::norm(w[a][i] - w[b][i]);
      defect = std::max(defect, std::sqrt(s));
    }
  rep.cauchy_defect = scale > 0.0 ? defect / scale : 0.0;
  rep.fired = rep.cauchy_defect <= options.epsilon;
  rep.profile_mass = mass(w.back());
  rep.profile_plus = std::move(w.back());
  rep.caveat = "periodic-box proxy; valid before wraparound at t = " + std::to_string(rep.validity_end);
  if (snaps.back().t > rep.validity_end) rep.caveat += " (later snapshots excluded)";
  return rep;
}

}  // namespace fnls
