#include "fnls/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fnls/diagnostics.hpp"
#include "fnls/error.hpp"
#include "fnls/linear.hpp"

namespace fnls {

void EquationParams::validate() const {
  if (n < 1) throw ValidationError("equation.n: must be >= 1");
  if (lambda != 1.0 && lambda != -1.0 && lambda != 0.0)
    throw ValidationError("equation.lambda: must be +1, -1 or 0 (free flow)");
}

void RunControls::validate() const {
  auto bad = [](const std::string& f, const std::string& why) {
    throw ValidationError("time." + f + ": " + why);
  };
  if (!(t_end > 0.0)) bad("t_end", "must be positive");
  if (!(dt_max > 0.0)) bad("dt_max", "must be positive");
  if (!(dt_min > 0.0) || dt_min > dt_max) bad("dt_min", "must be positive and <= dt_max");
  if (!(c_phase > 0.0)) bad("c_phase", "must be positive");
  if (!(c_curv > 0.0)) bad("c_curv", "must be positive");
  if (snapshot_every < 1) bad("snapshot_every", "must be >= 1");
  if (!(sup_blowup_factor > 1.0)) bad("sup_blowup_factor", "must exceed 1");
  if (!(h2_growth_factor > 1.0)) bad("h2_growth_factor", "must exceed 1");
  if (!(mass_abort > 0.0)) bad("mass_abort", "must be positive");
}

double adapt_dt(double sup, double h2, const EquationParams& params, const RunControls& c) {
  double dt = c.dt_max;
  if (params.lambda != 0.0 && sup > 0.0) dt = std::min(dt, c.c_phase / critical_power(sup, params.n));
  if (h2 > 0.0) dt = std::min(dt, c.c_curv / (h2 * h2));
  return std::max(dt, c.dt_min);
}

double adapt_dt(const ComplexField& u, const EquationParams& params, const RunControls& c) {
  return adapt_dt(lp_norm(u, INFINITY), sobolev_seminorm(u, 2.0), params, c);
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Scattering:
      return "scattering";
    case Outcome::SolitonLike:
      return "soliton-like";
    case Outcome::BlowUp:
      return "blow-up";
    case Outcome::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

namespace {

/// Strang stepper with the linear multipliers cached for the last dt.
class Stepper {
 public:
  Stepper(const Geometry& g, const EquationParams& p, const StepOptions& o)
      : geom_(g), params_(p), opts_(o) {}

  void operator()(ComplexField& u, double dt) {
    half_phase(u, 0.5 * dt);
    linear(u, dt);
    half_phase(u, 0.5 * dt);
  }

 private:
  void half_phase(ComplexField& u, double tau) {
    if (params_.lambda == 0.0) return;
    const std::size_t size = u.size();
    if (geom_.is_full() && opts_.dealias) {
      const auto& grid = geom_.full();
      potential_.resize(size);
      for (std::size_t i = 0; i < size; ++i)
        potential_[i] = cplx(params_.lambda * critical_power(std::abs(u[i]), params_.n), 0.0);
      grid.dft_forward(potential_.data());
      dealias_spectrum(potential_, grid);
      grid.dft_backward(potential_.data());
      for (std::size_t i = 0; i < size; ++i) u[i] *= std::polar(1.0, potential_[i].real() * tau);
      return;
    }
    for (std::size_t i = 0; i < size; ++i)
      u[i] *= std::polar(1.0, params_.lambda * critical_power(std::abs(u[i]), params_.n) * tau);
  }

  void linear(ComplexField& u, double dt) {
    if (dt != cached_dt_) {
      cached_dt_ = dt;
      if (geom_.is_full()) {
        const auto& xi4 = geom_.full().xi4();
        multiplier_.resize(xi4.size());
        for (std::size_t k = 0; k < xi4.size(); ++k) multiplier_[k] = std::polar(1.0, dt * xi4[k]);
      } else {
        const auto& mu = geom_.radial().biharmonic_eigenvalues();
        multiplier_.resize(static_cast<std::size_t>(mu.size()));
        for (Eigen::Index k = 0; k < mu.size(); ++k) multiplier_[k] = std::polar(1.0, dt * mu[k]);
      }
    }
    if (geom_.is_full()) {
      const auto& grid = geom_.full();
      grid.dft_forward(u.data().data());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] *= multiplier_[k];
      grid.dft_backward(u.data().data());
      return;
    }
    const auto& rg = geom_.radial();
    Eigen::MatrixX2d c = rg.to_eigenbasis(u.values());
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      cplx z = cplx(c(j, 0), c(j, 1)) * multiplier_[j];
      c(j, 0) = z.real();
      c(j, 1) = z.imag();
    }
    rg.from_eigenbasis(c, u.values());
  }

  Geometry geom_;
  EquationParams params_;
  StepOptions opts_;
  double cached_dt_ = std::numeric_limits<double>::quiet_NaN();
  CVector multiplier_;
  CVector potential_;
};

double z_density(const ComplexField& u) {
  const int n = u.geometry().dim();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = std::abs(u[i]);
    s += quadrature_weight(u.geometry(), i) * critical_power(a, n) * a * a;
  }
  return s;
}

// Spectral mass fraction with some |m_a| > P/3.
double outer_third_fraction(const ComplexField& u) {
  const auto& grid = u.geometry().full();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  double total = 0.0;
  for (const auto& v : c) total += std::norm(v);
  dealias_spectrum(c, grid);
  double kept = 0.0;
  for (const auto& v : c) kept += std::norm(v);
  return total > 0.0 ? (total - kept) / total : 0.0;
}

}  // namespace

ComplexField step(const ComplexField& state, double dt, const EquationParams& params,
                  const StepOptions& options) {
  ComplexField out(state.geometry(), CVector(state.values().begin(), state.values().end()),
                   state.time_tag ? std::optional<double>(*state.time_tag + dt) : std::nullopt);
  step_in_place(out, dt, params, options);
  return out;
}

void step_in_place(ComplexField& state, double dt, const EquationParams& params,
                   const StepOptions& options) {
  if (!(dt > 0.0)) throw ValidationError("step size must be positive");
  Stepper s(state.geometry(), params, options);
  s(state, dt);
  state.require_finite("Strang step");
}

TrajectoryRecord evolve(const ComplexField& initial, const EquationParams& params,
                        const RunControls& controls,
                        const std::vector<std::shared_ptr<const TrajectoryProbe>>& probes) {
  params.validate();
  controls.validate();
  initial.require_finite("initial data");
  if (initial.geometry().dim() != params.n)
    throw ValidationError("initial data dimension does not match equation.n");

  auto record = std::make_shared<TrajectoryRecord>(initial.geometry());
  record->params = params;
  record->controls = controls;
  for (const auto& p : probes)
    for (const auto& c : p->columns()) record->probe_columns.push_back(c);

  const double t0 = initial.time_tag.value_or(0.0);
  if (!(controls.t_end > t0)) throw ValidationError("time.t_end must exceed the initial time");
  ComplexField u(initial.geometry(), CVector(initial.values().begin(), initial.values().end()), t0);
  Stepper stepper(u.geometry(), params, controls.step);

  const double mass0 = mass(u);
  double t = t0;
  double dt = controls.dt_max;
  double prev_z = 0.0;

  auto add_row = [&](double row_dt) {
    DiagnosticRow row;
    row.t = t;
    row.dt = row_dt;
    row.sup_norm = lp_norm(u, INFINITY);
    row.h2_seminorm = sobolev_seminorm(u, 2.0);
    row.z_density = z_density(u);
    row.z_increment = record->diagnostics.empty() ? 0.0
                                                  : 0.5 * (prev_z + row.z_density) *
                                                        (t - record->diagnostics.back().t);
    prev_z = row.z_density;
    const double m = mass(u);
    row.n_est = m > 0.0 ? std::sqrt(row.h2_seminorm / std::sqrt(m)) : 0.0;
    for (const auto& p : probes) {
      auto v = p->evaluate(u, params);
      row.probes.insert(row.probes.end(), v.begin(), v.end());
    }
    record->diagnostics.push_back(std::move(row));
    record->conserved_series.push_back(conserved_snapshot(u, params.lambda, t));
    if (controls.store_snapshots && record->snapshots.size() < controls.max_snapshots) {
      ComplexField copy(u.geometry(), CVector(u.values().begin(), u.values().end()), t);
      record->snapshots.push_back({t, std::move(copy)});
    }
  };

  add_row(0.0);
  const double sup0 = record->diagnostics.front().sup_norm;
  const double h20 = record->diagnostics.front().h2_seminorm;
  double sup = sup0;
  double h2 = h20;
  const double t_eps = 1e-12 * std::max(1.0, std::abs(controls.t_end));

  while (t < controls.t_end - t_eps) {
    double t_next;
    if (controls.adaptive) {
      dt = adapt_dt(sup, h2, params, controls);
      t_next = t + dt;
    } else {
      t_next = t0 + static_cast<double>(record->steps + 1) * controls.dt_max;
    }
    if (t_next > controls.t_end - t_eps) t_next = controls.t_end;
    const double h = t_next - t;

    stepper(u, h);
    if (!u.is_finite()) {
      record->blowup_triggered = true;
      record->stop_reason = "non-finite state";
      break;
    }
    t = t_next;
    u.time_tag = t;
    ++record->steps;

    const double drift = std::abs(mass(u) - mass0) / std::max(mass0, 1e-300);
    if (drift > controls.mass_abort) {
      add_row(h);
      record->stop_reason = "mass drift abort";
      record->final_time = t;
      record->final_state = std::make_shared<ComplexField>(u);
      throw InstabilityError("mass drift " + std::to_string(drift) + " exceeds hard limit at t = " +
                                 std::to_string(t),
                             record);
    }

    const bool on_cadence = record->steps % controls.snapshot_every == 0;
    const bool at_end = t >= controls.t_end - t_eps;
    if (controls.adaptive) {
      sup = lp_norm(u, INFINITY);
      h2 = sobolev_seminorm(u, 2.0);
    }
    if (on_cadence || at_end) {
      add_row(h);
      sup = record->diagnostics.back().sup_norm;
      h2 = record->diagnostics.back().h2_seminorm;
    }

    if (params.lambda != 0.0 && sup > controls.sup_blowup_factor * sup0) {
      if (!(on_cadence || at_end)) add_row(h);
      record->blowup_triggered = true;
      record->stop_reason = "sup-norm threshold";
      break;
    }
    if (controls.adaptive && h <= controls.dt_min * (1.0 + 1e-12) &&
        h2 > controls.h2_growth_factor * h20 && !at_end) {
      if (!(on_cadence || at_end)) add_row(h);
      record->blowup_triggered = true;
      record->stop_reason = "dt reached dt_min with growing H2 seminorm";
      break;
    }
    if ((on_cadence || at_end) && u.geometry().is_full() &&
        outer_third_fraction(u) > controls.resolution_tolerance) {
      record->stop_reason = "under-resolved";
      if (h2 > controls.h2_growth_factor * h20) record->blowup_triggered = true;
      break;
    }
    if ((on_cadence || at_end) && controls.stop_on_scatter_epsilon > 0.0 && controls.store_snapshots &&
        record->snapshots.size() >= 16) {
      try {
        ScatteringOptions so;
        so.epsilon = controls.stop_on_scatter_epsilon;
        if (scattering_probe(*record, so).fired) {
          record->stop_reason = "scattering criterion fired";
          break;
        }
      } catch (const ValidationError&) {
      }
    }
  }
  if (record->stop_reason.empty()) record->stop_reason = "reached t_end";
  record->final_time = t;
  record->final_state = std::make_shared<ComplexField>(u);

  ClassifyOptions co;
  record->outcome = classify_outcome(*record, co);
  if (record->outcome == Outcome::BlowUp) {
    auto track = scale_track(*record);
    record->blowup_estimate = track.fitted_blowup;
  }
  return std::move(*record);
}

namespace {

// m_j = int_0^X x^j e^{-i theta x} dx for j = 0..3.
std::array<cplx, 4> oscillatory_moments(double theta, double X) {
  std::array<cplx, 4> m{};
  if (std::abs(theta * X) < 1.0) {
    // Taylor series in -i theta x.
    cplx term(1.0, 0.0);
    double xp = X;  // X^{k+1}
    for (int k = 0; k < 40; ++k) {
      for (int j = 0; j < 4; ++j) m[j] += term * (xp * std::pow(X, j) / (j + k + 1));
      term *= cplx(0.0, -theta) / static_cast<double>(k + 1);
      xp *= X;
    }
    return m;
  }
  const cplx e = std::polar(1.0, -theta * X);
  const cplx inv = 1.0 / cplx(0.0, -theta);
  m[0] = (e - 1.0) * inv;
  double xj = 1.0;
  for (int j = 1; j < 4; ++j) {
    xj *= X;
    m[j] = (xj * e - static_cast<double>(j) * m[j - 1]) * inv;
  }
  return m;
}

// Monomial coefficients of the Lagrange basis on nodes 0..d (d = 2 or 3).
std::array<std::array<double, 4>, 4> lagrange_coefficients(int d) {
  std::array<std::array<double, 4>, 4> c{};
  for (int k = 0; k <= d; ++k) {
    std::array<double, 4> poly{1.0, 0.0, 0.0, 0.0};
    double denom = 1.0;
    for (int j = 0; j <= d; ++j) {
      if (j == k) continue;
      std::array<double, 4> next{};
      for (int a = 0; a < 3; ++a) {
        next[a + 1] += poly[a];
        next[a] -= j * poly[a];
      }
      poly = next;
      denom *= (k - j);
    }
    for (int a = 0; a < 4; ++a) c[k][a] = poly[a] / denom;
  }
  return c;
}

}  // namespace

double duhamel_residual(const TrajectoryRecord& record, double t0, double t1, int stride) {
  if (stride < 1) throw ValidationError("quadrature stride must be >= 1");
  const auto& snaps = record.snapshots;
  auto find = [&](double t) -> std::size_t {
    for (std::size_t i = 0; i < snaps.size(); ++i)
      if (std::abs(snaps[i].t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
    throw ValidationError("no stored snapshot at t = " + std::to_string(t));
  };
  const std::size_t i0 = find(t0);
  const std::size_t i1 = find(t1);
  if (i1 <= i0) throw ValidationError("duhamel_residual needs t0 < t1");
  if ((i1 - i0) % static_cast<std::size_t>(stride) != 0)
    throw ValidationError("stride does not divide the snapshot range");
  std::vector<std::size_t> nodes;
  for (std::size_t i = i0; i <= i1; i += stride) nodes.push_back(i);
  if (nodes.size() < 8) throw ValidationError("duhamel_residual needs at least 8 quadrature snapshots");
  const double h = snaps[nodes[1]].t - snaps[nodes[0]].t;
  for (std::size_t k = 1; k < nodes.size(); ++k)
    if (std::abs(snaps[nodes[k]].t - snaps[nodes[k - 1]].t - h) > 1e-9 * h)
      throw ValidationError("quadrature snapshots are not equally spaced");

  const auto& params = record.params;
  const auto& geom = record.geometry;

  // Nonlinear term at each node in the propagator's eigenbasis.
  std::vector<double> omega;
  if (geom.is_full()) {
    const auto& xi4 = geom.full().xi4();
    omega.assign(xi4.begin(), xi4.end());
  } else {
    const auto& mu = geom.radial().biharmonic_eigenvalues();
    omega.assign(mu.data(), mu.data() + mu.size());
  }
  auto to_modes = [&](const ComplexField& f) {
    CVector c;
    if (geom.is_full()) {
      c.assign(f.values().begin(), f.values().end());
      geom.full().dft_forward(c.data());
    } else {
      Eigen::MatrixX2d e = geom.radial().to_eigenbasis(f.values());
      c.resize(static_cast<std::size_t>(e.rows()));
      for (Eigen::Index j = 0; j < e.rows(); ++j) c[j] = cplx(e(j, 0), e(j, 1));
    }
    return c;
  };
  std::vector<CVector> modes;
  modes.reserve(nodes.size());
  for (auto i : nodes) modes.push_back(to_modes(nonlinearity(snaps[i].field, 1.0, params.n, false)));

  // Filon-Simpson: quadratic panels (one cubic panel when the interval count
  // is odd) with the factor e^{i(t1 - s) omega} integrated exactly.
  const std::size_t intervals = nodes.size() - 1;
  std::vector<std::pair<std::size_t, int>> panels;
  std::size_t start = 0;
  const std::size_t quad_end = intervals % 2 == 0 ? intervals : intervals - 3;
  for (; start < quad_end; start += 2) panels.push_back({start, 2});
  if (intervals % 2 == 1) panels.push_back({start, 3});
  const auto lag2 = lagrange_coefficients(2);
  const auto lag3 = lagrange_coefficients(3);

  const double ta = snaps[nodes.front()].t;
  CVector integral(omega.size(), cplx(0.0, 0.0));
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double w = omega[k];
    cplx acc(0.0, 0.0);
    for (const auto& [p0, d] : panels) {
      const auto m = oscillatory_moments(w * h, static_cast<double>(d));
      const auto& lag = d == 2 ? lag2 : lag3;
      const double s0 = ta + static_cast<double>(p0) * h;
      const cplx shift = std::polar(h, (t1 - s0) * w);
      for (int q = 0; q <= d; ++q) {
        cplx wq(0.0, 0.0);
        for (int a = 0; a <= d; ++a) wq += lag[q][a] * m[a];
        acc += shift * wq * modes[p0 + q][k];
      }
    }
    integral[k] = acc;
  }

  ComplexField duhamel(geom);
  if (geom.is_full()) {
    geom.full().dft_backward(integral.data());
    std::copy(integral.begin(), integral.end(), duhamel.values().begin());
  } else {
    Eigen::MatrixX2d e(static_cast<Eigen::Index>(integral.size()), 2);
    for (std::size_t j = 0; j < integral.size(); ++j) {
      e(j, 0) = integral[j].real();
      e(j, 1) = integral[j].imag();
    }
    geom.radial().from_eigenbasis(e, duhamel.values());
  }

  ComplexField free = propagate_linear(snaps[i0].field, t1 - t0);
  const auto& u1 = snaps[i1].field;
  ComplexField diff(geom);
  const cplx il(0.0, params.lambda);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u1[i] - free[i] - il * duhamel[i];
  const double den = lp_norm(u1, 2.0);
  if (den == 0.0) return lp_norm(diff, 2.0);
  return lp_norm(diff, 2.0) / den;
}

Outcome classify_outcome(const TrajectoryRecord& record, const ClassifyOptions& options) {
  const auto& rows = record.diagnostics;
  if (record.blowup_triggered) return Outcome::BlowUp;
  if (rows.empty()) return Outcome::Inconclusive;

  const auto& c = record.controls;
  const double sup0 = rows.front().sup_norm;
  const double h20 = rows.front().h2_seminorm;
  for (const auto& r : rows) {
    if (record.params.lambda != 0.0 && r.sup_norm > c.sup_blowup_factor * sup0) return Outcome::BlowUp;
    if (c.adaptive && r.dt > 0.0 && r.dt <= c.dt_min * (1.0 + 1e-12) && r.h2_seminorm > c.h2_growth_factor * h20)
      return Outcome::BlowUp;
  }

  if (!record.snapshots.empty()) {
    try {
      ScatteringOptions so;
      so.epsilon = options.scatter_epsilon;
      if (scattering_probe(record, so).fired) return Outcome::Scattering;
    } catch (const ValidationError&) {
    }
  }

  const double t_first = rows.front().t;
  const double t_last = rows.back().t;
  if (rows.size() >= 4 && t_last > t_first) {
    const double t_half = t_first + 0.5 * (t_last - t_first);
    double nmin = INFINITY, nmax = -INFINITY, smin = INFINITY, smax = -INFINITY, nsum = 0, ssum = 0;
    std::size_t count = 0;
    for (const auto& r : rows) {
      if (r.t < t_half) continue;
      nmin = std::min(nmin, r.n_est);
      nmax = std::max(nmax, r.n_est);
      smin = std::min(smin, r.sup_norm);
      smax = std::max(smax, r.sup_norm);
      nsum += r.n_est;
      ssum += r.sup_norm;
      ++count;
    }
    if (count >= 2) {
      const double nmean = nsum / count;
      const double smean = ssum / count;
      if (nmean > 0.0 && smean > 0.0 && (nmax - nmin) / nmean <= options.soliton_band &&
          (smax - smin) / smean <= options.soliton_band)
        return Outcome::SolitonLike;
    }
  }
  return Outcome::Inconclusive;
}

}  // namespace fnls
