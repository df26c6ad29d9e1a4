#include "fnls/conserved.hpp"

#include <cmath>

#include "fnls/error.hpp"
#include "fnls/evolution.hpp"

namespace fnls {

double mass(const ComplexField& u) {
  double m = lp_norm(u, 2.0);
  return m * m;
}

namespace {

double potential_term(const ComplexField& u, double lambda) {
  if (lambda == 0.0) return 0.0;
  const int n = u.geometry().dim();
  // |u|^{2(n+4)/n} = |u|^{8/n} |u|^2.
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = std::abs(u[i]);
    s += quadrature_weight(u.geometry(), i) * critical_power(a, n) * a * a;
  }
  return n * lambda / (2.0 * (n + 4)) * s;
}

struct SpectralSums {
  double mass = 0.0;
  double grad2 = 0.0;
  double lap2 = 0.0;
  std::vector<double> momentum;
};

SpectralSums spectral_sums(const ComplexField& u) {
  const auto& grid = u.geometry().full();
  const int n = grid.dim();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  SpectralSums s;
  s.momentum.assign(n, 0.0);
  const double scale = grid.cell_volume() / static_cast<double>(grid.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = std::norm(c[k]);
    auto xi = grid.wavenumber(k);
    s.mass += a;
    s.grad2 += grid.xi2()[k] * a;
    s.lap2 += grid.xi4()[k] * a;
    for (int j = 0; j < n; ++j) s.momentum[j] -= xi[j] * a;
  }
  s.mass *= scale;
  s.grad2 *= scale;
  s.lap2 *= scale;
  for (auto& m : s.momentum) m *= scale;
  return s;
}

}  // namespace

std::vector<double> momentum(const ComplexField& u, bool* radial_flag) {
  if (u.geometry().is_radial()) {
    if (radial_flag) *radial_flag = true;
    return std::vector<double>(u.geometry().dim(), 0.0);
  }
  if (radial_flag) *radial_flag = false;
  return spectral_sums(u).momentum;
}

double energy(const ComplexField& u, double lambda) {
  const double h2 = sobolev_seminorm(u, 2.0);
  return 0.5 * h2 * h2 + potential_term(u, lambda);
}

ConservedSnapshot conserved_snapshot(const ComplexField& u, double lambda, double t) {
  ConservedSnapshot snap;
  snap.t = t;
  const double pot = potential_term(u, lambda);
  if (u.geometry().is_full()) {
    auto s = spectral_sums(u);
    snap.mass = mass(u);
    snap.momentum = s.momentum;
    snap.energy = 0.5 * s.lap2 + pot;
    snap.momentum_scale = std::sqrt(snap.mass * s.grad2);
    snap.energy_scale = 0.5 * s.lap2 + std::abs(pot);
  } else {
    snap.radial = true;
    snap.mass = mass(u);
    snap.momentum.assign(u.geometry().dim(), 0.0);
    const double h2 = sobolev_seminorm(u, 2.0);
    snap.energy = 0.5 * h2 * h2 + pot;
    snap.momentum_scale = std::sqrt(snap.mass) * sobolev_seminorm(u, 1.0);
    snap.energy_scale = 0.5 * h2 * h2 + std::abs(pot);
  }
  return snap;
}

DriftReport drift_report(const std::vector<ConservedSnapshot>& series, double relative_floor) {
  if (series.size() < 2) throw ValidationError("drift report needs at least two snapshots");
  const auto& s0 = series.front();
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const double mass_den = std::max(s0.mass, 1e-300);
  const double mom_den = std::max({norm(s0.momentum), relative_floor * s0.momentum_scale, 1e-300});
  const double en_den = std::max({std::abs(s0.energy), relative_floor * s0.energy_scale, 1e-300});
  DriftReport r;
  for (const auto& s : series) {
    r.mass = std::max(r.mass, std::abs(s.mass - s0.mass) / mass_den);
    std::vector<double> d(s.momentum.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = s.momentum[j] - s0.momentum[j];
    r.momentum = std::max(r.momentum, norm(d) / mom_den);
    r.energy = std::max(r.energy, std::abs(s.energy - s0.energy) / en_den);
  }
  if (s0.mass == 0.0) r.mass = 0.0;
  if (s0.momentum_scale == 0.0 && norm(s0.momentum) == 0.0) r.momentum = 0.0;
  if (s0.energy_scale == 0.0 && s0.energy == 0.0) r.energy = 0.0;
  return r;
}

DriftReport drift_report(const TrajectoryRecord& record, double relative_floor) {
  return drift_report(record.conserved_series, relative_floor);
}

BoostPolynomial boost_polynomial(const ComplexField& u, double lambda,
                                 const std::array<double, 3>& direction) {
  if (u.geometry().is_radial()) throw ValidationError("boost polynomial requires a full grid");
  const auto& grid = u.geometry().full();
  const int n = grid.dim();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  const double scale = grid.cell_volume() / static_cast<double>(grid.size());
  double c1 = 0.0, grad2 = 0.0, dir2 = 0.0, mom = 0.0, lap2 = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = std::norm(c[k]);
    auto xi = grid.wavenumber(k);
    double xd = 0.0;
    for (int j = 0; j < n; ++j) xd += direction[j] * xi[j];
    const double x2 = grid.xi2()[k];
    c1 -= x2 * xd * a;
    grad2 += x2 * a;
    dir2 += xd * xd * a;
    mom -= xd * a;
    lap2 += grid.xi4()[k] * a;
  }
  BoostPolynomial p;
  p.direction = direction;
  p.c1_integral = c1 * scale;
  p.c2_integral = (2.0 * grad2 + 4.0 * dir2) * scale;
  p.directional_momentum = mom * scale;
  p.c[0] = lap2 * scale + 2.0 * potential_term(u, lambda);
  p.c[1] = -4.0 * p.c1_integral;
  p.c[2] = p.c2_integral;
  p.c[3] = -4.0 * p.directional_momentum;
  p.c[4] = mass(u);
  return p;
}

double gn_kappa(double mass_u, double mass_q, int n) { return std::pow(mass_u / mass_q, 4.0 / n); }

double boost_inequality_defect(const BoostPolynomial& p, double x, double kappa, double h2_squared,
                               double energy_u) {
  return kappa * p(x) - (1.0 - kappa) * (h2_squared - 2.0 * energy_u);
}

}  // namespace fnls
