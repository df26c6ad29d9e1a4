#include "fnls/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "fnls/error.hpp"

namespace fnls {

void propagate_spectrum(CVector& spectrum, const SpectralGrid& grid, double t) {
  const auto& xi4 = grid.xi4();
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= std::polar(1.0, t * xi4[k]);
}

ComplexField propagate_linear(const ComplexField& u, double t) {
  const auto& geom = u.geometry();
  std::optional<double> tag;
  if (u.time_tag) tag = *u.time_tag + t;
  if (t == 0.0) return ComplexField(geom, CVector(u.values().begin(), u.values().end()), tag);
  if (geom.is_full()) {
    const auto& grid = geom.full();
    CVector c(u.values().begin(), u.values().end());
    grid.dft_forward(c.data());
    propagate_spectrum(c, grid, t);
    grid.dft_backward(c.data());
    return ComplexField(geom, std::move(c), tag);
  }
  const auto& rg = geom.radial();
  Eigen::MatrixX2d c = rg.to_eigenbasis(u.values());
  const auto& mu = rg.biharmonic_eigenvalues();
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    cplx z = cplx(c(j, 0), c(j, 1)) * std::polar(1.0, t * mu[j]);
    c(j, 0) = z.real();
    c(j, 1) = z.imag();
  }
  ComplexField out(geom);
  out.time_tag = tag;
  rg.from_eigenbasis(c, out.values());
  return out;
}

std::vector<double> log_spaced(double t_min, double t_max, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {t_min};
  std::vector<double> t(count);
  const double a = std::log(t_min);
  const double b = std::log(t_max);
  for (std::size_t i = 0; i < count; ++i)
    t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return t;
}

namespace {

// Radius (sup over axes) holding all but `tail` of the mass.
double mass_radius(const ComplexField& u, double tail) {
  const auto& grid = u.geometry().full();
  std::vector<std::pair<double, double>> rm(u.size());
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto x = grid.position(i);
    double r = 0.0;
    for (int a = 0; a < grid.dim(); ++a) r = std::max(r, std::abs(x[a]));
    rm[i] = {r, std::norm(u[i])};
    total += rm[i].second;
  }
  std::sort(rm.begin(), rm.end());
  double acc = 0.0;
  for (const auto& [r, m] : rm) {
    acc += m;
    if (acc >= (1.0 - tail) * total) return r;
  }
  return grid.half_width();
}

void fit_window(DecayFit& fit, const DecayOptions& opt) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < fit.times.size(); ++i) {
    if (fit.times[i] < opt.window_min || fit.times[i] > opt.window_max) continue;
    idx.push_back(i);
  }
  fit.samples_in_window = idx.size();
  if (idx.size() < 2) throw ValidationError("decay fit needs at least two samples in the window");
  for (auto i : idx) {
    double w = opt.weights.empty() ? 1.0 : opt.weights.at(i);
    double x = std::log(fit.times[i]);
    double y = std::log(fit.sup_norms[i]);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw ValidationError("decay fit window has no spread in t");
  fit.fitted_slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.fitted_slope * sx) / sw;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / sw;
  for (auto i : idx) {
    double w = opt.weights.empty() ? 1.0 : opt.weights.at(i);
    double x = std::log(fit.times[i]);
    double y = std::log(fit.sup_norms[i]);
    double r = y - (fit.intercept + fit.fitted_slope * x);
    ss_res += w * r * r;
    ss_tot += w * (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.window_min = fit.times[idx.front()];
  fit.window_max = fit.times[idx.back()];

  double worst = 0.0;
  for (auto i : idx) worst = std::max(worst, fit.box_contamination[i]);
  fit.valid = std::isfinite(fit.fitted_slope) && worst <= opt.wraparound_tolerance;
  if (worst > opt.wraparound_tolerance)
    fit.note = "wraparound detected: box contamination " + std::to_string(worst) + " exceeds tolerance";
  else if (fit.r_squared < 0.99)
    fit.note = "fit R^2 below 0.99";
}

}  // namespace

ComplexField embed_in_larger_box(const ComplexField& u, int factor) {
  const auto& grid = u.geometry().full();
  const int p = grid.points_per_axis();
  auto big = make_grid(grid.dim(), p * factor, grid.half_width() * factor);
  ComplexField out{Geometry(big)};
  const int offset = (p * factor - p) / 2;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto idx = grid.unflatten(i);
    std::size_t flat = 0;
    for (int a = 0; a < grid.dim(); ++a) flat = flat * (p * factor) + (idx[a] + offset);
    out[flat] = u[i];
  }
  return out;
}

namespace {

std::vector<double> sup_series(const ComplexField& u, const std::vector<double>& t_grid) {
  const auto& grid = u.geometry().full();
  CVector c0(u.values().begin(), u.values().end());
  grid.dft_forward(c0.data());
  CVector c(c0.size());
  std::vector<double> sup;
  for (double t : t_grid) {
    c = c0;
    propagate_spectrum(c, grid, t);
    grid.dft_backward(c.data());
    double m = 0.0;
    for (const auto& v : c) m = std::max(m, std::abs(v));
    sup.push_back(m);
  }
  return sup;
}

}  // namespace

DecayFit decay_probe(const ComplexField& initial, const std::vector<double>& t_grid,
                     const DecayOptions& options) {
  if (initial.geometry().is_radial()) throw ValidationError("decay_probe requires a full grid");
  if (t_grid.size() < 2) throw ValidationError("decay probe needs at least two time samples");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] > 0.0) || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw ValidationError("decay probe times must be positive and increasing");

  const auto& grid = initial.geometry().full();
  const double r0 = mass_radius(initial, 1e-4);
  if (r0 > 0.25 * grid.half_width())
    throw ValidationError("initial data is not localized: 99.99% mass radius " + std::to_string(r0) +
                          " exceeds L/4");

  DecayFit fit;
  fit.times = t_grid;
  fit.sup_norms = sup_series(initial, t_grid);
  if (options.box_check) {
    auto reference = sup_series(embed_in_larger_box(initial, 2), t_grid);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      fit.box_contamination.push_back(std::abs(fit.sup_norms[i] - reference[i]) / reference[i]);
  } else {
    fit.box_contamination.assign(t_grid.size(), 0.0);
  }
  fit_window(fit, options);
  return fit;
}

ComplexField near_delta(const GridPtr& grid, double cells) {
  Geometry geom(grid);
  if (cells <= 0.0) {
    ComplexField u(geom);
    std::size_t center = 0;
    for (int a = 0; a < grid->dim(); ++a) center = center * grid->points_per_axis() + grid->points_per_axis() / 2;
    u[center] = 1.0 / grid->cell_volume();
    return u;
  }
  const double s = cells * grid->spacing();
  const double norm = std::pow(2.0 * std::numbers::pi * s * s, -0.5 * grid->dim());
  return sample(geom, [&](const std::array<double, 3>& x) {
    double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return cplx(norm * std::exp(-0.5 * r2 / (s * s)), 0.0);
  });
}

DecayFit band_decay_probe(const GridPtr& grid, double n_level, const std::vector<double>& t_grid,
                          const DecayOptions& options, double near_delta_cells) {
  if (2.0 * n_level > grid->nyquist())
    throw ValidationError("band level N must satisfy 2N <= Nyquist wavenumber");
  ComplexField u = lp_project(near_delta(grid, near_delta_cells), n_level, LpKind::At);
  return decay_probe(u, t_grid, options);
}

std::vector<double> simpson_weights(std::size_t nodes, double length) {
  if (nodes < 2) throw ValidationError("quadrature needs at least two nodes");
  const std::size_t intervals = nodes - 1;
  const double h = length / static_cast<double>(intervals);
  std::vector<double> w(nodes, 0.0);
  if (intervals == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  std::size_t simpson_end = intervals;  // number of intervals handled by Simpson
  if (intervals % 2 == 1) simpson_end = intervals - 3;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (intervals % 2 == 1) {
    const std::size_t s = simpson_end;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

StrichartzRatio refined_strichartz_ratio(const ComplexField& initial, double horizon,
                                         const StrichartzOptions& options) {
  const auto& geom = initial.geometry();
  if (geom.is_radial()) throw ValidationError("refined Strichartz probe requires a full grid");
  const auto& grid = geom.full();
  const int n = grid.dim();
  if (n > 2) throw ValidationError("refined Strichartz probe supports n = 1, 2");
  if (!(horizon > 0.0)) throw ValidationError("Strichartz horizon must be positive");
  if (options.time_nodes < 3 || options.time_nodes % 2 == 0)
    throw ValidationError("Strichartz time nodes must be odd and >= 3");
  const double mass_norm = lp_norm(initial, 2.0);
  if (mass_norm == 0.0) throw ValidationError("refined Strichartz ratio undefined for the zero field");

  const double q = 2.0 * (n + 4) / n;
  const auto levels = LittlewoodPaleyBank::dyadic_levels(grid);
  const auto w = simpson_weights(static_cast<std::size_t>(options.time_nodes), horizon);

  CVector c0(initial.values().begin(), initial.values().end());
  grid.dft_forward(c0.data());

  double total = 0.0;
  std::vector<double> band_total(levels.size(), 0.0);
  CVector c(c0.size()), b(c0.size());
  for (int j = 0; j < options.time_nodes; ++j) {
    const double t = horizon * j / (options.time_nodes - 1);
    c = c0;
    propagate_spectrum(c, grid, t);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      b = c;
      apply_lp_symbol(b, grid, levels[l], LpKind::At);
      grid.dft_backward(b.data());
      double s = 0.0;
      for (const auto& v : b) s += std::pow(std::abs(v), q);
      band_total[l] += w[j] * s * grid.cell_volume();
    }
    grid.dft_backward(c.data());
    double s = 0.0;
    for (const auto& v : c) s += std::pow(std::abs(v), q);
    total += w[j] * s * grid.cell_volume();
  }

  StrichartzRatio r;
  r.numerator = std::pow(total, 1.0 / q);
  r.mass_factor = std::pow(mass_norm, n / (n + 4.0));
  for (std::size_t l = 0; l < levels.size(); ++l) {
    double z = std::pow(band_total[l], 1.0 / q);
    if (z > r.best_band) {
      r.best_band = z;
      r.best_level = levels[l];
    }
  }
  if (!(r.best_band > 0.0)) throw NumericalError("every Littlewood-Paley band vanished");
  r.ratio = r.numerator / (r.mass_factor * std::pow(r.best_band, 4.0 / (n + 4.0)));
  return r;
}

}  // namespace fnls
