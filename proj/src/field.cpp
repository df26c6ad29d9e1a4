#include "fnls/field.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "fnls/error.hpp"

namespace fnls {

// ---------------------------------------------------------------- Geometry

const SpectralGrid& Geometry::full() const { return *full_ptr(); }
const RadialGrid& Geometry::radial() const { return *radial_ptr(); }

const GridPtr& Geometry::full_ptr() const {
  if (!is_full()) throw ValidationError("operation requires a full periodic grid");
  return std::get<GridPtr>(impl_);
}

const RadialGridPtr& Geometry::radial_ptr() const {
  if (!is_radial()) throw ValidationError("operation requires a radial grid");
  return std::get<RadialGridPtr>(impl_);
}

int Geometry::dim() const { return is_full() ? full().dim() : radial().dim(); }

std::size_t Geometry::size() const {
  return is_full() ? full().size() : static_cast<std::size_t>(radial().n_points());
}

double Geometry::extent() const { return is_full() ? full().half_width() : radial().r_max(); }

bool Geometry::same_as(const Geometry& other) const {
  if (is_full() != other.is_full()) return false;
  if (is_full()) {
    const auto& a = full();
    const auto& b = other.full();
    return a.dim() == b.dim() && a.points_per_axis() == b.points_per_axis() &&
           a.half_width() == b.half_width();
  }
  const auto& a = radial();
  const auto& b = other.radial();
  return a.dim() == b.dim() && a.n_points() == b.n_points() && a.r_max() == b.r_max() &&
         a.stencil_order() == b.stencil_order();
}

// ------------------------------------------------------------ ComplexField

ComplexField::ComplexField(Geometry geometry)
    : geometry_(std::move(geometry)), values_(geometry_.size(), cplx(0.0, 0.0)) {}

ComplexField::ComplexField(Geometry geometry, CVector values, std::optional<double> tag)
    : time_tag(tag), geometry_(std::move(geometry)), values_(std::move(values)) {
  if (values_.size() != geometry_.size())
    throw ValidationError("field has " + std::to_string(values_.size()) +
                          " values but the grid has " + std::to_string(geometry_.size()));
}

bool ComplexField::is_finite() const {
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

void ComplexField::require_finite(const char* context) const {
  if (!is_finite()) throw NumericalError(std::string("non-finite values in ") + context);
}

// --------------------------------------------------------------- Norms

ComplexField random_packets(const Geometry& g, std::mt19937_64& rng, int packets, double spread, double max_k) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double L = g.extent();
  const int n = g.dim();
  ComplexField u(g);
  for (int p = 0; p < packets; ++p) {
    std::array<double, 3> c{}, k{};
    for (int a = 0; a < n; ++a) {
      c[a] = spread * L * uni(rng);
      k[a] = max_k * uni(rng);
    }
    const double w = 0.8 + 0.6 * (uni(rng) + 1.0);
    const cplx amp(uni(rng), uni(rng));
    ComplexField v = sample(g, [&](const std::array<double, 3>& x) {
      double r2 = 0.0, ph = 0.0;
      for (int a = 0; a < n; ++a) {
        r2 += (x[a] - c[a]) * (x[a] - c[a]);
        ph += k[a] * x[a];
      }
      return amp * std::exp(-0.5 * r2 / (w * w)) * std::polar(1.0, ph);
    });
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += v[i];
  }
  return u;
}

ComplexField plane_wave(const GridPtr& grid, const std::array<int, 3>& mode, cplx amplitude) {
  const double k0 = grid->wavenumber_step();
  return sample(Geometry(grid), [&](const std::array<double, 3>& x) {
    double ph = 0.0;
    for (int a = 0; a < grid->dim(); ++a) ph += k0 * mode[a] * x[a];
    return amplitude * std::polar(1.0, ph);
  });
}

double quadrature_weight(const Geometry& geometry, std::size_t index) {
  return geometry.is_full() ? geometry.full().cell_volume()
                            : geometry.radial().weights()[static_cast<Eigen::Index>(index)];
}

double lp_integral(const ComplexField& u, double p) {
  if (!(p >= 1.0)) throw ValidationError("Lebesgue exponent must be >= 1");
  const auto& g = u.geometry();
  double s = 0.0;
  if (g.is_full()) {
    for (const auto& v : u.values()) s += std::pow(std::abs(v), p);
    return s * g.full().cell_volume();
  }
  const auto& w = g.radial().weights();
  for (std::size_t i = 0; i < u.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * std::pow(std::abs(u[i]), p);
  return s;
}

double lp_norm(const ComplexField& u, double p) {
  if (!(p >= 1.0)) throw ValidationError("Lebesgue exponent must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0) {
    const auto& g = u.geometry();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += quadrature_weight(g, i) * std::norm(u[i]);
    return std::sqrt(s);
  }
  return std::pow(lp_integral(u, p), 1.0 / p);
}

cplx inner_product(const ComplexField& u, const ComplexField& v) {
  if (u.size() != v.size()) throw ValidationError("inner product of fields on different grids");
  cplx s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += quadrature_weight(u.geometry(), i) * u[i] * std::conj(v[i]);
  return s;
}

double sobolev_seminorm(const ComplexField& u, double s) {
  const auto& g = u.geometry();
  if (g.is_radial()) {
    const auto& rg = g.radial();
    if (s == 0.0) return lp_norm(u, 2.0);
    if (s == 1.0) {
      CVector d(rg.gradient_matrix().rows());
      RadialGrid::apply_real(rg.gradient_matrix(), u.values(), d);
      double acc = 0.0;
      for (std::size_t f = 0; f < d.size(); ++f) acc += rg.face_weights()[static_cast<Eigen::Index>(f)] * std::norm(d[f]);
      return std::sqrt(acc);
    }
    if (s == 2.0) return lp_norm(laplacian(u), 2.0);
    throw ValidationError("radial grids support Sobolev orders 0, 1 and 2 only");
  }
  if (s < 0.0) throw ValidationError("Sobolev order must be nonnegative");
  const auto& grid = g.full();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  double acc = 0.0;
  const auto& xi2 = grid.xi2();
  for (std::size_t k = 0; k < c.size(); ++k) {
    double m = (s == 0.0) ? 1.0 : std::pow(xi2[k], s);
    acc += m * std::norm(c[k]);
  }
  return std::sqrt(acc * grid.cell_volume() / static_cast<double>(grid.size()));
}

// ----------------------------------------------------------- Derivatives

namespace {

template <class Symbol>
ComplexField spectral_multiply(const ComplexField& u, Symbol&& symbol) {
  const auto& grid = u.geometry().full();
  ComplexField out(u.geometry(), CVector(u.values().begin(), u.values().end()), u.time_tag);
  grid.dft_forward(out.data().data());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= symbol(k);
  grid.dft_backward(out.data().data());
  return out;
}

}  // namespace

ComplexField laplacian(const ComplexField& u) {
  if (u.geometry().is_radial()) {
    ComplexField out(u.geometry());
    out.time_tag = u.time_tag;
    RadialGrid::apply_real(u.geometry().radial().laplacian_matrix(), u.values(), out.values());
    return out;
  }
  const auto& xi2 = u.geometry().full().xi2();
  return spectral_multiply(u, [&](std::size_t k) { return cplx(-xi2[k], 0.0); });
}

ComplexField bilaplacian(const ComplexField& u) {
  if (u.geometry().is_radial()) {
    ComplexField out(u.geometry());
    out.time_tag = u.time_tag;
    RadialGrid::apply_real(u.geometry().radial().biharmonic_matrix(), u.values(), out.values());
    return out;
  }
  const auto& xi4 = u.geometry().full().xi4();
  return spectral_multiply(u, [&](std::size_t k) { return cplx(xi4[k], 0.0); });
}

ComplexField directional_derivative(const ComplexField& u, const std::array<double, 3>& d) {
  const auto& grid = u.geometry().full();
  return spectral_multiply(u, [&](std::size_t k) {
    auto xi = grid.wavenumber(k);
    double dot = 0.0;
    for (int a = 0; a < grid.dim(); ++a) dot += d[a] * xi[a];
    return cplx(0.0, dot);
  });
}

// ------------------------------------------------------- Littlewood-Paley

double smooth_cutoff(double s) {
  s = std::abs(s);
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = f(2.0 - s);
  const double b = f(s - 1.0);
  return a / (a + b);
}

double LittlewoodPaleyBank::symbol(double xi_abs, double n_level, LpKind kind) {
  switch (kind) {
    case LpKind::Leq:
      return smooth_cutoff(xi_abs / n_level);
    case LpKind::Gt:
      return 1.0 - smooth_cutoff(xi_abs / n_level);
    case LpKind::At:
      return smooth_cutoff(xi_abs / n_level) - smooth_cutoff(2.0 * xi_abs / n_level);
    case LpKind::Lt:
      return smooth_cutoff(2.0 * xi_abs / n_level);
    case LpKind::Geq:
      return 1.0 - smooth_cutoff(2.0 * xi_abs / n_level);
  }
  return 0.0;
}

std::vector<double> LittlewoodPaleyBank::dyadic_levels(const SpectralGrid& grid) {
  const double lowest = grid.wavenumber_step();
  const double highest = grid.nyquist() * std::sqrt(static_cast<double>(grid.dim()));
  std::vector<double> levels;
  // P_N lives on N/2 < |xi| < 2N.
  for (int k = static_cast<int>(std::floor(std::log2(lowest))); ; ++k) {
    double n = std::ldexp(1.0, k);
    if (2.0 * n <= lowest) continue;
    levels.push_back(n);
    if (n >= highest) break;
  }
  return levels;
}

namespace {

// Splits c into low + high with low ~ psi c and high ~ (1 - psi) c such that
// low + high == c exactly: the larger share is rounded, the smaller is the
// exact (Sterbenz) remainder.
double split_low(double c, double psi) {
  if (psi >= 0.5) return psi * c;
  return c - (1.0 - psi) * c;
}

}  // namespace

void apply_lp_symbol(CVector& spectrum, const SpectralGrid& grid, double n_level, LpKind kind) {
  if (!(n_level > 0.0)) throw ValidationError("Littlewood-Paley level must be positive");
  if (spectrum.size() != grid.size()) throw ValidationError("spectrum size does not match grid");
  const auto& xi2 = grid.xi2();
  if (kind == LpKind::Leq || kind == LpKind::Gt) {
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double psi = smooth_cutoff(std::sqrt(xi2[k]) / n_level);
      const cplx c = spectrum[k];
      const cplx low(split_low(c.real(), psi), split_low(c.imag(), psi));
      spectrum[k] = kind == LpKind::Leq ? low : cplx(c.real() - low.real(), c.imag() - low.imag());
    }
    return;
  }
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    spectrum[k] *= LittlewoodPaleyBank::symbol(std::sqrt(xi2[k]), n_level, kind);
}

ComplexField lp_project(const ComplexField& u, double n_level, LpKind kind) {
  if (u.geometry().is_radial())
    throw ValidationError("Littlewood-Paley projections are only available on full grids");
  const auto& grid = u.geometry().full();
  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());
  apply_lp_symbol(c, grid, n_level, kind);
  grid.dft_backward(c.data());
  return ComplexField(u.geometry(), std::move(c), u.time_tag);
}

// ----------------------------------------------------------- Symmetries

namespace {

// Contract axis `axis` of a row-major P^n array with matrix m (P x P):
// out[.., j, ..] = sum_k m(j, k) in[.., k, ..].
void apply_along_axis(const std::vector<cplx>& m, int points, int dim, int axis, CVector& data) {
  std::size_t inner = 1;
  for (int a = axis + 1; a < dim; ++a) inner *= points;
  std::size_t outer = 1;
  for (int a = 0; a < axis; ++a) outer *= points;
  std::vector<cplx> line(points), result(points);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * points * inner + i;
      for (int k = 0; k < points; ++k) line[k] = data[base + k * inner];
      for (int j = 0; j < points; ++j) {
        cplx acc = 0.0;
        const cplx* row = &m[static_cast<std::size_t>(j) * points];
        for (int k = 0; k < points; ++k) acc += row[k] * line[k];
        result[j] = acc;
      }
      for (int j = 0; j < points; ++j) data[base + j * inner] = result[j];
    }
}

}  // namespace

ComplexField rescale_g(const ComplexField& u, double h, const std::array<double, 3>& x0,
                       double mass_tolerance) {
  if (u.geometry().is_radial()) throw ValidationError("rescale_g requires a full grid");
  if (!(h > 0.0)) throw ValidationError("rescaling factor must be positive");
  const auto& grid = u.geometry().full();
  const int p = grid.points_per_axis();
  const int n = grid.dim();
  const double L = grid.half_width();

  CVector c(u.values().begin(), u.values().end());
  grid.dft_forward(c.data());

  for (int axis = 0; axis < n; ++axis) {
    // Trigonometric interpolant evaluated at y_j = h (x_j - x0); the Nyquist
    // coefficient is split evenly between +-P/2 so real data stays real.
    // The field is taken to vanish outside the box rather than repeat.
    std::vector<cplx> m(static_cast<std::size_t>(p) * p, cplx(0.0, 0.0));
    for (int j = 0; j < p; ++j) {
      const double y = h * (grid.coordinate_axis()[j] - x0[axis]);
      if (y < -L || y >= L) continue;
      // Phases e^{i m dk (y + L)} by recurrence, reseeded every 32 modes;
      // negative modes are the conjugates.
      const double theta = grid.wavenumber_step() * (y + L);
      const cplx step = std::polar(1.0, theta);
      cplx* row = &m[static_cast<std::size_t>(j) * p];
      cplx e(1.0, 0.0);
      for (int k = 0; k <= p / 2; ++k) {
        if (k % 32 == 0) e = std::polar(1.0, k * theta);
        const cplx v = e / static_cast<double>(p);
        if (k == p / 2) {
          row[k] = cplx(v.real(), 0.0);
        } else {
          row[k] = v;
          if (k > 0) row[p - k] = std::conj(v);
        }
        e *= step;
      }
    }
    apply_along_axis(m, p, n, axis, c);
  }

  const double amp = std::pow(h, 0.5 * n);
  for (auto& v : c) v *= amp;
  ComplexField out(u.geometry(), std::move(c), u.time_tag);

  const double m_in = lp_norm(u, 2.0);
  const double m_out = lp_norm(out, 2.0);
  const double rel = std::abs(m_out * m_out - m_in * m_in) / std::max(m_in * m_in, 1e-300);
  if (m_in > 0.0 && rel > mass_tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "rescale_g changed the mass by relative %.3e (aliasing or support leaving the box)", rel);
    throw NumericalError(buf);
  }
  return out;
}

ComplexField boost(const ComplexField& u, double x_boost, const std::array<double, 3>& d) {
  if (u.geometry().is_radial()) throw ValidationError("boost requires a full grid");
  const auto& grid = u.geometry().full();
  if (std::abs(x_boost) > 0.5 * grid.nyquist())
    throw ValidationError("boost |X| = " + std::to_string(std::abs(x_boost)) +
                          " exceeds half the Nyquist wavenumber " + std::to_string(0.5 * grid.nyquist()));
  ComplexField out(u.geometry(), CVector(u.values().begin(), u.values().end()), u.time_tag);
  if (x_boost == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto x = grid.position(i);
    double dot = 0.0;
    for (int a = 0; a < grid.dim(); ++a) dot += d[a] * x[a];
    out[i] *= std::polar(1.0, x_boost * dot);
  }
  return out;
}

// ----------------------------------------------------------- Nonlinearity

double critical_power(double m, int n) {
  if (m == 0.0) return 0.0;
  switch (n) {
    case 1: {
      double m2 = m * m;
      double m4 = m2 * m2;
      return m4 * m4;
    }
    case 2: {
      double m2 = m * m;
      return m2 * m2;
    }
    case 4:
      return m * m;
    case 8:
      return m;
    default:
      return std::exp((8.0 / n) * std::log(m));
  }
}

void dealias_spectrum(CVector& spectrum, const SpectralGrid& grid) {
  const int cut = grid.points_per_axis() / 3;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    auto idx = grid.unflatten(k);
    for (int a = 0; a < grid.dim(); ++a)
      if (std::abs(grid.mode_axis()[idx[a]]) > cut) {
        spectrum[k] = 0.0;
        break;
      }
  }
}

ComplexField nonlinearity(const ComplexField& u, double lambda, int n, bool dealias) {
  ComplexField out(u.geometry());
  out.time_tag = u.time_tag;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = lambda * critical_power(std::abs(u[i]), n) * u[i];
  if (dealias && u.geometry().is_full()) {
    const auto& grid = u.geometry().full();
    grid.dft_forward(out.data().data());
    dealias_spectrum(out.data(), grid);
    grid.dft_backward(out.data().data());
  }
  return out;
}

}  // namespace fnls
