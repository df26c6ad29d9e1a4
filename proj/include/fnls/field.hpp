#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "fnls/grid.hpp"

namespace fnls {

/// Shared handle to either discretisation.
class Geometry {
 public:
  Geometry(GridPtr grid) : impl_(std::move(grid)) {}
  Geometry(RadialGridPtr grid) : impl_(std::move(grid)) {}

  bool is_full() const { return std::holds_alternative<GridPtr>(impl_); }
  bool is_radial() const { return !is_full(); }
  /// Throws ValidationError when the geometry is of the other kind.
  const SpectralGrid& full() const;
  const RadialGrid& radial() const;
  const GridPtr& full_ptr() const;
  const RadialGridPtr& radial_ptr() const;

  int dim() const;
  std::size_t size() const;
  /// Box half width L or radial extent r_max.
  double extent() const;
  bool same_as(const Geometry& other) const;

 private:
  std::variant<GridPtr, RadialGridPtr> impl_;
};

/// A complex state on a grid. Values follow the geometry's storage order.
class ComplexField {
 public:
  explicit ComplexField(Geometry geometry);
  ComplexField(Geometry geometry, CVector values, std::optional<double> time_tag = {});

  const Geometry& geometry() const { return geometry_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  CVector& data() { return values_; }
  const CVector& data() const { return values_; }
  std::size_t size() const { return values_.size(); }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  std::optional<double> time_tag;

  bool is_finite() const;
  /// Throws NumericalError if any value is NaN or infinite.
  void require_finite(const char* context) const;

 private:
  Geometry geometry_;
  CVector values_;
};

/// Builds a field by sampling f at every grid point (radial: at r_i, passed
/// as {r, 0, 0}).
template <class F>
ComplexField sample(const Geometry& geometry, F&& f) {
  ComplexField out(geometry);
  if (geometry.is_full()) {
    const auto& g = geometry.full();
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.position(i));
  } else {
    const auto& g = geometry.radial();
    for (int i = 0; i < g.n_points(); ++i) out[i] = f(std::array<double, 3>{g.nodes()[i], 0.0, 0.0});
  }
  return out;
}

/// Sum of a few Gaussian packets with random centres, widths in [0.8, 2],
/// carrier wavenumbers |k_a| <= max_k and complex amplitudes, centred
/// within spread * L of the origin.
ComplexField random_packets(const Geometry& geometry, std::mt19937_64& rng, int packets = 3,
                            double spread = 0.2, double max_k = 1.5);

/// amplitude * e^{i k.x} with k = mode * (pi / L) on a full grid.
ComplexField plane_wave(const GridPtr& grid, const std::array<int, 3>& mode, cplx amplitude = 1.0);

/// Quadrature weight of each sample (cell volume or radial weights).
double quadrature_weight(const Geometry& geometry, std::size_t index);

/// (int |u|^p)^{1/p}; p = infinity gives the max modulus. p < 1 is rejected.
double lp_norm(const ComplexField& u, double p);
/// int |u|^p without the 1/p root.
double lp_integral(const ComplexField& u, double p);
/// int u conj(v).
cplx inner_product(const ComplexField& u, const ComplexField& v);

/// || |nabla|^s u ||_2. Radial grids support s in {0, 1, 2}.
double sobolev_seminorm(const ComplexField& u, double s);

/// Delta u (spectral on full grids, the discrete operator on radial grids).
ComplexField laplacian(const ComplexField& u);
/// Delta^2 u.
ComplexField bilaplacian(const ComplexField& u);
/// Directional derivative d . grad u on a full grid (spectral).
ComplexField directional_derivative(const ComplexField& u, const std::array<double, 3>& direction);

/// Smooth dyadic cutoff psi: 1 on [0,1], 0 on [2, inf), C^infinity between.
///   psi(s) = f(2 - s) / (f(2 - s) + f(s - 1)),  f(t) = exp(-1/t) for t > 0.
/// The same profile is used as the virial cutoff a(s) = psi(|s|).
double smooth_cutoff(double s);

enum class LpKind { At, Leq, Gt, Geq, Lt };

/// Dyadic Littlewood-Paley symbols built from psi:
///   P_{<=N}: psi(|xi|/N),  P_{>N}: 1 - psi(|xi|/N),
///   P_N: psi(|xi|/N) - psi(2|xi|/N),  P_{<N} = P_{<=N/2},  P_{>=N} = P_{>N/2}.
struct LittlewoodPaleyBank {
  static double symbol(double xi_abs, double n_level, LpKind kind);
  /// Dyadic levels 2^k (k may be negative) whose annulus meets the
  /// resolvable frequencies of the grid, from the lowest nonzero mode up
  /// to the first level with N >= nyquist * sqrt(dim).
  static std::vector<double> dyadic_levels(const SpectralGrid& grid);
};

/// Multiplies a DFT-ordered spectrum in place by an LP symbol.
void apply_lp_symbol(CVector& spectrum, const SpectralGrid& grid, double n_level, LpKind kind);
/// Field-level projection (full grids only).
ComplexField lp_project(const ComplexField& u, double n_level, LpKind kind);

/// Trig-interpolated g-rescaling h^{n/2} u(h (x - x0)). Throws NumericalError
/// if the L^2 mass changes by more than mass_tolerance (relative), which
/// signals aliasing or support leaving the box.
ComplexField rescale_g(const ComplexField& u, double h, const std::array<double, 3>& x0,
                       double mass_tolerance = 1e-8);

/// Galilean-type boost e^{i X d.x} u. |X| must stay below half the Nyquist
/// wavenumber.
ComplexField boost(const ComplexField& u, double x_boost, const std::array<double, 3>& direction);

/// |u|^{8/n}, with 0 mapped to 0.
double critical_power(double modulus, int n);
/// Pointwise lambda |u|^{8/n} u; optionally 2/3-rule dealiased.
ComplexField nonlinearity(const ComplexField& u, double lambda, int n, bool dealias = false);
/// Zeroes modes with |m_a| > P/3 on some axis (2/3 rule), in place on a
/// DFT-ordered spectrum.
void dealias_spectrum(CVector& spectrum, const SpectralGrid& grid);

}  // namespace fnls
