#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fnls {

using cplx = std::complex<double>;

/// 64-byte aligned allocator so every buffer shares the alignment FFTW
/// planned for and can go through the new-array execute interface.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    if (count == 0) return nullptr;
    std::size_t bytes = ((count * sizeof(T) + 63) / 64) * 64;
    void* p = std::aligned_alloc(64, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVector = std::vector<cplx, AlignedAllocator<cplx>>;

/// Periodic box [-L, L)^n sampled with P points per axis, n in {1,2,3}.
///
/// Storage is row-major with axis 0 slowest. Spectral arrays use the
/// standard DFT ordering; the Nyquist mode carries wavenumber -P/2 * pi/L.
class SpectralGrid {
 public:
  SpectralGrid(int dim, int points_per_axis, double half_width);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int dim() const { return dim_; }
  int points_per_axis() const { return points_; }
  double half_width() const { return half_width_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 2.0 * half_width_ / points_; }
  double cell_volume() const { return cell_volume_; }
  /// Spacing of the wavenumber lattice, pi/L.
  double wavenumber_step() const;
  /// Quadrature weight of one lattice point in frequency space, (pi/L)^n.
  double frequency_measure() const;
  double nyquist() const;

  /// Wavenumbers of one axis in DFT storage order (same for every axis).
  const std::vector<double>& wavenumber_axis() const { return axis_xi_; }
  /// Signed integer mode index of one axis in DFT storage order.
  const std::vector<int>& mode_axis() const { return axis_mode_; }
  /// Sample positions x_j = -L + j*dx of one axis.
  const std::vector<double>& coordinate_axis() const { return axis_x_; }
  /// |xi|^2 and |xi|^4 over the full spectral array.
  const std::vector<double>& xi2() const { return xi2_; }
  const std::vector<double>& xi4() const { return xi4_; }

  /// Per-axis multi-index of a flat position (unused axes are 0).
  std::array<int, 3> unflatten(std::size_t flat) const;
  /// Coordinate vector of flat position.
  std::array<double, 3> position(std::size_t flat) const;
  /// Wavenumber vector of flat spectral position.
  std::array<double, 3> wavenumber(std::size_t flat) const;

  /// Unnormalized in-place DFT (sum u_j e^{-i k j}).
  void dft_forward(cplx* data) const;
  /// In-place inverse DFT including the 1/P^n factor.
  void dft_backward(cplx* data) const;

 private:
  int dim_;
  int points_;
  double half_width_;
  std::size_t size_;
  double cell_volume_;
  std::vector<double> axis_xi_;
  std::vector<int> axis_mode_;
  std::vector<double> axis_x_;
  std::vector<double> xi2_;
  std::vector<double> xi4_;
  void* plan_forward_ = nullptr;
  void* plan_backward_ = nullptr;
};

/// Radial half-line (0, r_max] for radially symmetric fields in R^n.
///
/// Nodes are cell centred, r_i = (i - 1/2) h. The Laplacian is assembled in
/// flux form L = -W^{-1} G^T D G, where G is a staggered derivative of
/// selectable even order (fields are reflected evenly across r = 0 and
/// vanish beyond r_max), D holds face weights r^{n-1} h and W node weights
/// r^{n-1} h. That makes L self-adjoint and nonpositive for the weighted
/// inner product, so Delta^2 = L^2 has nonnegative spectrum. The node
/// quadrature is spectrally accurate for odd n and second order for even n.
class RadialGrid {
 public:
  RadialGrid(int dim, int n_points, double r_max, int stencil_order);

  static constexpr int kMaxPoints = 4096;
  static constexpr int kDefaultStencilOrder = 12;

  int dim() const { return dim_; }
  int n_points() const { return n_; }
  double r_max() const { return r_max_; }
  double spacing() const { return h_; }
  int stencil_order() const { return order_; }
  /// Surface area of the unit sphere S^{n-1} (2 for n = 1).
  double sphere_area() const { return sphere_area_; }

  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Quadrature weights including the sphere area: sum w_i f(r_i)
  /// approximates the integral over R^n of the radial function f.
  const Eigen::VectorXd& weights() const { return weights_; }

  const Eigen::MatrixXd& laplacian_matrix() const { return laplacian_; }
  const Eigen::MatrixXd& biharmonic_matrix() const { return biharmonic_; }
  /// Staggered derivative (faces x nodes) and the matching face weights
  /// (including sphere area), for H^1 quantities.
  const Eigen::MatrixXd& gradient_matrix() const { return gradient_; }
  const Eigen::VectorXd& face_weights() const { return face_weights_; }

  /// Weight-orthonormal eigenvectors (columns) of the Laplacian.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  /// Laplacian eigenvalues (<= 0) and biharmonic eigenvalues (their squares).
  const Eigen::VectorXd& laplacian_eigenvalues() const { return lap_eigenvalues_; }
  const Eigen::VectorXd& biharmonic_eigenvalues() const { return bih_eigenvalues_; }

  /// Coefficients c = E^T W u of a complex radial field (columns Re, Im).
  Eigen::MatrixX2d to_eigenbasis(std::span<const cplx> values) const;
  /// u = E c.
  void from_eigenbasis(const Eigen::MatrixX2d& coeffs, std::span<cplx> out) const;
  /// Apply a real matrix to a complex vector.
  static void apply_real(const Eigen::MatrixXd& m, std::span<const cplx> in,
                         std::span<cplx> out);

 private:
  int dim_;
  int n_;
  double r_max_;
  double h_;
  int order_;
  double sphere_area_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd gradient_;
  Eigen::VectorXd face_weights_;
  Eigen::MatrixXd laplacian_;
  Eigen::MatrixXd biharmonic_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd lap_eigenvalues_;
  Eigen::VectorXd bih_eigenvalues_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;
using RadialGridPtr = std::shared_ptr<const RadialGrid>;

/// Builds a full periodic grid. Throws ValidationError for n outside
/// {1,2,3}, P not a power of two >= 16, or L <= 0.
GridPtr make_grid(int n, int points_per_axis, double half_width);

/// Builds a radial grid and its eigendecomposition. Throws ValidationError
/// for bad parameters (N_r > 4096, odd or out-of-range stencil order) and
/// NumericalError if the eigensolver fails.
RadialGridPtr make_radial_grid(int n, int n_points, double r_max,
                               int stencil_order = RadialGrid::kDefaultStencilOrder);

/// Finite-difference weights for the first derivative at 0 from nodes
/// (m + 1/2), m = -hw..hw-1, of the given even order.
std::vector<double> staggered_derivative_weights(int order);

/// Continuum-normalised Fourier coefficients
///   u_hat(xi_k) ~ (2 pi)^{-n/2} int u(x) e^{-i x.xi_k} dx
/// in DFT order. With this normalisation
///   sum |u_hat|^2 * frequency_measure == sum |u|^2 * cell_volume.
CVector forward_transform(std::span<const cplx> values, const SpectralGrid& grid);
CVector inverse_transform(std::span<const cplx> coeffs, const SpectralGrid& grid);

}  // namespace fnls
