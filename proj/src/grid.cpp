#include "fnls/grid.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "fnls/error.hpp"

namespace fnls {

namespace {

// The FFTW planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int p) { return p > 0 && (p & (p - 1)) == 0; }

}  // namespace

SpectralGrid::SpectralGrid(int dim, int points_per_axis, double half_width)
    : dim_(dim), points_(points_per_axis), half_width_(half_width) {
  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(points_);
  cell_volume_ = std::pow(spacing(), dim_);

  const double dk = std::numbers::pi / half_width_;
  axis_xi_.resize(points_);
  axis_mode_.resize(points_);
  axis_x_.resize(points_);
  for (int k = 0; k < points_; ++k) {
    int m = k < points_ / 2 ? k : k - points_;
    axis_mode_[k] = m;
    axis_xi_[k] = dk * m;
    axis_x_[k] = -half_width_ + k * spacing();
  }

  xi2_.resize(size_);
  xi4_.resize(size_);
  for (std::size_t f = 0; f < size_; ++f) {
    auto idx = unflatten(f);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += axis_xi_[idx[a]] * axis_xi_[idx[a]];
    xi2_[f] = s;
    xi4_[f] = s * s;
  }

  std::array<int, 3> shape{points_, points_, points_};
  CVector scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_forward_ = fftw_plan_dft(dim_, shape.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_backward_ = fftw_plan_dft(dim_, shape.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_forward_ || !plan_backward_) throw NumericalError("FFTW planning failed");
}

SpectralGrid::~SpectralGrid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
}

double SpectralGrid::wavenumber_step() const { return std::numbers::pi / half_width_; }

double SpectralGrid::frequency_measure() const { return std::pow(wavenumber_step(), dim_); }

double SpectralGrid::nyquist() const { return std::numbers::pi / spacing(); }

std::array<int, 3> SpectralGrid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::array<double, 3> SpectralGrid::position(std::size_t flat) const {
  auto idx = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = axis_x_[idx[a]];
  return x;
}

std::array<double, 3> SpectralGrid::wavenumber(std::size_t flat) const {
  auto idx = unflatten(flat);
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) k[a] = axis_xi_[idx[a]];
  return k;
}

void SpectralGrid::dft_forward(cplx* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_forward_), buf, buf);
}

void SpectralGrid::dft_backward(cplx* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_backward_), buf, buf);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) data[i] *= scale;
}

GridPtr make_grid(int n, int points_per_axis, double half_width) {
  if (n < 1 || n > 3)
    throw ValidationError("full grid dimension must be 1, 2 or 3 (got " + std::to_string(n) + ")");
  if (!is_power_of_two(points_per_axis) || points_per_axis < 16)
    throw ValidationError("points per axis must be a power of two >= 16 (got " +
                          std::to_string(points_per_axis) + ")");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("half width L must be positive");
  return std::make_shared<const SpectralGrid>(n, points_per_axis, half_width);
}

namespace {

// (-1)^m per axis: the phase e^{i xi L} from the box starting at -L.
double offset_sign(const SpectralGrid& grid, std::size_t flat) {
  auto idx = grid.unflatten(flat);
  int parity = 0;
  for (int a = 0; a < grid.dim(); ++a) parity += grid.mode_axis()[idx[a]];
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

CVector forward_transform(std::span<const cplx> values, const SpectralGrid& grid) {
  if (values.size() != grid.size())
    throw ValidationError("field size " + std::to_string(values.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
  CVector out(values.begin(), values.end());
  grid.dft_forward(out.data());
  const double scale = grid.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * grid.dim());
  for (std::size_t f = 0; f < out.size(); ++f) out[f] *= scale * offset_sign(grid, f);
  return out;
}

CVector inverse_transform(std::span<const cplx> coeffs, const SpectralGrid& grid) {
  if (coeffs.size() != grid.size())
    throw ValidationError("coefficient array size " + std::to_string(coeffs.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
  CVector out(coeffs.begin(), coeffs.end());
  const double scale = std::pow(2.0 * std::numbers::pi, 0.5 * grid.dim()) / grid.cell_volume();
  for (std::size_t f = 0; f < out.size(); ++f) out[f] *= scale * offset_sign(grid, f);
  grid.dft_backward(out.data());
  return out;
}

}  // namespace fnls
