#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "fnls/error.hpp"
#include "fnls/grid.hpp"

namespace fnls {

namespace {

// Fornberg's recursion for weights of the m-th derivative at z from nodes x.
std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

}  // namespace

std::vector<double> staggered_derivative_weights(int order) {
  const int hw = order / 2;
  std::vector<double> x;
  for (int m = -hw; m < hw; ++m) x.push_back(m + 0.5);
  return fornberg_weights(0.0, x, 1);
}

RadialGrid::RadialGrid(int dim, int n_points, double r_max, int stencil_order)
    : dim_(dim), n_(n_points), r_max_(r_max), order_(stencil_order) {
  h_ = r_max_ / n_;
  sphere_area_ = 2.0 * std::pow(std::numbers::pi, 0.5 * dim_) / std::tgamma(0.5 * dim_);

  nodes_.resize(n_);
  weights_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    nodes_[i] = (i + 0.5) * h_;
    weights_[i] = sphere_area_ * h_ * std::pow(nodes_[i], dim_ - 1);
  }

  // Staggered derivative from nodes to faces r_f = f h, f = 1..F.
  const int hw = order_ / 2;
  const auto c = staggered_derivative_weights(order_);
  const int faces = n_ + hw - 1;
  gradient_ = Eigen::MatrixXd::Zero(faces, n_);
  face_weights_.resize(faces);
  for (int f = 1; f <= faces; ++f) {
    face_weights_[f - 1] = sphere_area_ * h_ * std::pow(f * h_, dim_ - 1);
    for (int m = -hw; m < hw; ++m) {
      int node = f + m + 1;           // 1-based node index
      if (node <= 0) node = 1 - node;  // even reflection across r = 0
      if (node > n_) continue;         // field vanishes beyond r_max
      gradient_(f - 1, node - 1) += c[m + hw] / h_;
    }
  }

  // Stiffness K = G^T D G, accumulated from the sparse rows of G.
  Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(n_, n_);
  for (int f = 0; f < faces; ++f) {
    std::vector<std::pair<int, double>> row;
    for (int j = std::max(0, f - 2 * hw - 1); j < std::min(n_, f + 2 * hw + 2); ++j)
      if (gradient_(f, j) != 0.0) row.emplace_back(j, gradient_(f, j));
    for (auto [a, ga] : row)
      for (auto [b, gb] : row) stiffness(a, b) += ga * face_weights_[f] * gb;
  }
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b) {
      double s = 0.5 * (stiffness(a, b) + stiffness(b, a));
      stiffness(a, b) = s;
      stiffness(b, a) = s;
    }

  laplacian_ = -(weights_.cwiseInverse().asDiagonal() * stiffness);
  Eigen::SparseMatrix<double> lap_sparse = laplacian_.sparseView();
  Eigen::SparseMatrix<double> bih_sparse = lap_sparse * lap_sparse;
  biharmonic_ = Eigen::MatrixXd(bih_sparse);

  const Eigen::VectorXd w_isqrt = weights_.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd sym = -(w_isqrt.asDiagonal() * stiffness * w_isqrt.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NumericalError("radial eigendecomposition failed (N_r = " + std::to_string(n_) + ")");
  lap_eigenvalues_ = solver.eigenvalues();
  bih_eigenvalues_ = lap_eigenvalues_.cwiseProduct(lap_eigenvalues_);
  eigenvectors_ = w_isqrt.asDiagonal() * solver.eigenvectors();
}

Eigen::MatrixX2d RadialGrid::to_eigenbasis(std::span<const cplx> values) const {
  Eigen::MatrixX2d weighted(n_, 2);
  for (int i = 0; i < n_; ++i) {
    weighted(i, 0) = weights_[i] * values[i].real();
    weighted(i, 1) = weights_[i] * values[i].imag();
  }
  return eigenvectors_.transpose() * weighted;
}

void RadialGrid::from_eigenbasis(const Eigen::MatrixX2d& coeffs, std::span<cplx> out) const {
  Eigen::MatrixX2d v = eigenvectors_ * coeffs;
  for (int i = 0; i < n_; ++i) out[i] = cplx(v(i, 0), v(i, 1));
}

void RadialGrid::apply_real(const Eigen::MatrixXd& m, std::span<const cplx> in,
                            std::span<cplx> out) {
  const auto cols = m.cols();
  Eigen::MatrixX2d x(cols, 2);
  for (Eigen::Index i = 0; i < cols; ++i) {
    x(i, 0) = in[i].real();
    x(i, 1) = in[i].imag();
  }
  Eigen::MatrixX2d y = m * x;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = cplx(y(i, 0), y(i, 1));
}

RadialGridPtr make_radial_grid(int n, int n_points, double r_max, int stencil_order) {
  if (n < 1) throw ValidationError("radial dimension must be >= 1");
  if (n_points < 16 || n_points > RadialGrid::kMaxPoints)
    throw ValidationError("radial point count must lie in [16, " +
                          std::to_string(RadialGrid::kMaxPoints) + "] (got " +
                          std::to_string(n_points) + ")");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ValidationError("r_max must be positive");
  if (stencil_order < 2 || stencil_order > 16 || stencil_order % 2 != 0)
    throw ValidationError("radial stencil order must be even and in [2, 16]");
  return std::make_shared<const RadialGrid>(n, n_points, r_max, stencil_order);
}

}  // namespace fnls
