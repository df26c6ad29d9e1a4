/// Spectral and radial grid construction, transforms and operator checks.
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fnls/error.hpp"
#include "fnls/grid.hpp"
#include "test_support.hpp"

using namespace fnls;

TEST_CASE("make_grid validates its arguments") {
  CHECK_THROWS_AS(make_grid(0, 16, 1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(4, 16, 1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(1, 24, 1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(1, 8, 1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(1, 16, 0.0), ValidationError);
  CHECK_THROWS_AS(make_grid(1, 16, -2.0), ValidationError);
}

TEST_CASE("unit-spacing wavenumber axis with Nyquist at -P/2") {
  auto g = make_grid(1, 16, std::numbers::pi);
  std::vector<double> expect{0, 1, 2, 3, 4, 5, 6, 7, -8, -7, -6, -5, -4, -3, -2, -1};
  for (int k = 0; k < 16; ++k) CHECK(g->wavenumber_axis()[k] == expect[k]);
  CHECK(g->cell_volume() == doctest::Approx(2.0 * std::numbers::pi / 16).epsilon(1e-15));
}

TEST_CASE("xi4 is the exact square of the squared wavenumber norm") {
  auto g = make_grid(2, 16, std::numbers::pi);
  // flat index of (1, 0): axis 0 slowest
  CHECK(g->xi4()[16] == 1.0);
  for (std::size_t f = 0; f < g->size(); ++f) {
    auto xi = g->wavenumber(f);
    double s = xi[0] * xi[0] + xi[1] * xi[1];
    REQUIRE(g->xi4()[f] == s * s);
  }
  auto g3 = make_grid(3, 16, 2.0);
  for (std::size_t f = 0; f < g3->size(); f += 37) {
    auto xi = g3->wavenumber(f);
    double s = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    REQUIRE(g3->xi4()[f] == s * s);
  }
}

TEST_CASE("round trip and Plancherel on 100 random fields") {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 3; ++n) {
    auto g = make_grid(n, n == 1 ? 64 : 16, 10.0);
    Geometry geom(g);
    double worst_trip = 0.0, worst_planch = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      auto u = testing::random_field(geom, rng);
      auto c = forward_transform(u.values(), *g);
      auto back = inverse_transform(c, *g);
      double num = 0.0, den = 0.0, lhs = 0.0, rhs = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        num = std::max(num, std::abs(back[i] - u[i]));
        den = std::max(den, std::abs(u[i]));
        lhs += std::norm(c[i]);
        rhs += std::norm(u[i]);
      }
      worst_trip = std::max(worst_trip, num / den);
      lhs *= g->frequency_measure();
      rhs *= g->cell_volume();
      worst_planch = std::max(worst_planch, std::abs(lhs - rhs) / rhs);
    }
    CHECK(worst_trip <= 1e-12);
    CHECK(worst_planch <= 1e-10);
  }
}

TEST_CASE("transform of zero, pure modes and a Gaussian") {
  auto g = make_grid(1, 64, std::numbers::pi);
  Geometry geom(g);
  ComplexField zero(geom);
  for (auto v : forward_transform(zero.values(), *g)) CHECK(v == cplx(0.0, 0.0));

  auto mode = sample(geom, [](const std::array<double, 3>& x) { return std::polar(1.0, x[0]); });
  auto c = forward_transform(mode.values(), *g);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (g->wavenumber_axis()[k] == 1.0)
      CHECK(std::abs(c[k]) == doctest::Approx(2.0 * std::numbers::pi / std::sqrt(2.0 * std::numbers::pi)));
    else
      CHECK(std::abs(c[k]) <= 1e-12);
  }

  // Continuum normalisation: the transform of e^{-x^2/2} is e^{-xi^2/2}.
  auto g2 = make_grid(1, 256, 20.0);
  auto gauss = testing::gaussian(Geometry(g2));
  auto gh = forward_transform(gauss.values(), *g2);
  for (std::size_t k = 0; k < gh.size(); ++k) {
    double xi = g2->wavenumber_axis()[k];
    REQUIRE(std::abs(gh[k] - std::exp(-0.5 * xi * xi)) <= 1e-12);
  }
}

TEST_CASE("transform rejects shape mismatch") {
  auto g = make_grid(1, 32, 1.0);
  CVector wrong(31);
  CHECK_THROWS_AS(forward_transform(wrong, *g), ValidationError);
  CHECK_THROWS_AS(inverse_transform(wrong, *g), ValidationError);
}

TEST_CASE("staggered derivative weights") {
  auto w2 = staggered_derivative_weights(2);
  CHECK(w2[0] == doctest::Approx(-1.0));
  CHECK(w2[1] == doctest::Approx(1.0));
  auto w4 = staggered_derivative_weights(4);
  CHECK(w4[0] == doctest::Approx(1.0 / 24));
  CHECK(w4[1] == doctest::Approx(-9.0 / 8));
  CHECK(w4[2] == doctest::Approx(9.0 / 8));
  CHECK(w4[3] == doctest::Approx(-1.0 / 24));
}

TEST_CASE("make_radial_grid validates its arguments") {
  CHECK_THROWS_AS(make_radial_grid(0, 64, 10.0), ValidationError);
  CHECK_THROWS_AS(make_radial_grid(5, 4097, 10.0), ValidationError);
  CHECK_THROWS_AS(make_radial_grid(5, 64, -1.0), ValidationError);
  CHECK_THROWS_AS(make_radial_grid(5, 64, 10.0, 3), ValidationError);
  CHECK_THROWS_AS(make_radial_grid(5, 64, 10.0, 18), ValidationError);
}

namespace {

double weighted_asymmetry(const RadialGrid& g, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd wm = g.weights().asDiagonal() * m;
  return (wm - wm.transpose()).norm() / wm.norm();
}

}  // namespace

TEST_CASE("radial biharmonic is self-adjoint, nonnegative, and reconstructed by its eigenbasis") {
  struct Case {
    int n, N;
    double rmax;
  };
  for (auto c : {Case{1, 256, 20.0}, Case{5, 512, 30.0}}) {
    auto g = make_radial_grid(c.n, c.N, c.rmax);
    CHECK(weighted_asymmetry(*g, g->biharmonic_matrix()) <= 1e-10);
    const auto& mu = g->biharmonic_eigenvalues();
    CHECK(mu.minCoeff() >= -1e-8 * mu.maxCoeff());

    Eigen::MatrixXd gram = g->eigenvectors().transpose() * g->weights().asDiagonal() * g->eigenvectors();
    gram -= Eigen::MatrixXd::Identity(c.N, c.N);
    CHECK(gram.cwiseAbs().maxCoeff() <= 1e-8);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd v(c.N);
      for (int i = 0; i < c.N; ++i) v[i] = d(rng);
      Eigen::VectorXd direct = g->biharmonic_matrix() * v;
      Eigen::VectorXd coeff = g->eigenvectors().transpose() * (g->weights().asDiagonal() * v);
      Eigen::VectorXd spectral = g->eigenvectors() * mu.asDiagonal() * coeff;
      CHECK((direct - spectral).norm() / direct.norm() <= 1e-8);
    }
  }
}

TEST_CASE("radial second-order stencil remains available and self-adjoint") {
  auto g = make_radial_grid(5, 256, 30.0, 2);
  CHECK(weighted_asymmetry(*g, g->biharmonic_matrix()) <= 1e-10);
  CHECK(g->biharmonic_eigenvalues().minCoeff() >= -1e-8 * g->biharmonic_eigenvalues().maxCoeff());
}

TEST_CASE("radial biharmonic of e^{-r^2} against the closed form") {
  // For f = e^{-r^2} in R^n: Delta f = (4r^2 - 2n) f and
  // Delta^2 f = (16 r^4 - 16(n+2) r^2 + 4n(n+2)) f.
  for (int n : {1, 3, 5}) {
    auto g = make_radial_grid(n, 1024, 20.0);
    Eigen::VectorXd f(g->n_points()), exact(g->n_points());
    for (int i = 0; i < g->n_points(); ++i) {
      double r = g->nodes()[i];
      f[i] = std::exp(-r * r);
      exact[i] = (16 * std::pow(r, 4) - 16.0 * (n + 2) * r * r + 4.0 * n * (n + 2)) * f[i];
    }
    Eigen::VectorXd approx = g->biharmonic_matrix() * f;
    double worst = 0.0;
    for (int i = 0; i < g->n_points(); ++i)
      if (g->nodes()[i] < 5.0) worst = std::max(worst, std::abs(approx[i] - exact[i]));
    CHECK(worst / exact.cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("radial quadrature integrates a Gaussian over R^n (odd n)") {
  // Odd n makes r^{n-1} e^{-r^2} even, so the cell-centred rule is
  // spectrally accurate; even n is only second order.
  for (int n : {1, 3, 5}) {
    auto g = make_radial_grid(n, 512, 12.0);
    double s = 0.0;
    for (int i = 0; i < g->n_points(); ++i) s += g->weights()[i] * std::exp(-std::pow(g->nodes()[i], 2));
    CHECK(s == doctest::Approx(std::pow(std::numbers::pi, 0.5 * n)).epsilon(1e-10));
  }
}
