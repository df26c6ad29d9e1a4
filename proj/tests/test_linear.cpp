#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fnls/error.hpp"
#include "fnls/linear.hpp"
#include "test_support.hpp"

using namespace fnls;
using fnls::testing::gaussian;
using fnls::testing::max_abs_diff;
using fnls::testing::random_packets;
using fnls::testing::rel_l2_diff;

namespace {

ComplexField pure_mode(const GridPtr& g, std::array<int, 3> m, cplx amp = 1.0) {
  const double k0 = g->wavenumber_step();
  return sample(Geometry(g), [&](const std::array<double, 3>& x) {
    double ph = 0.0;
    for (int a = 0; a < g->dim(); ++a) ph += k0 * m[a] * x[a];
    return amp * std::polar(1.0, ph);
  });
}

CVector spectrum(const ComplexField& u) {
  CVector c(u.values().begin(), u.values().end());
  u.geometry().full().dft_forward(c.data());
  return c;
}

// Least-squares prefactor of sup * t^{n/2} over the window (fixed exponent).
double band_prefactor(const DecayFit& f, int n) {
  double s = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < f.times.size(); ++i) {
    if (f.times[i] < f.window_min || f.times[i] > f.window_max) continue;
    s += std::log(f.sup_norms[i] * std::pow(f.times[i], 0.5 * n));
    ++count;
  }
  return std::exp(s / count);
}

}  // namespace

TEST_CASE("free flow at t=0 is the identity") {
  std::mt19937_64 rng(3);
  auto g = make_grid(2, 64, 10.0);
  auto u = random_packets(Geometry(g), rng);
  auto v = propagate_linear(u, 0.0);
  CHECK(max_abs_diff(u, v) == 0.0);
}

TEST_CASE("pure mode picks up the quartic dispersion phase") {
  auto g = make_grid(1, 128, 2.0 * std::numbers::pi);
  for (int m : {1, 3, -7, 20}) {
    auto u = pure_mode(g, {m, 0, 0});
    const double t = 0.37;
    auto v = propagate_linear(u, t);
    const double k = g->wavenumber_step() * m;
    const cplx phase = std::polar(1.0, t * k * k * k * k);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(v[i] - phase * u[i]));
    CHECK(err < 1e-11);
  }
}

TEST_CASE("free flow is unitary on full and radial geometries") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 3}) {
    auto g = make_grid(n, n == 3 ? 32 : 128, 8.0);
    auto u = fnls::testing::random_field(Geometry(g), rng);
    const double m0 = lp_norm(u, 2.0);
    auto v = propagate_linear(u, 1.7);
    CHECK(std::abs(lp_norm(v, 2.0) - m0) / m0 < 1e-12);
  }
  auto rg = make_radial_grid(5, 256, 20.0);
  auto u = gaussian(Geometry(rg), 1.5);
  const double m0 = lp_norm(u, 2.0);
  auto v = propagate_linear(u, 0.9);
  CHECK(std::abs(lp_norm(v, 2.0) - m0) / m0 < 1e-12);
}

TEST_CASE("repeated free steps keep the mass") {
  std::mt19937_64 rng(12);
  auto g = make_grid(1, 256, 20.0);
  auto u = random_packets(Geometry(g), rng, 4, 0.3, 4.0);
  const double m0 = lp_norm(u, 2.0);
  for (int i = 0; i < 10000; ++i) u = propagate_linear(u, 1e-3);
  CHECK(std::abs(lp_norm(u, 2.0) - m0) / m0 < 1e-12);
}

TEST_CASE("group law holds") {
  std::mt19937_64 rng(5);
  auto g = make_grid(2, 64, 12.0);
  auto u = random_packets(Geometry(g), rng, 3, 0.2, 2.0);
  auto a = propagate_linear(propagate_linear(u, 0.4), 1.1);
  auto b = propagate_linear(u, 1.5);
  CHECK(rel_l2_diff(a, b) < 1e-12);

  auto rg = make_radial_grid(3, 200, 15.0);
  auto w = gaussian(Geometry(rg), 1.2);
  CHECK(rel_l2_diff(propagate_linear(propagate_linear(w, 0.3), 0.5), propagate_linear(w, 0.8)) < 1e-12);
}

TEST_CASE("free flow commutes with Littlewood-Paley projections") {
  std::mt19937_64 rng(7);
  auto g = make_grid(2, 64, 10.0);
  auto u = random_packets(Geometry(g), rng, 3, 0.2, 3.0);
  for (double N : {0.5, 1.0, 2.0, 4.0}) {
    for (auto kind : {LpKind::At, LpKind::Leq, LpKind::Gt}) {
      auto a = spectrum(propagate_linear(lp_project(u, N, kind), 0.6));
      auto b = spectrum(lp_project(propagate_linear(u, 0.6), N, kind));
      double scale = 0.0, err = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        scale = std::max(scale, std::abs(b[k]));
        err = std::max(err, std::abs(a[k] - b[k]));
      }
      CHECK(err <= 1e-13 * scale);
    }
  }
}

TEST_CASE("decay probe rejects bad input") {
  auto g = make_grid(1, 1024, 50.0);
  auto u = gaussian(Geometry(g), 1.0);
  CHECK_THROWS_AS(decay_probe(u, {1.0}, {}), ValidationError);
  CHECK_THROWS_AS(decay_probe(u, {2.0, 1.0}, {}), ValidationError);
  auto wide = gaussian(Geometry(g), 10.0);
  CHECK_THROWS_AS(decay_probe(wide, {1.0, 2.0}, {}), ValidationError);
}

TEST_CASE("decay probe flags wraparound in a small box") {
  auto g = make_grid(1, 512, 25.0);
  auto u = gaussian(Geometry(g), 1.0);
  DecayOptions o;
  o.window_min = 3.0;
  o.window_max = 30.0;
  auto f = decay_probe(u, log_spaced(1.0, 30.0, 12), o);
  CHECK_FALSE(f.valid);
  CHECK(f.note.find("wraparound") != std::string::npos);
}

TEST_CASE("Gaussian sup norm decays like t^{-1/4} in one dimension") {
  auto g = make_grid(1, 16384, 800.0);
  auto u = gaussian(Geometry(g), 1.0);
  DecayOptions o;
  o.window_min = 3.0;
  o.window_max = 30.0;
  auto f = decay_probe(u, log_spaced(1.0, 30.0, 20), o);
  CHECK(f.valid);
  CHECK(f.r_squared >= 0.99);
  CHECK(std::abs(f.fitted_slope + 0.25) <= 0.05);
}

TEST_CASE("Gaussian sup norm decays like t^{-1/2} in two dimensions") {
  auto g = make_grid(2, 1024, 200.0);
  auto u = gaussian(Geometry(g), 1.0);
  DecayOptions o;
  o.window_min = 10.0;
  o.window_max = 100.0;
  // Fast components wrap in any affordable 2D box. A 5% sup-norm
  // contamination biases the slope over one decade by at most
  // 2 * 0.05 / ln 10 ~ 0.043.
  o.wraparound_tolerance = 5e-2;
  auto f = decay_probe(u, log_spaced(10.0, 100.0, 10), o);
  INFO(f.note);
  CHECK(f.valid);
  CHECK(f.r_squared >= 0.99);
  CHECK(std::abs(f.fitted_slope + 0.5) <= 0.05);
}

TEST_CASE("band-limited delta decays like t^{-1/2} in one dimension") {
  auto g = make_grid(1, 65536, 6000.0);
  DecayOptions o;
  o.window_min = 0.02;
  o.window_max = 0.2;
  auto f = band_decay_probe(g, 8.0, log_spaced(0.02, 0.2, 12), o, 0.0);
  CHECK(f.valid);
  CHECK(std::abs(f.fitted_slope + 0.5) <= 0.1);
}

TEST_CASE("band-limited delta decays like t^{-1} in two dimensions") {
  auto g = make_grid(2, 512, 96.0);
  DecayOptions o;
  o.window_min = 0.04;
  o.window_max = 0.1;
  auto f = band_decay_probe(g, 4.0, log_spaced(0.04, 0.1, 8), o, 0.0);
  CHECK(f.valid);
  CHECK(std::abs(f.fitted_slope + 1.0) <= 0.1);
}

TEST_CASE("doubling the band level scales the decay prefactor like N^{-n}") {
  auto g = make_grid(1, 65536, 6000.0);
  DecayOptions o;
  o.window_min = 0.05;
  o.window_max = 0.25;
  const auto t = log_spaced(0.05, 0.25, 8);
  auto f4 = band_decay_probe(g, 4.0, t, o, 0.0);
  auto f8 = band_decay_probe(g, 8.0, t, o, 0.0);
  REQUIRE(f4.valid);
  REQUIRE(f8.valid);
  const double ratio = band_prefactor(f8, 1) / band_prefactor(f4, 1);
  CHECK(std::abs(ratio / 0.5 - 1.0) <= 0.2);
}

TEST_CASE("band probe requires the band to be resolved") {
  auto g = make_grid(1, 64, 10.0);
  CHECK_THROWS_AS(band_decay_probe(g, 16.0, {0.1, 0.2}, {}), ValidationError);
}

TEST_CASE("Simpson weights integrate cubics exactly") {
  for (std::size_t nodes : {3u, 5u, 9u, 4u, 8u}) {
    const double len = 2.0;
    auto w = simpson_weights(nodes, len);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      double x = len * i / (nodes - 1);
      s += w[i] * (x * x * x - 2.0 * x + 1.0);
    }
    CHECK(s == doctest::Approx(4.0 - 4.0 + 2.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(simpson_weights(1, 1.0), ValidationError);
}

TEST_CASE("refined Strichartz ratio of a single-band mode stays below one") {
  // A pure mode at |xi| = N is the only profile whose spectrum sits where one
  // projection is the identity. Over a horizon within the box scale the ratio
  // is (||u||_Z / ||u0||_2)^{n/(n+4)} <= 1.
  auto g = make_grid(1, 256, 8.0 * std::numbers::pi);
  const double k0 = g->wavenumber_step();
  const int m = static_cast<int>(std::lround(4.0 / k0));
  auto u = pure_mode(g, {m, 0, 0}, cplx(0.3, -0.2));
  const double N = m * k0;
  REQUIRE(std::abs(N - 4.0) < 1e-12);
  auto r = refined_strichartz_ratio(u, 1.0);
  CHECK(r.best_level == doctest::Approx(4.0));
  CHECK(r.ratio <= 1.0 + 1e-6);
  CHECK(r.numerator == doctest::Approx(r.best_band).epsilon(1e-12));
}

TEST_CASE("refined Strichartz ratio of the zero field is an error") {
  auto g = make_grid(1, 64, 8.0);
  CHECK_THROWS_AS(refined_strichartz_ratio(ComplexField(Geometry(g)), 1.0), ValidationError);
  auto rg = make_radial_grid(3, 64, 8.0);
  CHECK_THROWS_AS(refined_strichartz_ratio(gaussian(Geometry(rg)), 1.0), ValidationError);
}

TEST_CASE("refined Strichartz ratio is invariant under g-rescaling") {
  std::mt19937_64 rng(21);
  auto g = make_grid(1, 4096, 100.0);
  auto u = random_packets(Geometry(g), rng, 3, 0.1, 3.0);
  const double T = 0.02;
  auto a = refined_strichartz_ratio(u, T, {129});
  auto v = rescale_g(u, 2.0, {0.0, 0.0, 0.0});
  auto b = refined_strichartz_ratio(v, T / 16.0, {129});
  CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-6));
  CHECK(b.best_level == doctest::Approx(2.0 * a.best_level));
}

TEST_CASE("refined Strichartz ratio is stable under grid refinement") {
  std::mt19937_64 rng(31);
  double worst_coarse = 0.0, worst_fine = 0.0;
  auto coarse = make_grid(1, 512, 40.0);
  auto fine = make_grid(1, 1024, 40.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto seed = rng();
    std::mt19937_64 r1(seed), r2(seed);
    auto uc = random_packets(Geometry(coarse), r1, 4, 0.2, 4.0);
    auto uf = random_packets(Geometry(fine), r2, 4, 0.2, 4.0);
    worst_coarse = std::max(worst_coarse, refined_strichartz_ratio(uc, 0.05, {33}).ratio);
    worst_fine = std::max(worst_fine, refined_strichartz_ratio(uf, 0.05, {33}).ratio);
  }
  CHECK(std::isfinite(worst_coarse));
  CHECK(std::abs(worst_fine / worst_coarse - 1.0) <= 0.25);
}
