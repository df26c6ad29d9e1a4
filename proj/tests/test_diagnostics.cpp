#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fnls/conserved.hpp"
#include "fnls/diagnostics.hpp"
#include "fnls/error.hpp"
#include "fnls/evolution.hpp"
#include "fnls/ground_state.hpp"
#include "fnls/linear.hpp"
#include "test_support.hpp"

using namespace fnls;
using fnls::testing::gaussian;
using fnls::testing::random_packets;

namespace {

const GroundState& q1() {
  static const GroundState gs = solve_ground_state(1, Geometry(make_grid(1, 1024, 20.0)));
  return gs;
}

/// e^{-it}Q on [0, 1] at dt = 1e-4, a row every 1e-2.
const TrajectoryRecord& standing_wave_run() {
  static const TrajectoryRecord rec = [] {
    RunControls c;
    c.t_end = 1.0;
    c.dt_max = 1e-4;
    c.snapshot_every = 100;
    c.store_snapshots = false;
    return evolve(q1().profile, EquationParams{1, -1.0}, c);
  }();
  return rec;
}

std::vector<std::shared_ptr<const TrajectoryProbe>> rate_probes(double radius) {
  VirialProbe p;
  p.radius = radius;
  return {std::make_shared<VirialTrajectoryProbe>(p, "virial"),
          std::make_shared<MassMomentTrajectoryProbe>(p, "moment")};
}

/// Free flow of a boosted, off-centre Gaussian of width 2 on [0, 1].
TrajectoryRecord dispersing_run(double radius, int every = 25) {
  auto g = make_grid(1, 4096, 320.0);
  auto u = sample(Geometry(g), [](const std::array<double, 3>& x) {
    return cplx(std::exp(-0.125 * (x[0] - 1.0) * (x[0] - 1.0)), 0.0);
  });
  RunControls c;
  c.t_end = 1.0;
  c.snapshot_every = every;
  c.store_snapshots = false;
  return evolve(boost(u, 0.5, {1.0, 0.0, 0.0}), EquationParams{1, 0.0}, c, rate_probes(radius));
}

}  // namespace

// ------------------------------------------------------------ Z norm

TEST_CASE("Z norm of the zero field vanishes") {
  RunControls c;
  c.t_end = 0.1;
  c.dt_max = 1e-3;
  c.snapshot_every = 5;
  auto rec = evolve(ComplexField(Geometry(make_grid(1, 64, 10.0))), EquationParams{1, -1.0}, c);
  auto z = z_norm_accumulate(rec);
  CHECK(z.total == 0.0);
  for (double w : z.window_increments) CHECK(w == 0.0);
}

TEST_CASE("Z norm of the standing wave grows linearly in time") {
  const auto& rec = standing_wave_run();
  const double q = lp_integral(q1().profile, 10.0);
  auto z = z_norm_accumulate(rec);
  CHECK(std::abs(z.total / q - 1.0) <= 1e-5);
  for (std::size_t i = 10; i < z.times.size(); i += 10)
    CHECK(std::abs(z.running[i] / (q * z.times[i]) - 1.0) <= 1e-5);
  // Equal windows carry equal increments.
  REQUIRE(z.window_increments.size() >= 2);
  for (double w : z.window_increments)
    CHECK(w == doctest::Approx(z.window_increments.front()).epsilon(1e-5));
}

TEST_CASE("Z norm needs enough rows") {
  RunControls c;
  c.t_end = 0.01;
  c.dt_max = 1e-3;
  c.snapshot_every = 5;
  auto rec = evolve(gaussian(Geometry(make_grid(1, 64, 10.0))), EquationParams{1, -1.0}, c);
  CHECK_THROWS_AS(z_norm_accumulate(rec, 16), ValidationError);
  CHECK_THROWS_AS(z_norm_accumulate(rec, 1), ValidationError);
}

TEST_CASE("Z total is invariant under the rescaling symmetry") {
  std::mt19937_64 rng(61);
  Geometry geom(make_grid(1, 512, 40.0));
  auto u0 = random_packets(geom, rng, 3, 0.05, 1.0);
  for (auto& v : u0.values()) v *= 0.5;
  RunControls c;
  c.t_end = 0.5;
  c.dt_max = 5e-4;
  c.snapshot_every = 20;
  auto rec = evolve(u0, EquationParams{1, -1.0}, c);
  std::vector<ComplexField> states;
  for (const auto& s : rec.snapshots) states.push_back(s.field);
  REQUIRE(states.size() == 51);
  const double dt = 0.5 / 50;
  const double z0 = z_total(states, dt);
  for (double h : {1.5, 0.7}) {
    std::vector<ComplexField> scaled;
    // Dispersed high-frequency radiation fills the periodic box, so the
    // rescaled window drops a little mass at late times.
    for (const auto& s : states) scaled.push_back(rescale_g(s, h, {0.0, 0.0, 0.0}, 1e-4));
    CHECK(std::abs(z_total(scaled, dt / std::pow(h, 4)) / z0 - 1.0) <= 1e-4);
  }
}

// ------------------------------------------------------------ Scale

TEST_CASE("scale estimate of a pure mode is its wavenumber") {
  const double L = 10.0;
  auto g = make_grid(1, 128, L);
  for (int m : {1, 3, -7}) {
    const double k = std::numbers::pi * m / L;
    auto u = sample(Geometry(g), [&](const std::array<double, 3>& x) { return std::polar(1.0, k * x[0]); });
    CHECK(scale_estimate(u) == doctest::Approx(std::abs(k)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(scale_estimate(ComplexField(Geometry(g))), ValidationError);
}

TEST_CASE("scale estimate is homogeneous under g-rescaling") {
  std::mt19937_64 rng(67);
  auto u = random_packets(Geometry(make_grid(1, 1024, 40.0)), rng, 3, 0.1, 1.0);
  const double n0 = scale_estimate(u);
  for (double h : {0.5, 2.0}) CHECK(std::abs(scale_estimate(rescale_g(u, h, {0.0, 0.0, 0.0})) / (h * n0) - 1.0) <= 1e-6);
}

TEST_CASE("scale estimate is constant along the standing wave") {
  double lo = 1e300, hi = 0.0;
  for (const auto& r : standing_wave_run().diagnostics) {
    lo = std::min(lo, r.n_est);
    hi = std::max(hi, r.n_est);
  }
  CHECK((hi - lo) / lo <= 1e-6);
  CHECK(lo == doctest::Approx(scale_estimate(q1().profile)).epsilon(1e-6));
}

TEST_CASE("blow-up fit recovers an exact power law") {
  std::vector<double> t, y;
  for (int i = 0; i <= 990; ++i) {
    t.push_back(i * 1e-3);
    y.push_back(std::pow(1.0 - t.back(), -0.25));
  }
  auto fit = fit_blowup_rate(t, y);
  REQUIRE(fit.has_value());
  CHECK(std::abs(fit->t_star - 1.0) <= 1e-3);
  CHECK(std::abs(fit->exponent - 0.25) <= 1e-3);
  CHECK(fit->r_squared >= 0.999);
}

TEST_CASE("blow-up fit rejects an exponential series") {
  std::vector<double> t, y;
  for (int i = 0; i <= 990; ++i) {
    t.push_back(i * 1e-3);
    y.push_back(std::exp(3.0 * t.back()));
  }
  CHECK_FALSE(fit_blowup_rate(t, y).has_value());
  CHECK_FALSE(fit_blowup_rate({}, {}).has_value());
  CHECK_THROWS_AS(fit_blowup_rate({0.0, 1.0}, {1.0}), ValidationError);
}

TEST_CASE("focusing super-threshold run gives an exponent near one quarter") {
  auto q = solve_ground_state(1, Geometry(make_grid(1, 8192, 20.0)));
  ComplexField u(q.profile.geometry(), CVector(q.profile.values().begin(), q.profile.values().end()));
  for (auto& v : u.values()) v *= 1.2;

  RunControls rc;
  rc.t_end = 1.0;
  rc.adaptive = true;
  rc.dt_max = 1e-3;
  rc.snapshot_every = 10;
  rc.store_snapshots = false;
  auto rec = evolve(u, EquationParams{1, -1.0}, rc);
  auto track = scale_track(rec);
  REQUIRE(track.fitted_blowup.has_value());
  CHECK(std::abs(track.fitted_blowup->exponent - 0.25) <= 0.1);
  CHECK(track.fitted_blowup->t_star > rec.final_time);
}

// ------------------------------------------------------------ Virial

TEST_CASE("virial action of real fields vanishes") {
  auto g = make_grid(2, 64, 10.0);
  auto u = sample(Geometry(g), [](const std::array<double, 3>& x) {
    return cplx(std::exp(-0.5 * ((x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1])) * (2.0 + x[1]), 0.0);
  });
  VirialProbe p;
  p.radius = 3.0;
  p.direction = {0.6, 0.8, 0.0};
  CHECK(std::abs(virial_action(u, p)) <= 1e-12);
  CHECK_THROWS_AS(virial_action(gaussian(Geometry(make_radial_grid(3, 32, 5.0))), p), ValidationError);
}

TEST_CASE("virial action vanishes on the standing wave") {
  VirialProbe p;
  p.radius = 5.0;
  p.center = {0.3, 0.0, 0.0};
  for (double t : {0.0, 0.4, 1.7, 3.0}) {
    ComplexField u(q1().profile.geometry(), CVector(q1().profile.values().begin(), q1().profile.values().end()));
    for (auto& v : u.values()) v *= std::polar(1.0, -t);
    CHECK(std::abs(virial_action(u, p)) <= 1e-12);
  }
}

TEST_CASE("virial action of a boosted off-centre Gaussian matches direct quadrature") {
  const double L = 20.0, k = 0.75, c = 1.5;
  auto g = make_grid(1, 1024, L);
  auto u = sample(Geometry(g), [&](const std::array<double, 3>& x) {
    return std::exp(-0.5 * (x[0] - c) * (x[0] - c)) * std::polar(1.0, k * x[0]);
  });
  VirialProbe p;
  p.radius = 2.0;
  p.center = {0.5, 0.0, 0.0};
  // d u / dx = (-(x - c) + i k) u, so Im(u' conj u) = k |u|^2.
  const double dx = 2.0 * L / 1024;
  double direct = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double x = -L + i * dx;
    const double z = x - p.center[0];
    direct += 2.0 * smooth_cutoff(std::abs(z) / p.radius) * z * k * std::exp(-(x - c) * (x - c)) * dx;
  }
  CHECK(std::abs(virial_action(u, p) - direct) <= 1e-10);
}

TEST_CASE("virial rate identity on a dispersing Gaussian") {
  auto rec = dispersing_run(20.0);
  auto r = virial_rate_check(rec);
  CHECK(r.r_valid);
  CHECK(r.interior_points > 10);
  CHECK(r.max_defect <= 2e-2);
}

TEST_CASE("virial defect does not grow when the radius doubles") {
  double previous = 1e300;
  for (double R : {10.0, 20.0, 40.0}) {
    const double d = virial_rate_check(dispersing_run(R)).max_defect;
    CHECK(d <= previous);
    previous = d;
  }
}

TEST_CASE("virial rate right-hand side cancels at the ground state") {
  const auto& q = q1().profile;
  const double A = std::pow(sobolev_seminorm(q, 2.0), 2);
  const double C = lp_integral(q, 10.0);
  const double scale = 16.0 * (0.5 * A + C / 10.0);
  VirialProbe p;
  CHECK(std::abs(virial_rate_rhs(q, p, -1.0)) <= 1e-3 * scale);
  // Without the potential the right-hand side is -8 ||Delta Q||^2 in 1D.
  CHECK(virial_rate_rhs(q, p, 0.0) == doctest::Approx(-8.0 * A).epsilon(1e-12));
}

TEST_CASE("rate check finite differences converge with cadence") {
  auto defect = [](int rows) {
    std::vector<double> t, v, rhs, out;
    for (int i = 0; i < rows; ++i) {
      t.push_back(2.0 * i / (rows - 1));
      v.push_back(std::sin(t.back()));
      rhs.push_back(2.0 + std::cos(t.back()));
      out.push_back(0.0);
    }
    for (std::size_t i = 0; i < t.size(); ++i) v[i] += 2.0 * t[i];
    return rate_check_series(t, v, rhs, out, 1e-3).max_defect;
  };
  const double d1 = defect(21), d2 = defect(41), d3 = defect(81);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(rate_check_series({0.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, 1e-3), ValidationError);
  CHECK_THROWS_AS(rate_check_series({0.0, 1.0, 3.0, 3.5}, {0, 0, 0, 0}, {1, 1, 1, 1}, {0, 0, 0, 0}, 1e-3),
                  ValidationError);
}

TEST_CASE("rate check flags mass outside the cutoff") {
  auto r = virial_rate_check(dispersing_run(5.0));
  CHECK_FALSE(r.r_valid);
  CHECK(r.max_outside_fraction > 1e-3);
  TrajectoryRecord empty(Geometry(make_grid(1, 64, 10.0)));
  CHECK_THROWS_AS(rate_check(empty, "virial", 1e-3), ValidationError);
}

// ------------------------------------------------------------ Mass moment

TEST_CASE("mass moment of an even field vanishes") {
  auto u = gaussian(Geometry(make_grid(2, 64, 10.0)), 1.2);
  VirialProbe p;
  p.radius = 2.0;
  CHECK(std::abs(mass_moment(u, p)) <= 1e-12);
}

TEST_CASE("mass moment obeys the Hoelder bound") {
  std::mt19937_64 rng(71);
  Geometry geom(make_grid(1, 512, 20.0));
  const double ca = moment_cutoff_constant();
  CHECK(ca >= 1.0);
  CHECK(ca <= 2.0);
  for (int i = 0; i < 50; ++i) {
    auto u = random_packets(geom, rng, 3, 0.3, 2.0);
    VirialProbe p;
    p.radius = 1.0 + 0.2 * i;
    p.center = {0.1 * (i % 7) - 0.3, 0.0, 0.0};
    CHECK(std::abs(mass_moment(u, p)) <= ca * p.radius * mass(u) + 1e-12);
  }
}

TEST_CASE("mass moment rate identity on a dispersing boosted Gaussian") {
  auto r = mass_moment_rate_check(dispersing_run(20.0));
  CHECK(r.r_valid);
  CHECK(r.max_defect <= 2e-2);
}

// ------------------------------------------------------------ Scattering

TEST_CASE("linear run scatters with a roundoff defect") {
  std::mt19937_64 rng(73);
  auto u = random_packets(Geometry(make_grid(1, 512, 200.0)), rng, 2, 0.05, 0.5);
  RunControls c;
  c.t_end = 2.0;
  c.dt_max = 1e-2;
  c.snapshot_every = 5;
  auto rec = evolve(u, EquationParams{1, 0.0}, c);
  auto rep = scattering_probe(rec);
  CHECK(rep.fired);
  CHECK(rep.cauchy_defect <= 1e-12);
  CHECK(rep.snapshots_used >= 4);
  CHECK(!rep.caveat.empty());
}

TEST_CASE("small defocusing data scatters with its mass") {
  auto g = make_grid(1, 4096, 2048.0);
  auto u = gaussian(Geometry(g), 2.0);
  const double f = std::sqrt(1e-2 / mass(u));
  for (auto& v : u.values()) v *= f;
  RunControls c;
  c.t_end = 50.0;
  c.dt_max = 1e-2;
  c.snapshot_every = 50;
  auto rec = evolve(u, EquationParams{1, 1.0}, c);
  ScatteringOptions o;
  o.epsilon = 1e-3;
  auto rep = scattering_probe(rec, o);
  CHECK(rep.fired);
  CHECK(rep.window_end <= rep.validity_end);
  REQUIRE(rep.profile_plus.has_value());
  CHECK(std::abs(rep.profile_mass / mass(u) - 1.0) <= 1e-6);
}

TEST_CASE("standing wave does not scatter and firing is monotone in epsilon") {
  // A wider box pushes the wraparound horizon past the probe window.
  auto big = embed_in_larger_box(q1().profile, 8);
  RunControls c;
  c.t_end = 1.0;
  c.dt_max = 1e-3;
  c.snapshot_every = 10;
  auto rec = evolve(big, EquationParams{1, -1.0}, c);
  auto rep = scattering_probe(rec);
  CHECK_FALSE(rep.fired);
  CHECK(rep.window_end <= rep.validity_end);
  bool seen = false;
  for (double eps : {1e-6, 1e-3, 1e-2, 0.1, 0.2, 1.0}) {
    ScatteringOptions o;
    o.epsilon = eps;
    const bool fired = scattering_probe(rec, o).fired;
    if (seen) CHECK(fired);
    seen = seen || fired;
  }
  CHECK(seen);
}

TEST_CASE("scattering probe needs snapshots in the window") {
  RunControls c;
  c.t_end = 0.01;
  c.dt_max = 1e-3;
  c.snapshot_every = 5;
  auto rec = evolve(gaussian(Geometry(make_grid(1, 64, 10.0))), EquationParams{1, 0.0}, c);
  CHECK_THROWS_AS(scattering_probe(rec), ValidationError);
}

TEST_CASE("validity horizon follows the group velocity") {
  const double L = 10.0;
  auto g = make_grid(1, 128, L);
  const double k = std::numbers::pi * 4 / L;
  auto u = sample(Geometry(g), [&](const std::array<double, 3>& x) { return std::polar(1.0, k * x[0]); });
  double xi = 0.0;
  const double t = validity_horizon(u, 1e-8, &xi);
  CHECK(xi == doctest::Approx(k).epsilon(1e-12));
  CHECK(t == doctest::Approx(L / (4.0 * k * k * k)).epsilon(1e-12));
}
