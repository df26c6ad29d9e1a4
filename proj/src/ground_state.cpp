#include "fnls/ground_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fnls/conserved.hpp"
#include "fnls/error.hpp"

namespace fnls {

namespace {

/// Applies (Delta^2 + 1)^s, s in {+1, -1}, and evaluates <(Delta^2+1)u, u>.
class ShiftedBiharmonic {
 public:
  explicit ShiftedBiharmonic(const Geometry& g) : geom_(g) {}

  ComplexField apply(const ComplexField& u, bool inverse) const {
    if (geom_.is_full()) {
      const auto& grid = geom_.full();
      CVector c(u.values().begin(), u.values().end());
      grid.dft_forward(c.data());
      const auto& xi4 = grid.xi4();
      for (std::size_t k = 0; k < c.size(); ++k) c[k] *= inverse ? 1.0 / (xi4[k] + 1.0) : (xi4[k] + 1.0);
      grid.dft_backward(c.data());
      return ComplexField(geom_, std::move(c));
    }
    const auto& rg = geom_.radial();
    Eigen::MatrixX2d c = rg.to_eigenbasis(u.values());
    const auto& mu = rg.biharmonic_eigenvalues();
    for (Eigen::Index j = 0; j < c.rows(); ++j) c.row(j) *= inverse ? 1.0 / (mu[j] + 1.0) : (mu[j] + 1.0);
    ComplexField out(geom_);
    rg.from_eigenbasis(c, out.values());
    return out;
  }

  double quadratic_form(const ComplexField& u) const {
    if (geom_.is_full()) {
      const auto& grid = geom_.full();
      CVector c(u.values().begin(), u.values().end());
      grid.dft_forward(c.data());
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) s += (grid.xi4()[k] + 1.0) * std::norm(c[k]);
      return s * grid.cell_volume() / static_cast<double>(grid.size());
    }
    const auto& rg = geom_.radial();
    Eigen::MatrixX2d c = rg.to_eigenbasis(u.values());
    const auto& mu = rg.biharmonic_eigenvalues();
    double s = 0.0;
    for (Eigen::Index j = 0; j < c.rows(); ++j) s += (mu[j] + 1.0) * c.row(j).squaredNorm();
    return s;
  }

 private:
  Geometry geom_;
};

ComplexField power_term(const ComplexField& q, int n) { return nonlinearity(q, 1.0, n, false); }

double relative_distance(const ComplexField& a, const ComplexField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = quadrature_weight(a.geometry(), i);
    num += w * std::norm(a[i] - b[i]);
    den += w * std::norm(a[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : INFINITY;
}

double tail_fraction(const ComplexField& q) {
  const auto& g = q.geometry();
  double out = 0.0, total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double m = quadrature_weight(g, i) * std::norm(q[i]);
    total += m;
    double r;
    if (g.is_full()) {
      auto x = g.full().position(i);
      r = 0.0;
      for (int a = 0; a < g.dim(); ++a) r = std::max(r, std::abs(x[a]));
    } else {
      r = g.radial().nodes()[static_cast<Eigen::Index>(i)];
    }
    if (r > 0.9 * g.extent()) out += m;
  }
  return total > 0.0 ? out / total : 0.0;
}

struct Attempt {
  bool ok = false;
  std::string failure;
};

}  // namespace

double elliptic_residual(const ComplexField& q) {
  const int n = q.geometry().dim();
  ComplexField b = bilaplacian(q);
  ComplexField r(q.geometry());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = b[i] + q[i] - critical_power(std::abs(q[i]), n) * q[i];
  return lp_norm(r, 2.0) / lp_norm(q, 2.0);
}

std::array<double, 2> pohozaev_check(const ComplexField& q) {
  const int n = q.geometry().dim();
  const double a = std::pow(sobolev_seminorm(q, 2.0), 2);
  const double b = mass(q);
  const double c = lp_integral(q, 2.0 * (n + 4) / n);
  if (b == 0.0 || c == 0.0) throw ValidationError("Pohozaev residuals are undefined (0/0) for the zero field");
  const double k = static_cast<double>(n) * n / (n + 4.0);
  const double first = std::abs(a + b - c) / c;
  const double second = std::abs((4.0 - n) * a - n * b + k * c) / (std::abs(4.0 - n) * a + n * b + k * c);
  return {first, second};
}

std::array<double, 2> pohozaev_check(const GroundState& gs) { return pohozaev_check(gs.profile); }

double gn_ratio(const ComplexField& f, double mass_q, int n) {
  const double m = mass(f);
  if (m == 0.0) throw ValidationError("Gagliardo-Nirenberg ratio undefined for the zero field");
  if (!(mass_q > 0.0)) throw ValidationError("ground-state mass must be positive");
  const double lap2 = std::pow(sobolev_seminorm(f, 2.0), 2);
  const double c = lp_integral(f, 2.0 * (n + 4) / n);
  return c / ((n + 4.0) / n * std::pow(m / mass_q, 4.0 / n) * lap2);
}

double m_star_formula(double mass_q, int n) { return std::pow(0.25, n / 8.0) * mass_q; }

MassThresholds mass_thresholds(const GroundState& gs) {
  return {gs.mass_q, m_star_formula(gs.mass_q, gs.n)};
}

GroundState solve_ground_state(int n, const Geometry& geometry, const PetviashviliControls& controls) {
  if (geometry.dim() != n) throw ValidationError("ground state dimension does not match the geometry");
  if (controls.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (controls.seed_widths.empty()) throw ValidationError("at least one seed width is required");
  const double p = 8.0 / n;
  const double theta = (1.0 + p) / p;
  ShiftedBiharmonic op(geometry);
  std::string failures;

  for (double width : controls.seed_widths) {
    const double amp = std::pow(std::numbers::pi * width * width, -0.25 * n);
    ComplexField q = sample(geometry, [&](const std::array<double, 3>& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return cplx(amp * std::exp(-0.5 * r2 / (width * width)), 0.0);
    });
    const double norm0 = lp_norm(q, 2.0);
    std::vector<double> gammas, dists;
    std::string failure;
    bool converged = false;
    int it = 0;
    for (; it < controls.max_iterations; ++it) {
      ComplexField nl = power_term(q, n);
      const double num = op.quadratic_form(q);
      const double den = std::real(inner_product(nl, q));
      if (!(den > 0.0) || !std::isfinite(num)) {
        failure = "collapse to zero";
        break;
      }
      const double gamma = num / den;
      gammas.push_back(gamma);
      ComplexField next = op.apply(nl, true);
      const double factor = std::pow(gamma, theta);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = cplx(factor * next[i].real(), 0.0);
      if (!next.is_finite()) {
        failure = "non-finite iterate";
        break;
      }
      if (lp_norm(next, 2.0) < 1e-12 * norm0) {
        failure = "collapse to zero";
        break;
      }
      const double d = relative_distance(next, q);
      dists.push_back(d);
      q = std::move(next);
      if (d <= controls.step_tolerance) {
        converged = true;
        ++it;
        break;
      }
      if (controls.residual_target > 0.0 && elliptic_residual(q) <= controls.residual_target) {
        converged = true;
        ++it;
        break;
      }
      // Oscillation: no progress over a long stretch far from convergence.
      if (dists.size() > 300) {
        const double recent = dists.back();
        const double earlier = dists[dists.size() - 150];
        if (recent > 1e-6 && recent >= 0.5 * earlier) {
          failure = "oscillation detected";
          break;
        }
      }
    }
    if (!converged && failure.empty()) {
      // Accept a roundoff plateau just above the tolerance.
      const std::size_t k = dists.size();
      if (k > 20 && dists.back() < 1e-10) {
        converged = true;
      } else {
        failure = "no convergence after " + std::to_string(controls.max_iterations) + " iterations";
      }
    }
    if (!converged) {
      failures += " [width " + std::to_string(width) + ": " + failure + "]";
      continue;
    }

    GroundState gs(std::move(q));
    gs.n = n;
    gs.iterations = it;
    gs.seed_width = width;
    gs.gamma_history = std::move(gammas);
    gs.mass_q = mass(gs.profile);
    gs.threshold_m_star = m_star_formula(gs.mass_q, n);
    gs.residual = elliptic_residual(gs.profile);
    {
      ComplexField pre = op.apply(power_term(gs.profile, n), true);
      gs.preconditioned_residual = relative_distance(gs.profile, pre);
    }
    gs.pohozaev_residuals = pohozaev_check(gs.profile);
    gs.gn_ratio_at_q = gn_ratio(gs.profile, gs.mass_q, n);
    gs.tail_mass = tail_fraction(gs.profile);
    if (gs.tail_mass > controls.tail_tolerance) {
      failures += " [width " + std::to_string(width) + ": tail mass " + std::to_string(gs.tail_mass) +
                  " exceeds tolerance; enlarge the domain]";
      continue;
    }
    return gs;
  }
  throw NumericalError("ground state solve failed:" + failures);
}

}  // namespace fnls
