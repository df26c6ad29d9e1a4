#pragma once

#include <array>
#include <vector>

#include "fnls/field.hpp"

namespace fnls {

struct TrajectoryRecord;

/// Conserved functionals of one state.
struct ConservedSnapshot {
  double t = 0.0;
  double mass = 0.0;
  /// Im int u grad(conj u); all zeros on radial grids.
  std::vector<double> momentum;
  double energy = 0.0;
  bool radial = false;
  /// Natural magnitudes used as drift floors when a quantity is ~0:
  /// sqrt(M) ||grad u|| for momentum, kinetic + |potential| for energy.
  double momentum_scale = 0.0;
  double energy_scale = 0.0;
};

double mass(const ComplexField& u);

/// Im int u grad(conj u), spectrally. Radial fields give zeros and set
/// *radial_flag when provided.
std::vector<double> momentum(const ComplexField& u, bool* radial_flag = nullptr);

/// 1/2 ||Delta u||^2 + n lambda / (2(n+4)) int |u|^{2(n+4)/n}.
double energy(const ComplexField& u, double lambda);

/// All conserved quantities from one transform.
ConservedSnapshot conserved_snapshot(const ComplexField& u, double lambda, double t);

struct DriftReport {
  double mass = 0.0;
  double momentum = 0.0;
  double energy = 0.0;
};

/// max_t |Q(t) - Q(0)| / max(|Q(0)|, floor), where the floor is
/// relative_floor times the quantity's natural scale at t = 0 (the mass is
/// its own scale). Throws ValidationError with fewer than two snapshots.
DriftReport drift_report(const std::vector<ConservedSnapshot>& series, double relative_floor = 1e-12);
DriftReport drift_report(const TrajectoryRecord& record, double relative_floor = 1e-12);

/// P_u(X) = 2E(e^{iX d.x}u) = c0 + c1 X + c2 X^2 + c3 X^3 + c4 X^4 with
///   c0 = 2E(u), c1 = -4 C1, c2 = C2, c3 = -4 m, c4 = M(u),
///   C1 = Im int Delta(conj u) d.grad u,  C2 = 2||grad u||^2 + 4||d.grad u||^2,
///   m = d . Mom(u).
struct BoostPolynomial {
  std::array<double, 5> c{};
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  double c1_integral = 0.0;  ///< C1
  double c2_integral = 0.0;  ///< C2
  double directional_momentum = 0.0;

  double operator()(double x) const {
    return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4])));
  }
};

/// Full grids only.
BoostPolynomial boost_polynomial(const ComplexField& u, double lambda,
                                 const std::array<double, 3>& direction = {1.0, 0.0, 0.0});

/// Sharp GN factor kappa = (M(u)/M(Q))^{4/n}.
double gn_kappa(double mass_u, double mass_q, int n);

/// kappa P_u(X) - (1 - kappa)(||Delta u||^2 - 2E(u)); nonnegative for
/// focusing fields with M(u) < M(Q).
double boost_inequality_defect(const BoostPolynomial& p, double x, double kappa,
                               double h2_squared, double energy_u);

}  // namespace fnls
