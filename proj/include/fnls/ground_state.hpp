#pragma once

#include <array>
#include <vector>

#include "fnls/field.hpp"

namespace fnls {

struct PetviashviliControls {
  int max_iterations = 2000;
  /// Stop when ||Q_{k+1} - Q_k||_2 / ||Q_{k+1}||_2 falls to this value.
  double step_tolerance = 1e-12;
  /// Optional early stop on the relative elliptic residual (0 disables).
  double residual_target = 0.0;
  /// Seed widths tried in order (unit-mass Gaussians).
  std::vector<double> seed_widths{1.0, 0.5, 2.0};
  /// Allowed mass fraction in the outer tenth of the domain.
  double tail_tolerance = 1e-10;
};

/// Solution of Delta^2 Q + Q = |Q|^{8/n} Q with derived quantities.
struct GroundState {
  ComplexField profile;
  int n = 1;
  double mass_q = 0.0;
  double threshold_m_star = 0.0;
  /// ||Delta^2 Q + Q - |Q|^{8/n} Q||_2 / ||Q||_2.
  double residual = 0.0;
  /// ||Q - (Delta^2 + 1)^{-1} |Q|^{8/n} Q||_2 / ||Q||_2 (free of the
  /// roundoff amplification by the largest eigenvalue of Delta^2).
  double preconditioned_residual = 0.0;
  std::array<double, 2> pohozaev_residuals{};
  double gn_ratio_at_q = 0.0;
  int iterations = 0;
  double seed_width = 0.0;
  double tail_mass = 0.0;
  /// Petviashvili factors gamma_k, one per iteration.
  std::vector<double> gamma_history;

  explicit GroundState(ComplexField q) : profile(std::move(q)) {}
};

/// Petviashvili iteration Q <- gamma^theta (Delta^2 + 1)^{-1}(|Q|^{8/n} Q),
/// gamma = <(Delta^2+1)Q, Q> / <|Q|^{8/n}Q, Q>, theta = (1 + 8/n)/(8/n).
/// Throws NumericalError on non-convergence, collapse to zero, oscillation,
/// or an unresolved tail, after every seed width has been tried.
GroundState solve_ground_state(int n, const Geometry& geometry, const PetviashviliControls& controls = {});

/// Relative defects of the two integral identities of the elliptic equation,
/// with A = ||Delta Q||^2, B = ||Q||^2, C = int |Q|^{2(n+4)/n}:
///   multiplier Q:         A + B = C
///   multiplier x.grad Q:  (4 - n) A - n B + n^2/(n+4) C = 0
/// Throws ValidationError for the zero field.
std::array<double, 2> pohozaev_check(const ComplexField& q);
std::array<double, 2> pohozaev_check(const GroundState& gs);

/// ||Delta^2 Q + Q - |Q|^{8/n} Q||_2 / ||Q||_2.
double elliptic_residual(const ComplexField& q);

/// int |f|^{2(n+4)/n} / ( ((n+4)/n) (M(f)/M(Q))^{4/n} ||Delta f||^2 ); the
/// sharp Gagliardo-Nirenberg inequality says this is <= 1.
double gn_ratio(const ComplexField& f, double mass_q, int n);

struct MassThresholds {
  double mass_q = 0.0;
  double m_star = 0.0;
};

/// M* = (1/4)^{n/8} M(Q).
double m_star_formula(double mass_q, int n);
MassThresholds mass_thresholds(const GroundState& gs);

}  // namespace fnls
