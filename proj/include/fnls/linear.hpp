#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnls/field.hpp"

namespace fnls {

/// e^{it Delta^2} u: spectrum times e^{it|xi|^4} on full grids, eigenbasis
/// coefficients times e^{it mu_j} on radial grids.
ComplexField propagate_linear(const ComplexField& u, double t);

/// In-place e^{it|xi|^4} on a DFT-ordered spectrum.
void propagate_spectrum(CVector& spectrum, const SpectralGrid& grid, double t);

/// Least-squares line through (log t, log sup) restricted to a window.
struct DecayFit {
  std::vector<double> times;
  std::vector<double> sup_norms;
  /// Relative sup-norm difference against the same flow on a box of twice
  /// the width (same spacing): the wraparound contamination per sample.
  std::vector<double> box_contamination;
  double fitted_slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;
  std::size_t samples_in_window = 0;
  bool valid = false;
  std::string note;
};

struct DecayOptions {
  double window_min = 0.0;       ///< inclusive fit window in t
  double window_max = 1e300;
  /// Largest allowed box contamination inside the window.
  double wraparound_tolerance = 1e-2;
  /// Compare against a doubled box; when false no contamination is measured.
  bool box_check = true;
  /// Optional per-sample weights for the fit (defaults to 1).
  std::vector<double> weights;
};

/// Slope fit of log ||e^{it Delta^2}u0||_inf against log t (expected -n/4).
/// Throws ValidationError with fewer than two samples in the window.
DecayFit decay_probe(const ComplexField& initial, const std::vector<double>& t_grid,
                     const DecayOptions& options);

/// Near-delta initial state centred at the origin: a Gaussian of standard
/// width `cells` grid spacings normalised to unit integral, or the discrete
/// delta 1/dV at the centre node when cells <= 0.
ComplexField near_delta(const GridPtr& grid, double cells);

/// decay_probe applied to P_N of the near-delta state (expected -n/2 once
/// N^4 t >> 1).
DecayFit band_decay_probe(const GridPtr& grid, double n_level, const std::vector<double>& t_grid,
                          const DecayOptions& options, double near_delta_cells = 4.0);

/// Zero-pads a full-grid field into a box `factor` times wider with the same
/// spacing (factor a power of two).
ComplexField embed_in_larger_box(const ComplexField& u, int factor);

/// Log-spaced sample times.
std::vector<double> log_spaced(double t_min, double t_max, std::size_t count);

struct StrichartzOptions {
  /// Time nodes for composite Simpson on [0, T] (odd, >= 3).
  int time_nodes = 65;
};

struct StrichartzRatio {
  double ratio = 0.0;
  double numerator = 0.0;       ///< ||e^{it Delta^2}u0||_Z
  double mass_factor = 0.0;     ///< ||u0||_2^{n/(n+4)}
  double best_band = 0.0;       ///< sup_N ||P_N e^{it Delta^2}u0||_Z
  double best_level = 0.0;      ///< the N attaining it
};

/// ||e^{it Delta^2}u0||_Z / (||u0||_2^{n/(n+4)} (sup_N ||P_N e^{it Delta^2}u0||_Z)^{4/(n+4)})
/// with the Z norm L^{2(n+4)/n} over [0,T] x box. Full grids with n in {1,2}.
StrichartzRatio refined_strichartz_ratio(const ComplexField& initial, double horizon,
                                         const StrichartzOptions& options = {});

/// Composite Simpson weights for `nodes` equally spaced points over an
/// interval of length `length` (odd node count; an even count switches the
/// last three intervals to the 3/8 rule).
std::vector<double> simpson_weights(std::size_t nodes, double length);

}  // namespace fnls
