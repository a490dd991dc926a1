#pragma once

#include <vector>

#include "stadloc/eigensolver.hpp"

namespace stadloc {

/// Boundary-integral (Nystrom) oracle for the odd-odd Dirichlet spectrum. The
/// boundary equation u = K u with the normal derivative of the outgoing Green
/// function is discretized on Gauss-Legendre panels of the quarter boundary and
/// folded over the four mirror images.
struct BimOptions {
  /// Panel length in wavelengths.
  double panel_wavelengths = 2.0;
  /// Panels closer than this many panel lengths to a target node are
  /// integrated against the panel interpolant with graded quadrature.
  double near_panels = 1.0;
  /// Dyadic panel refinement toward the arc/wall junction.
  int junction_levels = 3;
  /// Scan step of the smallest singular value, in mean spacings.
  double scan_step_spacings = 0.05;
  /// A scan minimum is a level if its refined singular value is below this
  /// fraction of the neighbouring scan values.
  double accept_ratio = 0.05;
  /// Relative tolerance on k of the minimum search.
  double k_tolerance = 1e-12;
};

struct BimResult {
  SpectrumWindow spectrum;
  /// Smooth Weyl estimate of the number of levels in [k_lo, k_hi].
  double weyl_expected = 0.0;
  /// Set when the level count differs from weyl_expected by more than 2.
  bool missed_level_suspected = false;
};

/// Two smallest singular values of the weighted Nystrom matrix at k.
struct SingularPair {
  double first = 0.0;
  double second = 0.0;
};
SingularPair bim_singular_values(const StadiumShape& shape, double k, const BimOptions& opts = {});

/// Levels in [k_lo, k_hi] located as zeros of the smallest singular value.
/// An empty window yields an empty list.
BimResult bim_levels(const StadiumShape& shape, double k_lo, double k_hi,
                     const BimOptions& opts = {}, int jobs = 1);

/// Null vector at a level k, interpolated onto a uniform midpoint grid with
/// n_samples cells and normalized like the scaling-method boundary functions.
BoundaryFunction bim_boundary_function(const StadiumShape& shape, double k, std::size_t n_samples,
                                       const BimOptions& opts = {});

}  // namespace stadloc
