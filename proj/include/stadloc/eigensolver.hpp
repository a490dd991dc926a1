#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stadloc/geometry.hpp"

namespace stadloc {

enum class SolverMethod { Scaling, Bim, CircleOracle };

std::string_view to_string(SolverMethod m);
SolverMethod solver_method_from_string(std::string_view name);

/// Sorted odd-odd eigen-wavenumbers found in [k_lo, k_hi].
struct SpectrumWindow {
  double epsilon = 0.0;
  double k_lo = 0.0;
  double k_hi = 0.0;
  std::vector<double> levels;
  SolverMethod method = SolverMethod::Scaling;
  /// Index of the scaling window each level came from (empty for other methods).
  std::vector<int> window_id;
};

/// Normal derivative u(s) = n . grad psi on the quarter boundary, sampled on a
/// uniform midpoint grid. Normalized so that the interior norm of psi over the
/// quarter billiard is one (Rellich identity).
struct BoundaryFunction {
  double k = 0.0;
  std::vector<double> s;
  std::vector<double> u;
};

struct SolverOptions {
  /// Plane-wave count is ceil(basis_factor * k * L/4 / (2 pi)).
  double basis_factor = 3.0;
  /// Lower bound on the plane-wave count; matters only at small k.
  int min_basis = 24;
  /// Orders of the junction functions added for epsilon > 0 (empty: plane waves only).
  std::vector<int> junction_orders{2, 3, 4, 5, 6, 7, 8};
  /// Drop Gram directions below this fraction of the largest eigenvalue.
  double regularization = 1e-14;
  /// Boundary samples per wavelength stored in each BoundaryFunction.
  double samples_per_wavelength = 12.0;
  /// Panel length of the boundary quadrature, in wavelengths.
  double panel_wavelengths = 0.75;
  /// Dyadic panel refinement toward the arc/wall junction.
  int junction_levels = 10;
  /// Offsets (in k) of the re-centred scaling solves that polish each level.
  std::vector<double> refine_offsets{1e-3, 1e-4};
  /// Levels closer than this many mean spacings are merged.
  double dedupe_spacings = 1e-6;
  /// Window half-width used by solve_range, in mean spacings ...
  double half_width_spacings = 1.0;
  /// ... capped at this absolute value.
  double max_half_width = 0.25;
  /// Largest accepted half-width, in mean spacings.
  double max_half_width_spacings = 4.0;
  /// Levels whose boundary residual exceeds this are treated as spurious.
  double max_tension = 1e-4;
  /// Skip boundary functions (levels only).
  bool levels_only = false;
};

struct SolvedState {
  double k = 0.0;
  /// Boundary residual  \oint psi^2 ds / \int psi^2 dA  of the refined state.
  double tension = 0.0;
  int window_id = 0;
  BoundaryFunction boundary;
};

struct WindowSolution {
  SpectrumWindow spectrum;
  std::vector<SolvedState> states;
};

/// Scaling-method solve of all odd-odd levels in [k_center - half_width,
/// k_center + half_width].
WindowSolution solve_window(const StadiumShape& shape, double k_center, double half_width,
                            const SolverOptions& opts = {});

/// Stitches half-overlapping scaling windows over [k_lo, k_hi]. Windows run on
/// `jobs` worker threads; the result does not depend on the thread count.
WindowSolution solve_range(const StadiumShape& shape, double k_lo, double k_hi,
                           const SolverOptions& opts = {}, int jobs = 1);

/// Smooth level-counting function of the desymmetrized Dirichlet problem:
/// area and perimeter terms plus the corner/curvature constant.
double weyl_count(const StadiumShape& shape, double k);
/// Constant term of weyl_count: three right-angle corners and the arc curvature.
double weyl_constant(const StadiumShape& shape);
/// 1 / (dN/dk) of the smooth counting function.
double mean_spacing(const StadiumShape& shape, double k);

/// Interior wavefunction from the boundary function by the single-layer
/// representation, folded over the four mirror images.
/// Throws Error(PointOnBoundary) unless r is strictly inside the quarter stadium.
double wavefunction(const StadiumShape& shape, const BoundaryFunction& bf, const Vec2& r);

/// Expansion behind a scaling-method level: odd-odd plane waves
/// sin(k x cos t) sin(k y sin t) plus odd-odd images of the junction functions
/// of the given orders centred at `junction`.
struct ScalingState {
  double k = 0.0;
  std::vector<double> directions;
  std::vector<int> junction_orders;
  Vec2 junction = Vec2::Zero();
  std::vector<double> coefficients;

  double value(const Vec2& r) const;
  Vec2 gradient(const Vec2& r) const;
};

/// Refined scaling-method state nearest to k_guess.
ScalingState scaling_state(const StadiumShape& shape, double k_guess, const SolverOptions& opts = {});

}  // namespace stadloc
