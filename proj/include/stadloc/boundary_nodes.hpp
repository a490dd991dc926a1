#pragma once

#include <utility>
#include <vector>

#include "stadloc/geometry.hpp"

namespace stadloc {

/// Quadrature nodes on the first-quadrant boundary s in [0, L/4].
struct BoundaryNodes {
  std::vector<double> s;
  std::vector<double> weight;
  std::vector<Vec2> position;
  std::vector<Vec2> normal;
  std::vector<double> curvature;
  /// Arclength bounds of each 16-node panel (quarter_panels only).
  std::vector<std::pair<double, double>> panels;

  std::size_t size() const noexcept { return s.size(); }
  void push(const StadiumShape& shape, double arclength, double w);
};

inline constexpr std::size_t kPanelOrder = 16;

/// Composite 16-point Gauss-Legendre panels no longer than max_panel. Panels
/// break at the arc/wall junction; the two panels touching it are split
/// dyadically junction_levels times.
BoundaryNodes quarter_panels(const StadiumShape& shape, double max_panel, int junction_levels = 0);

/// Uniform midpoint grid of n cells over [0, L/4].
BoundaryNodes quarter_midpoints(const StadiumShape& shape, std::size_t n);

}  // namespace stadloc
