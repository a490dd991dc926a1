#pragma once

#include <Eigen/Core>
#include <numbers>

namespace stadloc {

using Vec2 = Eigen::Vector2d;

/// Bunimovich stadium: two unit semicircles joined by straight walls of
/// length epsilon. Semicircle centres sit at (+-epsilon/2, 0).
///
/// Arclength runs counterclockwise from s = 0 at (1 + epsilon/2, 0), the
/// rightmost point. The first quadrant boundary [0, L/4] is the upper half of
/// the right arc followed by half of the top wall, ending at (0, 1).
class StadiumShape {
 public:
  explicit StadiumShape(double epsilon);

  double epsilon() const noexcept { return epsilon_; }
  double perimeter() const noexcept { return 2.0 * std::numbers::pi + 2.0 * epsilon_; }
  double area() const noexcept { return std::numbers::pi + 2.0 * epsilon_; }

  // Desymmetrized (quarter) billiard used for the odd-odd class.
  double quarter_length() const noexcept { return 0.25 * perimeter(); }
  double quarter_area() const noexcept { return 0.25 * area(); }
  /// Full quarter-domain perimeter including both symmetry axes.
  double quarter_perimeter() const noexcept { return quarter_length() + 2.0 + 0.5 * epsilon_; }

  /// Arclength of the arc/wall junction inside the first quadrant.
  double junction() const noexcept { return 0.5 * std::numbers::pi; }

  /// True for points strictly inside the billiard.
  bool contains(const Vec2& r) const;

 private:
  double epsilon_;
};

struct PhasePoint {
  double s = 0.0;  ///< arclength in [0, L)
  double p = 0.0;  ///< sine of the reflection angle, tangential momentum
};

struct BoundaryPoint {
  double s = 0.0;
  Vec2 position = Vec2::Zero();
  Vec2 normal = Vec2::Zero();  ///< unit outward normal
  double curvature = 0.0;
};

/// Wraps s into [0, L).
double wrap_arclength(const StadiumShape& shape, double s);

BoundaryPoint boundary_point(const StadiumShape& shape, double s);

/// Counterclockwise unit tangent at a boundary point.
inline Vec2 tangent(const BoundaryPoint& b) { return {-b.normal.y(), b.normal.x()}; }

/// Grazing trajectories closer than this to |p| = 1 are rejected.
inline constexpr double kGrazingTolerance = 1e-12;

/// One collision of the billiard map in Poincare-Birkhoff coordinates.
/// Throws Error(Grazing) for |p| >= 1 - kGrazingTolerance and
/// Error(NonConvergence) if no forward intersection is found.
PhasePoint bounce_map(const StadiumShape& shape, const PhasePoint& x);

/// Time reversal (s, p) -> (s, -p). The map satisfies R T R T = id.
inline PhasePoint time_reverse(const PhasePoint& x) { return {x.s, -x.p}; }

}  // namespace stadloc
