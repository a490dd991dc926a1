#include "stadloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Piece { RightArc, TopWall, LeftArc, BottomWall };

Piece piece_of(const StadiumShape& shape, double s) {
  const double e = shape.epsilon();
  if (s < 0.5 * kPi) return Piece::RightArc;
  if (s < 0.5 * kPi + e) return Piece::TopWall;
  if (s < 1.5 * kPi + e) return Piece::LeftArc;
  if (s < 1.5 * kPi + 2.0 * e) return Piece::BottomWall;
  return Piece::RightArc;
}

// Arclength of a point known to lie on the given piece.
double arclength_on(const StadiumShape& shape, Piece piece, const Vec2& r) {
  const double e = shape.epsilon();
  switch (piece) {
    case Piece::RightArc: {
      const double t = std::atan2(r.y(), r.x() - 0.5 * e);
      return t >= 0.0 ? t : shape.perimeter() + t;
    }
    case Piece::TopWall:
      return 0.5 * kPi + (0.5 * e - r.x());
    case Piece::LeftArc: {
      double t = std::atan2(r.y(), r.x() + 0.5 * e);
      if (t < 0.0) t += 2.0 * kPi;
      return t + e;
    }
    case Piece::BottomWall:
      return 1.5 * kPi + e + (r.x() + 0.5 * e);
  }
  return 0.0;
}

}  // namespace

StadiumShape::StadiumShape(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "stadium epsilon must be finite and >= 0");
  }
}

bool StadiumShape::contains(const Vec2& r) const {
  if (std::abs(r.y()) >= 1.0) return false;
  const double half = 0.5 * epsilon_;
  if (std::abs(r.x()) <= half) return true;
  const double cx = r.x() > 0.0 ? half : -half;
  return std::hypot(r.x() - cx, r.y()) < 1.0;
}

double wrap_arclength(const StadiumShape& shape, double s) {
  const double length = shape.perimeter();
  double w = std::fmod(s, length);
  if (w < 0.0) w += length;
  if (w >= length) w = 0.0;
  return w;
}

BoundaryPoint boundary_point(const StadiumShape& shape, double s) {
  const double e = shape.epsilon();
  BoundaryPoint b;
  b.s = wrap_arclength(shape, s);
  switch (piece_of(shape, b.s)) {
    case Piece::RightArc: {
      const double t = b.s < 0.5 * kPi ? b.s : b.s - 2.0 * e;
      b.normal = {std::cos(t), std::sin(t)};
      b.position = Vec2(0.5 * e, 0.0) + b.normal;
      b.curvature = 1.0;
      break;
    }
    case Piece::TopWall:
      b.position = {0.5 * e - (b.s - 0.5 * kPi), 1.0};
      b.normal = {0.0, 1.0};
      b.curvature = 0.0;
      break;
    case Piece::LeftArc: {
      const double t = b.s - e;
      b.normal = {std::cos(t), std::sin(t)};
      b.position = Vec2(-0.5 * e, 0.0) + b.normal;
      b.curvature = 1.0;
      break;
    }
    case Piece::BottomWall:
      b.position = {-0.5 * e + (b.s - 1.5 * kPi - e), -1.0};
      b.normal = {0.0, -1.0};
      b.curvature = 0.0;
      break;
  }
  return b;
}

PhasePoint bounce_map(const StadiumShape& shape, const PhasePoint& x) {
  if (!std::isfinite(x.s) || !std::isfinite(x.p)) {
    throw Error(ErrorCode::InvalidArgument, "non-finite phase point");
  }
  if (std::abs(x.p) >= 1.0 - kGrazingTolerance) {
    throw Error(ErrorCode::Grazing, "|p| too close to 1");
  }
  const double e = shape.epsilon();
  const double half = 0.5 * e;
  const BoundaryPoint start = boundary_point(shape, x.s);
  const Piece start_piece = piece_of(shape, start.s);
  const Vec2 r = start.position;
  const Vec2 v = x.p * tangent(start) - std::sqrt(1.0 - x.p * x.p) * start.normal;

  constexpr double kMinTravel = 1e-9;
  constexpr double kSlack = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  Piece hit = Piece::RightArc;

  auto consider = [&](double t, Piece piece) {
    if (t > kMinTravel && t < best) {
      best = t;
      hit = piece;
    }
  };

  // Straight walls y = +-1 for |x| <= epsilon/2.
  if (e > 0.0) {
    if (v.y() > 0.0 && start_piece != Piece::TopWall) {
      const double t = (1.0 - r.y()) / v.y();
      if (std::abs(r.x() + t * v.x()) <= half + kSlack) consider(t, Piece::TopWall);
    }
    if (v.y() < 0.0 && start_piece != Piece::BottomWall) {
      const double t = (-1.0 - r.y()) / v.y();
      if (std::abs(r.x() + t * v.x()) <= half + kSlack) consider(t, Piece::BottomWall);
    }
  }

  // Unit circles; only the outer halves belong to the boundary.
  auto circle = [&](double side, Piece piece) {
    const double cx = side * half;
    const Vec2 d = r - Vec2(cx, 0.0);
    const double bq = d.dot(v);
    const bool on_it = (start_piece == piece);
    const double c0 = on_it ? 0.0 : d.squaredNorm() - 1.0;
    const double disc = bq * bq - c0;
    if (disc < 0.0) return;
    const double root = std::sqrt(disc);
    for (const double t : {-bq - root, -bq + root}) {
      const double px = r.x() + t * v.x();
      const bool outer = side > 0.0 ? (px >= half - kSlack) : (px <= -half + kSlack);
      if (outer) consider(t, piece);
    }
  };
  circle(1.0, Piece::RightArc);
  circle(-1.0, Piece::LeftArc);

  if (!std::isfinite(best)) {
    throw Error(ErrorCode::NonConvergence, "no forward boundary intersection");
  }

  Vec2 end = r + best * v;
  // Snap onto the piece to keep round-off from accumulating off the boundary.
  switch (hit) {
    case Piece::TopWall: end.y() = 1.0; break;
    case Piece::BottomWall: end.y() = -1.0; break;
    case Piece::RightArc: {
      const Vec2 c(half, 0.0);
      end = c + (end - c).normalized();
      break;
    }
    case Piece::LeftArc: {
      const Vec2 c(-half, 0.0);
      end = c + (end - c).normalized();
      break;
    }
  }
  const BoundaryPoint b = boundary_point(shape, arclength_on(shape, hit, end));
  return {b.s, std::clamp(v.dot(tangent(b)), -1.0, 1.0)};
}

}  // namespace stadloc
