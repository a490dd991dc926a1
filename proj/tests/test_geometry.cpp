#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/geometry.hpp"

using namespace stadloc;
constexpr double kPi = std::numbers::pi;

TEST_CASE("shape invariants") {
  const StadiumShape s(0.3);
  CHECK(s.perimeter() == doctest::Approx(2 * kPi + 0.6).epsilon(1e-15));
  CHECK(s.area() == doctest::Approx(kPi + 0.6).epsilon(1e-15));
  CHECK_THROWS_AS(StadiumShape(-0.1), Error);
}

TEST_CASE("boundary points") {
  const StadiumShape circle(0.0);
  const BoundaryPoint b0 = boundary_point(circle, 0.0);
  CHECK(b0.position.x() == doctest::Approx(1.0));
  CHECK(b0.position.y() == doctest::Approx(0.0));
  CHECK(b0.normal.x() == doctest::Approx(1.0));
  CHECK(b0.curvature == 1.0);

  const StadiumShape st(0.2);
  // middle of the top wall
  CHECK(boundary_point(st, 0.5 * kPi + 0.05).curvature == 0.0);
  const BoundaryPoint top = boundary_point(st, st.quarter_length());
  CHECK(top.position.x() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(top.position.y() == doctest::Approx(1.0));

  // Chord length along the parametrization reproduces the arclength of the quarter.
  double length = 0.0;
  const int n = 200000;
  Vec2 prev = boundary_point(st, 0.0).position;
  for (int i = 1; i <= n; ++i) {
    const Vec2 r = boundary_point(st, st.quarter_length() * i / n).position;
    length += (r - prev).norm();
    prev = r;
  }
  CHECK(length == doctest::Approx(st.quarter_length()).epsilon(1e-9));

  for (double s = 0.0; s < st.perimeter(); s += 0.037) {
    const BoundaryPoint b = boundary_point(st, s);
    CHECK(std::abs(b.normal.norm() - 1.0) < 1e-12);
  }
  CHECK(boundary_point(st, -0.1).position.isApprox(boundary_point(st, st.perimeter() - 0.1).position));
}

TEST_CASE("circle conserves |p|") {
  const StadiumShape circle(0.0);
  PhasePoint x{0.3, 0.42};
  for (int i = 0; i < 10000; ++i) x = bounce_map(circle, x);
  CHECK(std::abs(std::abs(x.p) - 0.42) < 1e-10);  // roundoff accumulated over 1e4 bounces
}

TEST_CASE("bouncing-ball orbit") {
  const StadiumShape st(0.4);
  const double s_wall = 0.5 * kPi + 0.1;  // top wall
  const PhasePoint y = bounce_map(st, {s_wall, 0.0});
  const BoundaryPoint b = boundary_point(st, y.s);
  CHECK(b.curvature == 0.0);
  CHECK(b.position.y() == doctest::Approx(-1.0));
  CHECK(std::abs(y.p) < 1e-12);
}

TEST_CASE("reversibility, area preservation and chords") {
  const StadiumShape st(0.25);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> us(0.0, st.perimeter()), up(-0.95, 0.95);
  for (int i = 0; i < 200; ++i) {
    const PhasePoint x{us(gen), up(gen)};
    const PhasePoint y = bounce_map(st, x);
    const PhasePoint back = time_reverse(bounce_map(st, time_reverse(y)));
    const double ds = std::remainder(back.s - x.s, st.perimeter());
    CHECK(std::abs(ds) < 1e-9);
    CHECK(std::abs(back.p - x.p) < 1e-9);

    const Vec2 mid = 0.5 * (boundary_point(st, x.s).position + boundary_point(st, y.s).position);
    CHECK(st.contains(mid));

    const double h = 1e-7;
    auto f = [&](double s, double p) { return bounce_map(st, {s, p}); };
    const PhasePoint sp = f(x.s + h, x.p), sm = f(x.s - h, x.p);
    const PhasePoint pp = f(x.s, x.p + h), pm = f(x.s, x.p - h);
    const double a = std::remainder(sp.s - sm.s, st.perimeter()) / (2 * h);
    const double b = std::remainder(pp.s - pm.s, st.perimeter()) / (2 * h);
    const double c = (sp.p - sm.p) / (2 * h);
    const double d = (pp.p - pm.p) / (2 * h);
    CHECK(std::abs(a * d - b * c - 1.0) < 1e-6);
  }
}

TEST_CASE("grazing rejected") {
  const StadiumShape st(0.1);
  CHECK_THROWS_AS(bounce_map(st, {0.1, 1.0}), Error);
  try {
    bounce_map(st, {0.1, -1.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Grazing);
  }
}
