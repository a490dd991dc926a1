#include <cmath>

#include "doctest.h"
#include "stadloc/junction_basis.hpp"

using namespace stadloc;

TEST_CASE("order derivative matches finite differences in nu") {
  for (int n : {0, 1, 2, 5, 8}) {
    for (double x : {0.3, 1.7, 4.0, 9.5, 25.0, 80.0}) {
      const double h = 1e-5;
      // one-sided at n = 0, negative non-integer orders are outside the domain
      const double fd = n == 0 ? (-3 * std::cyl_bessel_j(0.0, x) + 4 * std::cyl_bessel_j(h, x) - std::cyl_bessel_j(2 * h, x)) / (2 * h)
                               : (std::cyl_bessel_j(n + h, x) - std::cyl_bessel_j(n - h, x)) / (2 * h);
      const double got = bessel_j_order_derivative(n, x);
      CHECK(std::abs(got - fd) < 1e-8 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("series and closed form agree at the switch point") {
  for (int n : {2, 4, 7}) {
    const double x = 2.0 + n;
    const double lo = bessel_j_order_derivative(n, x * (1 - 1e-12));
    const double hi = bessel_j_order_derivative(n, x * (1 + 1e-12));
    CHECK(std::abs(lo - hi) < 1e-11 * (1 + std::abs(lo)));
  }
}

TEST_CASE("junction functions solve Helmholtz and vanish on the wall") {
  JunctionFunction jf;
  jf.center = Vec2(0.05, 1.0);
  const std::vector<int> orders{2, 3, 5};
  const double k = 12.0;
  double v[3], vx[3], vm[3], vy[3], vn[3], v0[3];
  Vec2 g[3], gx[3];
  const Vec2 r(-0.2, 0.7);
  const double h = 1e-4;
  jf.evaluate(k, r, orders, v0, g);
  jf.evaluate(k, r + Vec2(h, 0), orders, vx, gx);
  jf.evaluate(k, r - Vec2(h, 0), orders, vm, gx);
  jf.evaluate(k, r + Vec2(0, h), orders, vy, gx);
  jf.evaluate(k, r - Vec2(0, h), orders, vn, gx);
  for (int i = 0; i < 3; ++i) {
    const double lap = (vx[i] + vm[i] + vy[i] + vn[i] - 4 * v0[i]) / (h * h);
    CHECK(std::abs(lap + k * k * v0[i]) < 1e-4 * k * k * (1 + std::abs(v0[i])));
    CHECK(g[i].x() == doctest::Approx((vx[i] - vm[i]) / (2 * h)).epsilon(1e-6));
    CHECK(g[i].y() == doctest::Approx((vy[i] - vn[i]) / (2 * h)).epsilon(1e-6));
  }
  // Along the straight side phi = 0: sin(n phi) = 0 and phi J_n cos = 0.
  jf.evaluate(k, jf.center + 0.3 * jf.wall, orders, v, g);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(v[i]) < 1e-14);
}
