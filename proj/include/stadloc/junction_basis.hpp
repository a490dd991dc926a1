#pragma once

#include <vector>

#include "stadloc/geometry.hpp"

namespace stadloc {

/// d/dnu J_nu(x) at integer order n >= 0, x > 0.
double bessel_j_order_derivative(int n, double x);

/// Helmholtz solutions that carry the non-analytic part of an eigenfunction at
/// a point where the boundary curvature jumps:
///   W_n = d/dnu [ J_nu(k rho) sin(nu phi) ] at nu = n,
/// in polar coordinates around `center` with phi = 0 along `wall` (unit vector
/// pointing along the straight side), phi = pi along the opposite tangent and
/// the branch cut pointing out of the billiard. W_n vanishes on the straight
/// side and grows like rho^n log rho.
struct JunctionFunction {
  Vec2 center = Vec2::Zero();
  Vec2 wall = Vec2(-1.0, 0.0);
  Vec2 inward = Vec2(0.0, -1.0);

  /// Values and gradients of W_n, n = orders..., at r for wavenumber k.
  void evaluate(double k, const Vec2& r, const std::vector<int>& orders, double* value,
                Vec2* gradient) const;
};

}  // namespace stadloc
