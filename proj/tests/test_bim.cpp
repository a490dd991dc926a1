#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "stadloc/bim.hpp"
#include "stadloc/error.hpp"

using namespace stadloc;

TEST_CASE("circle: singular-value dip at the first Bessel zero") {
  const StadiumShape circle(0.0);
  const double j21 = oracle::bessel_zeros(2, 6.0).front();
  const BimResult r = bim_levels(circle, 4.8, 5.5);
  REQUIRE(r.spectrum.levels.size() == 1);
  CHECK(std::abs(r.spectrum.levels[0] - j21) < 1e-9 * j21);
  CHECK(bim_singular_values(circle, j21).first < 1e-3 * bim_singular_values(circle, j21 + 0.2).first);
}

TEST_CASE("empty window gives an empty list") {
  const BimResult r = bim_levels(StadiumShape(0.0), 5.3, 7.0);
  CHECK(r.spectrum.levels.empty());
  CHECK_THROWS_AS(bim_levels(StadiumShape(0.0), 7.0, 5.0), Error);
}

TEST_CASE("scaling method and boundary-integral oracle agree") {
  const StadiumShape st(0.2);
  const double lo = 30.0, hi = 31.5;
  const BimResult bim = bim_levels(st, lo, hi);
  const WindowSolution sc = solve_range(st, lo, hi);
  REQUIRE(bim.spectrum.levels.size() == sc.spectrum.levels.size());
  const double spacing = mean_spacing(st, 0.5 * (lo + hi));
  for (std::size_t i = 0; i < bim.spectrum.levels.size(); ++i) {
    CHECK(std::abs(bim.spectrum.levels[i] - sc.spectrum.levels[i]) < 1e-5 * spacing);
  }
  CHECK_FALSE(bim.missed_level_suspected);

  // Boundary functions agree up to sign on the common grid.
  for (const auto& state : sc.states) {
    const BoundaryFunction b = bim_boundary_function(st, state.k, state.boundary.s.size());
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < b.u.size(); ++i) {
      dot += b.u[i] * state.boundary.u[i];
      na += b.u[i] * b.u[i];
      nb += state.boundary.u[i] * state.boundary.u[i];
    }
    CHECK(std::abs(dot) / std::sqrt(na * nb) >= 0.999);
  }
}

TEST_CASE("reconstructed wavefunction vanishes on the boundary") {
  const StadiumShape st(0.2);
  const BimResult r = bim_levels(st, 30.0, 30.6);
  REQUIRE(!r.spectrum.levels.empty());
  const double k = r.spectrum.levels.front();
  const BoundaryFunction bf = bim_boundary_function(st, k, 20000);
  double peak = 0.0;
  for (double x = 0.05; x < 1.0; x += 0.09) {
    for (double y = 0.05; y < 0.9; y += 0.09) {
      const Vec2 p(x, y);
      if (st.contains(p) && (p - Vec2(0.1, 0.0)).norm() < 0.85) peak = std::max(peak, std::abs(wavefunction(st, bf, p)));
    }
  }
  REQUIRE(peak > 0.0);
  // psi(r_b - d n) = -d u (1 + kappa d / 2) + O(d^3) when psi(r_b) = 0.
  const double d = 1e-3;
  const double h = st.quarter_length() / static_cast<double>(bf.s.size());
  for (double s = 0.2; s < st.quarter_length() - 0.2; s += 0.137) {
    const BoundaryPoint b = boundary_point(st, s);
    const auto i = static_cast<std::size_t>(s / h);
    const double t = s / h - (static_cast<double>(i) + 0.5);
    const double u = bf.u[i] + t * (bf.u[i + 1] - bf.u[i]);
    const double psi = wavefunction(st, bf, b.position - d * b.normal);
    const double boundary_value = psi + d * u * (1.0 + 0.5 * b.curvature * d);
    CHECK(std::abs(boundary_value) < 1e-4 * peak);
  }
}
