#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "stadloc/eigensolver.hpp"
#include "stadloc/error.hpp"

using namespace stadloc;
constexpr double kPi = std::numbers::pi;

TEST_CASE("circle levels are zeros of even-order Bessel functions") {
  const auto exact = oracle::quarter_disc_levels(30.0);
  REQUIRE(exact.front() == doctest::Approx(5.1356223018).epsilon(1e-10));
  const WindowSolution sol = solve_range(StadiumShape(0.0), 5.0, 30.0, {}, 1);
  REQUIRE(sol.spectrum.levels.size() == exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    CHECK(std::abs(sol.spectrum.levels[i] - exact[i]) < 1e-6 * exact[i]);
  }
  for (const auto& st : sol.states) CHECK(st.tension < 1e-6);
}

TEST_CASE("lowest circle state matches J_2(kr) sin(2 theta)") {
  const StadiumShape circle(0.0);
  const WindowSolution sol = solve_window(circle, 5.2, 0.2);
  REQUIRE(sol.states.size() == 1);
  const BoundaryFunction& bf = sol.states[0].boundary;
  const double k = bf.k;
  const double norm = std::sqrt(kPi / 8.0) * std::abs(std::cyl_bessel_j(3.0, k));
  double sign = 0.0;
  for (double r : {0.2, 0.5, 0.8}) {
    for (double th : {0.3, 0.8, 1.2}) {
      const Vec2 p(r * std::cos(th), r * std::sin(th));
      const double exact = std::cyl_bessel_j(2.0, k * r) * std::sin(2 * th) / norm;
      const double got = wavefunction(circle, bf, p);
      if (sign == 0.0) sign = got * exact > 0 ? 1.0 : -1.0;
      CHECK(std::abs(sign * got - exact) < 1e-4 * std::abs(exact) + 1e-6);
    }
  }
  CHECK_THROWS_AS(wavefunction(circle, bf, Vec2(1.0, 0.0)), Error);
  CHECK_THROWS_AS(wavefunction(circle, bf, Vec2(0.5, 0.0)), Error);
}

TEST_CASE("boundary functions are sampled densely and oscillate as expected") {
  const StadiumShape st(0.2);
  const WindowSolution sol = solve_window(st, 40.0, 0.15);
  REQUIRE(!sol.states.empty());
  for (const auto& s : sol.states) {
    const BoundaryFunction& bf = s.boundary;
    CHECK(static_cast<double>(bf.s.size()) >= 12.0 * bf.k * st.quarter_length() / (2 * kPi));
    int changes = 0;
    for (std::size_t i = 1; i < bf.u.size(); ++i) changes += (bf.u[i] > 0) != (bf.u[i - 1] > 0);
    const double expect = bf.k * st.quarter_length() / kPi;
    CHECK(changes > 0.5 * expect);
    CHECK(changes < 2.0 * expect);
    CHECK(s.tension < 1e-6);
  }
}

TEST_CASE("Weyl counting function") {
  const StadiumShape st(0.1);
  const double Aq = (kPi + 0.2) / 4.0;
  CHECK(st.quarter_area() == doctest::Approx(Aq));
  CHECK(Aq == doctest::Approx(0.8354).epsilon(1e-4));
  const double Pq = st.quarter_perimeter();
  const double dN = Aq / (4 * kPi) * (150.0 * 150.0 - 50.0 * 50.0) - Pq / (4 * kPi) * 100.0;
  CHECK(weyl_count(st, 150.0) - weyl_count(st, 50.0) == doctest::Approx(dN).epsilon(1e-12));
  CHECK(std::abs(weyl_count(st, 0.0)) <= 1.0);
  for (double k = Pq / (2 * Aq) + 0.1; k < 200; k += 1.0) CHECK(weyl_count(st, k + 1) > weyl_count(st, k));
  CHECK(mean_spacing(st, 100.0) == doctest::Approx(1.0 / (Aq / (2 * kPi) * 100.0 - Pq / (4 * kPi))));
}

TEST_CASE("solve_range does not depend on the worker count") {
  const StadiumShape st(0.3);
  SolverOptions opts;
  opts.levels_only = true;
  const auto a = solve_range(st, 30.0, 32.0, opts, 1);
  const auto b = solve_range(st, 30.0, 32.0, opts, 2);
  CHECK(a.spectrum.levels == b.spectrum.levels);
  const double expected = weyl_count(st, 32.0) - weyl_count(st, 30.0);
  CHECK(std::abs(static_cast<double>(a.spectrum.levels.size()) - expected) <= 3.0);
}

TEST_CASE("window checks") {
  const StadiumShape st(0.1);
  CHECK_THROWS_AS(solve_window(st, 50.0, 5.0), Error);
  CHECK_THROWS_AS(solve_window(st, 50.0, -1.0), Error);
}
