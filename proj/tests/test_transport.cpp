#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/transport.hpp"

using namespace stadloc;

namespace {

DiffusionCurve synthetic(double nt, std::size_t n_max) {
  DiffusionCurve c;
  c.epsilon = 0.1;
  for (std::size_t n = 0; n <= n_max; ++n) {
    c.n.push_back(n);
    c.var_p.push_back(kSaturatedVariance * (1.0 - std::exp(-static_cast<double>(n) / nt)));
  }
  return c;
}

}  // namespace

TEST_CASE("exponential model recovers its own N_T") {
  const DiffusionCurve c = synthetic(200.0, 3000);
  const TransportEstimate e = estimate_NT(c, TransportCriterion::ExpModel);
  CHECK(std::abs(e.N_T - 200.0) < 1.0);
  CHECK(e.fit_residual < 1e-8);
  CHECK(estimate_NT(c, TransportCriterion::F50).N_T == doctest::Approx(200.0 * std::log(2.0)).epsilon(1e-3));
  double prev = 0.0;
  for (auto cr : {TransportCriterion::F50, TransportCriterion::F70, TransportCriterion::F80, TransportCriterion::F90}) {
    const double nt = estimate_NT(c, cr).N_T;
    CHECK(nt > prev);
    prev = nt;
  }
}

TEST_CASE("unsaturated curves are rejected for fractional criteria") {
  const DiffusionCurve c = synthetic(200.0, 300);
  CHECK_THROWS_AS(estimate_NT(c, TransportCriterion::F90), Error);
  try {
    estimate_NT(c, TransportCriterion::F50);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSaturated);
  }
}

TEST_CASE("criterion names") {
  for (auto c : kAllCriteria) CHECK(transport_criterion_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(transport_criterion_from_string("f60"), Error);
}

TEST_CASE("simulation preconditions") {
  CHECK_THROWS_AS(simulate_ensemble(StadiumShape(0.0), 1000, 10, 1), Error);
  CHECK_THROWS_AS(simulate_ensemble(StadiumShape(0.1), 999, 10, 1), Error);
  CHECK_THROWS_AS(simulate_ensemble(StadiumShape(0.1), 1000, 0, 1), Error);
}

TEST_CASE("initial ensemble sits on the arcs") {
  const StadiumShape st(0.3);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const double s = initial_arclength(st, 11, i);
    CHECK(boundary_point(st, s).curvature == 1.0);
  }
}

TEST_CASE("simulation is deterministic and independent of jobs") {
  const StadiumShape st(0.2);
  const DiffusionCurve a = simulate_ensemble(st, 1500, 200, 5, 1);
  const DiffusionCurve b = simulate_ensemble(st, 1500, 200, 5, 3);
  CHECK(a.var_p == b.var_p);
  CHECK(a.var_p[0] == 0.0);
  for (double v : a.var_p) CHECK((v >= 0.0 && v <= 1.0));
  const DiffusionCurve c = simulate_ensemble(st, 1500, 200, 6, 1);
  CHECK(c.var_p != a.var_p);
}

TEST_CASE("larger epsilon saturates faster") {
  const auto fast = simulate_ensemble(StadiumShape(0.5), 1000, 4000, 3);
  const auto slow = simulate_ensemble(StadiumShape(0.05), 1000, 4000, 3);
  CHECK(estimate_NT(fast, TransportCriterion::F50).N_T < estimate_NT(slow, TransportCriterion::F50).N_T);
  // smoothed curve is non-decreasing up to noise
  for (std::size_t i = 10; i + 10 < slow.var_p.size(); i += 10) {
    double a = 0, b = 0;
    for (std::size_t j = 0; j < 10; ++j) {
      a += slow.var_p[i - 10 + j];
      b += slow.var_p[i + j];
    }
    CHECK(b >= a - 0.05);
  }
}

TEST_CASE("alpha") {
  TransportEstimate e;
  e.N_T = 1000.0;
  CHECK(alpha(500.0, e) == 1.0);
  CHECK(alpha(400.0, e) < 1.0);
  CHECK_THROWS_AS(alpha(0.0, e), Error);
}
