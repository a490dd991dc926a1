#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/localization.hpp"

using namespace stadloc;

TEST_CASE("limiting cases of A and nIPR") {
  const std::size_t N = 160000;
  const std::vector<double> uniform(N, 1.0 / N);
  const LocalizationRecord u = entropy_measure(uniform);
  CHECK(std::abs(u.A - 1.0) < 1e-14);
  CHECK(std::abs(u.nIPR - 1.0) < 1e-14);
  CHECK(u.N == N);

  std::vector<double> single(N, 0.0);
  single[1234] = 1.0;
  const LocalizationRecord s = entropy_measure(single);
  CHECK(s.A == 1.0 / N);
  CHECK(s.nIPR == 1.0 / N);
  CHECK(s.I == 0.0);

  std::vector<double> two(N, 0.0);
  two[0] = two[7] = 0.5;
  CHECK(entropy_measure(two).A == doctest::Approx(2.0 / N).epsilon(1e-14));
  CHECK(nipr(two) == doctest::Approx(2.0 / N).epsilon(1e-14));
}

TEST_CASE("measures are permutation invariant and A = exp(I)/N") {
  std::mt19937_64 gen(3);
  std::vector<double> h(900);
  double sum = 0;
  for (double& v : h) sum += (v = std::exponential_distribution<double>(1.0)(gen));
  for (double& v : h) v /= sum;
  const LocalizationRecord a = entropy_measure(h);
  std::shuffle(h.begin(), h.end(), gen);
  const LocalizationRecord b = entropy_measure(h);
  CHECK(a.A == doctest::Approx(b.A).epsilon(1e-13));
  CHECK(a.nIPR == doctest::Approx(b.nIPR).epsilon(1e-13));
  CHECK(a.A == std::exp(a.I) / 900.0);
  CHECK(a.A > 1.0 / 900);
  CHECK(a.A < 1.0);
}

TEST_CASE("normalization is enforced") {
  std::vector<double> h(10, 0.2);
  CHECK_THROWS_AS(entropy_measure(h), Error);
  h.assign(10, 0.1);
  h[0] = -0.1;
  h[1] = 0.3;
  CHECK_THROWS_AS(nipr(h), Error);
}

TEST_CASE("windowed statistics use the population convention") {
  std::vector<LocalizationRecord> r(4);
  r[0].A = 0.2;
  r[1].A = 0.4;
  r[2].A = r[3].A = 0.3;
  for (std::size_t i = 0; i < 4; ++i) r[i].k = 10.0 + i;
  const auto w = windowed_stats(r, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0].mean == doctest::Approx(0.3));
  CHECK(w[0].sigma == doctest::Approx(0.1));
  CHECK(w[1].sigma == 0.0);
  CHECK(w[0].k_mid == 10.5);
  CHECK_THROWS_AS(windowed_stats(r, 5), Error);
  CHECK_THROWS_AS(windowed_stats(r, 0), Error);
}

TEST_CASE("distribution: uniform samples") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 0.7);
  std::vector<LocalizationRecord> recs(1000);
  for (auto& r : recs) r.A = u(gen);
  const MeasureDistribution d = distribution(recs, 0.7, 14);
  double area = 0;
  for (std::size_t b = 0; b < d.density.size(); ++b) area += d.density[b] * (d.edges[b + 1] - d.edges[b]);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
  double dmax = 0;
  for (std::size_t i = 0; i < d.sorted.size(); ++i) dmax = std::max(dmax, std::abs(d.cumulative[i] - d.sorted[i] / 0.7));
  CHECK(dmax < 1.63 / std::sqrt(1000.0));  // 1% Kolmogorov critical value
  CHECK(d.W(0.7) == 1.0);
  CHECK(d.W(-1.0) == 0.0);
}

TEST_CASE("distribution: beta samples match the density") {
  std::mt19937_64 gen(21);
  boost::math::beta_distribution<double> beta(4.0, 6.0);  // a = 3, b = 5
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LocalizationRecord> recs(1000);
  for (auto& r : recs) r.A = 0.7 * boost::math::quantile(beta, u(gen));
  const MeasureDistribution d = distribution(recs, 0.7, 10);
  double chi2 = 0;
  int dof = -1;
  for (std::size_t b = 0; b < 10; ++b) {
    const double p = boost::math::cdf(beta, d.edges[b + 1] / 0.7) - boost::math::cdf(beta, d.edges[b] / 0.7);
    const double expected = 1000 * p;
    if (expected < 5) continue;
    const double observed = d.density[b] * 1000 * (d.edges[b + 1] - d.edges[b]);
    chi2 += (observed - expected) * (observed - expected) / expected;
    ++dof;
  }
  const double pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), chi2));
  CHECK(pvalue > 0.01);
}

TEST_CASE("distribution: A0 checks") {
  std::vector<LocalizationRecord> recs(200);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].A = 0.1 + 0.001 * i;
    recs[i].k = 100 + i;
  }
  recs[5].A = 0.7 + 1e-10;
  CHECK(distribution(recs, 0.7).samples[5] == 0.7);
  recs[5].A = 0.75;
  try {
    distribution(recs, 0.7);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SampleExceedsA0);
    CHECK(std::string(e.what()).find("105") != std::string::npos);
  }
  recs.resize(50);
  CHECK_THROWS_AS(distribution(recs, 0.7), Error);
}
