#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stadloc/error.hpp"
#include "stadloc/spectral.hpp"

using namespace stadloc;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> brody_samples(double beta, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (double& s : out) s = brody_quantile(u(gen), beta);
  return out;
}

}  // namespace

TEST_CASE("Brody limits") {
  const auto poisson = brody_constants(0.0);
  CHECK(poisson.c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(poisson.d == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(brody_pdf(0.7, 0.0) == doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
  const auto wigner = brody_constants(1.0);
  CHECK(wigner.d == doctest::Approx(kPi / 4).epsilon(1e-14));
  CHECK(wigner.c == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(brody_pdf(1.3, 1.0) == doctest::Approx(kPi * 1.3 / 2 * std::exp(-kPi / 4 * 1.69)).epsilon(1e-14));
}

TEST_CASE("Brody density is normalized with unit mean") {
  for (double beta : {0.0, 0.3, 0.7, 1.0}) {
    // substitute S = t^2 to remove the S^beta endpoint behaviour
    auto f = [&](double t) { return 2 * t * brody_pdf(t * t, beta); };
    auto g = [&](double t) { return 2 * t * t * t * brody_pdf(t * t, beta); };
    CHECK(std::abs(oracle::integrate(f, 0.0, 6.0, 400) - 1.0) < 1e-10);
    CHECK(std::abs(oracle::integrate(g, 0.0, 6.0, 400) - 1.0) < 1e-10);
    CHECK(brody_cdf(0.0, beta) == 0.0);
    CHECK(brody_cdf(50.0, beta) == doctest::Approx(1.0));
    for (double s : {0.3, 1.0, 2.2}) {
      const double h = 1e-6;
      const double fd = (brody_cdf(s + h, beta) - brody_cdf(s - h, beta)) / (2 * h);
      CHECK(std::abs(fd - brody_pdf(s, beta)) < 1e-6);
      CHECK(brody_quantile(brody_cdf(s, beta), beta) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(brody_pdf(1.0, -1.5), Error);
}

TEST_CASE("maximum likelihood recovers beta") {
  for (double beta : {0.0, 0.3, 0.5, 0.7, 1.0}) {
    BrodyFitOptions opts;
    opts.bootstrap = 20;
    const BrodyFit fit = fit_brody(brody_samples(beta, 10000, 17), opts);
    CHECK(std::abs(fit.beta - beta) < 0.05);
    CHECK(fit.ci_lo <= fit.beta);
    CHECK(fit.ci_hi >= fit.beta);
    CHECK(fit.n == 10000);
  }
}

TEST_CASE("fit is deterministic and scale consistent") {
  auto s = brody_samples(0.4, 2000, 5);
  BrodyFitOptions opts;
  opts.bootstrap = 30;
  const BrodyFit a = fit_brody(s, opts);
  const BrodyFit b = fit_brody(s, opts);
  CHECK(a.beta == b.beta);
  CHECK(a.ci_lo == b.ci_lo);
  double mean = 0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  // re-unfold: rescale to unit mean, then stretch by 3.7 and re-unfold again
  std::vector<double> unit = s, stretched = s;
  for (double& v : unit) v /= mean;
  double m2 = 0;
  for (double& v : stretched) m2 += (v *= 3.7);
  m2 /= static_cast<double>(s.size());
  for (double& v : stretched) v /= m2;
  opts.bootstrap = 0;
  CHECK(std::abs(fit_brody(unit, opts).beta - fit_brody(stretched, opts).beta) < 1e-12);
  CHECK_THROWS_AS(fit_brody(std::vector<double>(100, 1.0)), Error);
}

TEST_CASE("histogram cross-check agrees with the MLE") {
  const auto s = brody_samples(0.6, 20000, 8);
  BrodyFitOptions opts;
  opts.bootstrap = 0;
  CHECK(std::abs(fit_brody_histogram(s) - fit_brody(s, opts).beta) < 0.05);
}

TEST_CASE("unfolding with the Weyl law") {
  const StadiumShape st(0.1);
  // Invert the Weyl law on cumulative unit-mean exponential spacings.
  std::mt19937_64 gen(2);
  std::exponential_distribution<double> ex(1.0);
  SpectrumWindow w;
  w.epsilon = 0.1;
  double e = weyl_count(st, 50.0);
  for (int i = 0; i < 2000; ++i) {
    e += ex(gen);
    double lo = 1.0, hi = 1000.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (weyl_count(st, mid) < e ? lo : hi) = mid;
    }
    w.levels.push_back(0.5 * (lo + hi));
  }
  const UnfoldedSpectrum u = unfold(w);
  double mean = 0;
  for (double s : u.spacings) {
    CHECK(s > 0);
    mean += s;
  }
  mean /= static_cast<double>(u.spacings.size());
  CHECK(std::abs(mean - 1.0) < 0.02);
  BrodyFitOptions opts;
  opts.bootstrap = 0;
  CHECK(std::abs(fit_brody(u.spacings, opts).beta) < 0.05);
  w.levels.resize(50);
  CHECK_THROWS_AS(unfold(w), Error);
}
