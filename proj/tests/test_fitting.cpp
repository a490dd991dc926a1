#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "stadloc/error.hpp"
#include "stadloc/fitting.hpp"

using namespace stadloc;

namespace {

// Moments by quadrature of the normalized density, independent of the closed forms.
double moment(const BetaFit& f, int order) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([&](double A) { return std::pow(A, order) * beta_pdf(A, f); }, 0.0, f.A0, 1e-15);
}

std::vector<double> beta_samples(double a, double b, double A0, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  boost::math::beta_distribution<double> dist(a + 1.0, b + 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = A0 * boost::math::quantile(dist, u(gen));
  return out;
}

}  // namespace

TEST_CASE("beta density") {
  const BetaFit flat = make_beta(0.0, 0.0, 0.7);
  CHECK(beta_pdf(0.3, flat) == doctest::Approx(1.0 / 0.7).epsilon(1e-14));
  const BetaFit row = make_beta(41.694174, 222.486122, 0.7);
  CHECK(std::abs(moment(row, 0) - 1.0) < 1e-10);
  const BetaFit f = make_beta(2.5, 3.0, 0.7);
  CHECK(beta_pdf(0.0, f) == 0.0);
  CHECK(beta_pdf(0.7, f) == 0.0);
  CHECK_THROWS_AS(beta_pdf(0.8, f), Error);
  CHECK(beta_cdf(0.35, make_beta(1.0, 1.0, 0.7)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.C == doctest::Approx(1.0 / (std::pow(0.7, 6.5) * std::beta(3.5, 4.0))).epsilon(1e-12));
}

TEST_CASE("closed-form moments equal quadrature") {
  const BetaMoments u = beta_moments(make_beta(0.0, 0.0, 0.7));
  CHECK(u.mean == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(u.sigma == doctest::Approx(0.7 / std::sqrt(12.0)).epsilon(1e-14));
  CHECK(beta_moments(make_beta(1.0, 1.0, 1.0)).mean == doctest::Approx(0.5).epsilon(1e-15));

  const double as[] = {0.0, 0.5, 2.869704, 10.0, 41.694174};
  const double bs[] = {0.0, 4.433526, 20.0, 222.486122};
  for (double a : as) {
    for (double b : bs) {
      const BetaFit f = make_beta(a, b, 0.7);
      const BetaMoments m = beta_moments(f);
      const double m1 = moment(f, 1), m2 = moment(f, 2);
      CHECK(std::abs(m.mean - m1) < 1e-10 * m1);
      CHECK(std::abs(m.second - m2) < 1e-10 * m2);
      CHECK(std::abs(m.sigma - std::sqrt(m2 - m1 * m1)) < 1e-8 * m.sigma);
    }
  }
  // The printed forms are off by an index shift.
  const BetaFit t = make_beta(2.869704, 4.433526, 0.7);
  CHECK(std::abs(beta_moments_as_printed(t).mean - moment(t, 1)) > 1e-3);

  const BetaMoments sharp = beta_moments(make_beta(1e4, 2.0, 0.7));
  CHECK(sharp.mean == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(sharp.sigma < 1e-3);
}

TEST_CASE("maximum likelihood recovers (a, b)") {
  const double points[][2] = {{2.87, 4.43}, {10.0, 8.0}, {0.5, 2.0}};
  for (const auto& p : points) {
    const auto s = beta_samples(p[0], p[1], 0.7, 1000, 31);
    const BetaFit fit = fit_beta(s);
    CHECK(std::abs(fit.a - p[0]) < 0.1 * p[0]);
    CHECK(std::abs(fit.b - p[1]) < 0.1 * p[1]);
    CHECK(fit.ks_pvalue > 0.01);
  }
  const BetaFit flat = fit_beta(beta_samples(0.0, 0.0, 0.7, 1000, 4));
  CHECK(std::abs(flat.a) < 0.1);
  CHECK(std::abs(flat.b) < 0.1);
}

TEST_CASE("bootstrap intervals cover the truth") {
  int covered_a = 0, covered_b = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BetaFitOptions opts;
    opts.bootstrap = 100;
    opts.seed = seed;
    const BetaFit fit = fit_beta(beta_samples(3.0, 5.0, 0.7, 1000, 100 + seed), opts);
    covered_a += fit.a_ci_lo <= 3.0 && 3.0 <= fit.a_ci_hi;
    covered_b += fit.b_ci_lo <= 5.0 && 5.0 <= fit.b_ci_hi;
  }
  CHECK(covered_a >= 16);
  CHECK(covered_b >= 16);
}

TEST_CASE("beta fit preconditions and A0 modes") {
  auto s = beta_samples(3.0, 5.0, 0.7, 500, 1);
  BetaFitOptions opts;
  opts.a0_mode = A0Mode::MaxSample;
  const BetaFit fit = fit_beta(s, opts);
  CHECK(fit.A0 > *std::max_element(s.begin(), s.end()));
  s[3] = 0.7;
  try {
    fit_beta(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SampleAtBoundary);
  }
  s.resize(100);
  CHECK_THROWS_AS(fit_beta(s), Error);
}

TEST_CASE("rational fits recover generator values") {
  for (const auto& [limit, slope] : {std::pair{0.58, 0.19}, std::pair{0.98, 0.20}}) {
    std::vector<std::pair<double, double>> pts;
    for (double a = 0.1; a < 200.0; a *= 1.6) pts.emplace_back(a, rational_model(a, limit, slope));
    const RationalFit fit = fit_rational(pts);
    CHECK(std::abs(fit.limit - limit) < 1e-8);
    CHECK(std::abs(fit.s - slope) < 1e-8);
  }
  std::vector<std::pair<double, double>> zero;
  for (double a = 0.1; a < 100.0; a *= 2) zero.emplace_back(a, 0.0);
  CHECK_THROWS_AS(fit_rational(zero), Error);
  std::vector<std::pair<double, double>> narrow;
  for (double a = 1.0; a < 5.0; a += 0.5) narrow.emplace_back(a, rational_model(a, 0.5, 0.2));
  CHECK_THROWS_AS(fit_rational(narrow), Error);
}

TEST_CASE("sigma(beta) curve") {
  const SigmaCurveFit gen{0.345, 1.07, 0.60, 0.0};
  std::vector<std::pair<double, double>> pts;
  for (double b = 0.0; b <= 1.0 + 1e-12; b += 0.05) pts.emplace_back(std::min(b, 1.0), sigma_curve(std::min(b, 1.0), gen));
  const SigmaCurveFit fit = fit_sigma_curve(pts);
  CHECK(std::abs(fit.C - 0.345) < 1e-8);
  CHECK(std::abs(fit.a - 1.07) < 1e-8);
  CHECK(std::abs(fit.b - 0.60) < 1e-8);
  CHECK(sigma_curve(0.0, fit) == 0.0);
  CHECK(sigma_curve(1.0, fit) == 0.0);
  int peaks = 0;
  for (double b = 0.01; b < 0.99; b += 0.01) {
    peaks += sigma_curve(b, fit) > sigma_curve(b - 0.01, fit) && sigma_curve(b, fit) > sigma_curve(b + 0.01, fit);
  }
  CHECK(peaks == 1);
  CHECK_THROWS_AS(fit_sigma_curve({{0.2, 0.1}, {0.5, 0.1}}), Error);
  CHECK_THROWS_AS(fit_sigma_curve({{1.2, 0.1}, {0.5, 0.1}, {0.4, 0.1}}), Error);
}

TEST_CASE("Kolmogorov tail") {
  CHECK(ks_pvalue(0.0, 100) == 1.0);
  // 1% critical value of sqrt(n) D is 1.628
  CHECK(ks_pvalue(1.6276 / std::sqrt(10000.0), 10000) == doctest::Approx(0.01).epsilon(0.02));
}
