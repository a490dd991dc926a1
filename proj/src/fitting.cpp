#include "stadloc/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

double log_normalization(double a, double b, double A0) {
  const double log_beta = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0);
  return -(a + b + 1.0) * std::log(A0) - log_beta;
}

void check_exponents(double a, double b, double A0) {
  if (!(a > -1.0) || !(b > -1.0) || !(A0 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta density needs a, b > -1 and A0 > 0");
  }
}

struct BetaSums {
  double n = 0.0, log_x = 0.0, log_1mx = 0.0;
};

double beta_loglik(const BetaSums& s, double a, double b) {
  const double log_beta = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0);
  return -s.n * log_beta + a * s.log_x + b * s.log_1mx;
}

// Newton on the scaled variable x = A/A0; the A0 factor only shifts the log-likelihood.
std::pair<double, double> beta_mle(const std::vector<double>& x) {
  BetaSums s;
  double mean = 0.0, sq = 0.0;
  for (const double v : x) {
    s.log_x += std::log(v);
    s.log_1mx += std::log1p(-v);
    mean += v;
    sq += v * v;
  }
  s.n = static_cast<double>(x.size());
  mean /= s.n;
  const double var = std::max(sq / s.n - mean * mean, 1e-300);
  const double common = std::max(mean * (1.0 - mean) / var - 1.0, 0.2);
  double a = std::max(mean * common - 1.0, -0.9);
  double b = std::max((1.0 - mean) * common - 1.0, -0.9);

  using boost::math::digamma;
  using boost::math::trigamma;
  double ll = beta_loglik(s, a, b);
  for (int it = 0; it < 200; ++it) {
    const double psi_ab = digamma(a + b + 2.0);
    const Eigen::Vector2d g(s.n * (psi_ab - digamma(a + 1.0)) + s.log_x,
                            s.n * (psi_ab - digamma(b + 1.0)) + s.log_1mx);
    const double t_ab = trigamma(a + b + 2.0);
    Eigen::Matrix2d H;
    H << s.n * (t_ab - trigamma(a + 1.0)), s.n * t_ab, s.n * t_ab, s.n * (t_ab - trigamma(b + 1.0));
    const Eigen::Vector2d step = -H.ldlt().solve(g);
    double lambda = 1.0;
    double na = a, nb = b, nll = ll;
    for (int h = 0; h < 60; ++h, lambda *= 0.5) {
      na = a + lambda * step(0);
      nb = b + lambda * step(1);
      if (na > -1.0 && nb > -1.0) {
        nll = beta_loglik(s, na, nb);
        if (nll >= ll - 1e-12 * std::abs(ll)) break;
      }
    }
    const double moved = std::abs(na - a) + std::abs(nb - b);
    a = na;
    b = nb;
    ll = nll;
    if (moved <= 1e-13 * (1.0 + std::abs(a) + std::abs(b))) return {a, b};
  }
  throw Error(ErrorCode::NonConvergence, "beta maximum-likelihood iteration did not converge");
}

// Eigen's Levenberg-Marquardt functor shape.
template <class Model>
struct LeastSquares : Eigen::DenseFunctor<double> {
  const std::vector<std::pair<double, double>>* points;
  Model model;
  LeastSquares(const std::vector<std::pair<double, double>>& p, int n_params, Model m)
      : Eigen::DenseFunctor<double>(n_params, static_cast<int>(p.size())), points(&p), model(m) {}
  int operator()(const InputType& x, ValueType& f) const {
    for (std::size_t i = 0; i < points->size(); ++i) {
      f(static_cast<Eigen::Index>(i)) = model.value((*points)[i].first, x) - (*points)[i].second;
    }
    return 0;
  }
  int df(const InputType& x, JacobianType& J) const {
    for (std::size_t i = 0; i < points->size(); ++i) {
      model.gradient((*points)[i].first, x, J.row(static_cast<Eigen::Index>(i)));
    }
    return 0;
  }
};

struct RationalModel {
  double value(double t, const Eigen::VectorXd& x) const { return rational_model(t, x(0), x(1)); }
  template <class Row>
  void gradient(double t, const Eigen::VectorXd& x, Row row) const {
    const double u = 1.0 + x(1) * t;
    row(0) = x(1) * t / u;
    row(1) = x(0) * t / (u * u);
  }
};

struct SigmaModel {
  double value(double t, const Eigen::VectorXd& x) const { return sigma_curve(t, {x(0), x(1), x(2), 0.0}); }
  template <class Row>
  void gradient(double t, const Eigen::VectorXd& x, Row row) const {
    const double v = value(t, x);
    row(0) = x(0) != 0.0 ? v / x(0) : std::pow(t, x(1)) * std::pow(1.0 - t, x(2));
    row(1) = t > 0.0 ? v * std::log(t) : 0.0;
    row(2) = t < 1.0 ? v * std::log1p(-t) : 0.0;
  }
};

template <class Model>
Eigen::VectorXd least_squares(const std::vector<std::pair<double, double>>& points, Eigen::VectorXd x, Model m,
                              double* rms) {
  LeastSquares<Model> functor(points, static_cast<int>(x.size()), m);
  Eigen::LevenbergMarquardt<LeastSquares<Model>> lm(functor);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setGtol(0.0);
  lm.setMaxfev(10000);
  const auto status = lm.minimize(x);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !x.allFinite()) {
    throw Error(ErrorCode::FitDiverged, "least-squares fit failed");
  }
  Eigen::VectorXd f(static_cast<Eigen::Index>(points.size()));
  functor(x, f);
  *rms = std::sqrt(f.squaredNorm() / static_cast<double>(points.size()));
  return x;
}

}  // namespace

double beta_normalization(double a, double b, double A0) {
  check_exponents(a, b, A0);
  return std::exp(log_normalization(a, b, A0));
}

double beta_pdf(double A, const BetaFit& fit) {
  check_exponents(fit.a, fit.b, fit.A0);
  if (!(A >= 0.0 && A <= fit.A0)) throw Error(ErrorCode::OutOfSupport, "A outside [0, A0]");
  const double log_c = log_normalization(fit.a, fit.b, fit.A0);
  auto edge = [&](double exponent, double other) {
    if (exponent > 0.0) return 0.0;
    if (exponent < 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(log_c + other * std::log(fit.A0));
  };
  if (A == 0.0) return edge(fit.a, fit.b);
  if (A == fit.A0) return edge(fit.b, fit.a);
  return std::exp(log_c + fit.a * std::log(A) + fit.b * std::log(fit.A0 - A));
}

double beta_cdf(double A, const BetaFit& fit) {
  check_exponents(fit.a, fit.b, fit.A0);
  if (A <= 0.0) return 0.0;
  if (A >= fit.A0) return 1.0;
  return boost::math::ibeta(fit.a + 1.0, fit.b + 1.0, A / fit.A0);
}

BetaMoments beta_moments(const BetaFit& fit) {
  check_exponents(fit.a, fit.b, fit.A0);
  const double a = fit.a, b = fit.b, A0 = fit.A0;
  BetaMoments m;
  m.mean = A0 * (a + 1.0) / (a + b + 2.0);
  m.second = A0 * A0 * (a + 1.0) * (a + 2.0) / ((a + b + 2.0) * (a + b + 3.0));
  // Direct form avoids cancellation in second - mean^2.
  m.sigma = A0 * std::sqrt((a + 1.0) * (b + 1.0) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0)));
  return m;
}

BetaMoments beta_moments_as_printed(const BetaFit& fit) {
  const double a = fit.a, b = fit.b, A0 = fit.A0;
  BetaMoments m;
  m.mean = A0 * (a + 1.0) / (a + b + 3.0);
  m.second = A0 * A0 * (a + 2.0) * (a + 1.0) / ((a + b + 4.0) * (a + b + 3.0));
  m.sigma = A0 * std::sqrt((a + 2.0) * (b + 2.0) / ((a + b + 4.0) * (a + b + 3.0) * (a + b + 3.0)));
  return m;
}

double max_sample_A0(const std::vector<double>& samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no samples");
  const double top = *std::max_element(samples.begin(), samples.end());
  return top * (1.0 + 1.0 / static_cast<double>(samples.size()));
}

double ks_pvalue(double D, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "KS p-value needs samples");
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * D;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_distance(const std::vector<double>& sorted, const BetaFit& fit) {
  const double n = static_cast<double>(sorted.size());
  double D = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = beta_cdf(sorted[i], fit);
    D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return D;
}

BetaFit fit_beta(const std::vector<double>& samples, const BetaFitOptions& opts) {
  if (samples.size() < opts.min_samples) {
    throw Error(ErrorCode::InvalidArgument, "beta fit needs at least " + std::to_string(opts.min_samples) +
                                                " samples");
  }
  const double A0 = opts.a0_mode == A0Mode::MaxSample ? max_sample_A0(samples) : opts.A0;
  if (!(A0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "A0 must be positive");
  std::vector<double> x(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] > 0.0 && samples[i] < A0)) {
      throw Error(ErrorCode::SampleAtBoundary, "sample " + std::to_string(samples[i]) + " not inside (0, A0)");
    }
    x[i] = samples[i] / A0;
  }
  const auto [a, b] = beta_mle(x);
  BetaFit fit = make_beta(a, b, A0);
  fit.n = samples.size();
  fit.loglik = 0.0;
  for (const double v : samples) fit.loglik += std::log(beta_pdf(v, fit));
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  fit.gof = ks_distance(sorted, fit);
  fit.ks_pvalue = ks_pvalue(fit.gof, fit.n);

  fit.a_ci_lo = fit.a_ci_hi = a;
  fit.b_ci_lo = fit.b_ci_hi = b;
  if (opts.bootstrap > 0) {
    std::mt19937_64 gen(opts.seed);
    std::vector<double> as, bs, resample(x.size());
    for (std::size_t r = 0; r < opts.bootstrap; ++r) {
      for (double& v : resample) v = x[gen() % x.size()];
      try {
        const auto [ra, rb] = beta_mle(resample);
        as.push_back(ra);
        bs.push_back(rb);
      } catch (const Error&) {
      }
    }
    if (!as.empty()) {
      std::sort(as.begin(), as.end());
      std::sort(bs.begin(), bs.end());
      const double tail = 0.5 * (1.0 - opts.confidence);
      auto pick = [&](const std::vector<double>& v, double q) {
        return v[std::min(v.size() - 1, static_cast<std::size_t>(q * static_cast<double>(v.size())))];
      };
      fit.a_ci_lo = pick(as, tail);
      fit.a_ci_hi = pick(as, 1.0 - tail);
      fit.b_ci_lo = pick(bs, tail);
      fit.b_ci_hi = pick(bs, 1.0 - tail);
    }
  }
  return fit;
}

BetaFit fit_beta(const MeasureDistribution& dist, BetaFitOptions opts) {
  if (opts.a0_mode == A0Mode::Fixed) opts.A0 = dist.A0;
  return fit_beta(dist.samples, opts);
}

double rational_model(double alpha, double limit, double s) { return limit * s * alpha / (1.0 + s * alpha); }

RationalFit fit_rational(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 5) throw Error(ErrorCode::DegenerateSpan, "rational fit needs at least 5 points");
  double lo = INFINITY, hi = 0.0, ymax = -INFINITY;
  bool any_nonzero = false;
  std::vector<double> alphas;
  for (const auto& [a, y] : points) {
    if (!(a > 0.0) || !std::isfinite(y)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    ymax = std::max(ymax, y);
    any_nonzero |= y != 0.0;
    alphas.push_back(a);
  }
  if (hi < 10.0 * lo) throw Error(ErrorCode::DegenerateSpan, "alpha values span less than one decade");
  if (!any_nonzero) throw Error(ErrorCode::DegenerateSpan, "all y values are zero");
  std::nth_element(alphas.begin(), alphas.begin() + static_cast<long>(alphas.size() / 2), alphas.end());
  Eigen::VectorXd x(2);
  x << ymax, 1.0 / alphas[alphas.size() / 2];
  RationalFit fit;
  x = least_squares(points, x, RationalModel{}, &fit.residual);
  fit.limit = x(0);
  fit.s = x(1);
  fit.n = points.size();
  if (!(fit.limit > 0.0) || !(fit.s > 0.0)) {
    throw Error(ErrorCode::FitDiverged, "rational fit gave non-positive limit or slope");
  }
  return fit;
}

double sigma_curve(double beta, const SigmaCurveFit& fit) {
  if (beta <= 0.0) return fit.a > 0.0 ? 0.0 : (fit.a == 0.0 ? fit.C * std::pow(1.0 - beta, fit.b) : INFINITY);
  if (beta >= 1.0) return fit.b > 0.0 ? 0.0 : (fit.b == 0.0 ? fit.C : INFINITY);
  return fit.C * std::pow(beta, fit.a) * std::pow(1.0 - beta, fit.b);
}

SigmaCurveFit fit_sigma_curve(const std::vector<std::pair<double, double>>& points) {
  Eigen::MatrixXd X(0, 3);
  std::vector<double> rhs;
  for (const auto& [beta, sigma] : points) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in [0, 1]");
    if (beta > 0.0 && beta < 1.0 && sigma > 0.0) {
      X.conservativeResize(X.rows() + 1, 3);
      X.row(X.rows() - 1) << 1.0, std::log(beta), std::log1p(-beta);
      rhs.push_back(std::log(sigma));
    }
  }
  if (X.rows() < 3) throw Error(ErrorCode::DegenerateSpan, "sigma curve needs 3 interior points with sigma > 0");
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const Eigen::VectorXd start = X.colPivHouseholderQr().solve(y);
  if (X.colPivHouseholderQr().rank() < 3) throw Error(ErrorCode::DegenerateSpan, "sigma curve points are collinear");
  Eigen::VectorXd x(3);
  x << std::exp(start(0)), start(1), start(2);
  SigmaCurveFit fit;
  x = least_squares(points, x, SigmaModel{}, &fit.residual);
  fit.C = x(0);
  fit.a = x(1);
  fit.b = x(2);
  return fit;
}

}  // namespace stadloc
