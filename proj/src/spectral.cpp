#include "stadloc/spectral.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

void check_beta(double beta) {
  if (!(beta > -1.0)) throw Error(ErrorCode::InvalidArgument, "Brody beta must exceed -1");
}

// d/dbeta of the log-likelihood.
double brody_score(const std::vector<double>& log_s, const std::vector<double>& spacings, double beta) {
  const double g = beta + 1.0;
  const double d = brody_constants(beta).d;
  const double dlog_d = std::log(std::tgamma(1.0 + 1.0 / g)) - boost::math::digamma(1.0 + 1.0 / g) / g;
  const double dlog_c = 1.0 / g + dlog_d;
  double score = 0.0;
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    const double sg = std::exp(g * log_s[i]);
    score += dlog_c + log_s[i] - d * sg * (dlog_d + log_s[i]);
  }
  return score;
}

double brody_loglik(const std::vector<double>& log_s, double beta) {
  const auto [c, d] = brody_constants(beta);
  const double g = beta + 1.0;
  double ll = 0.0;
  for (const double ls : log_s) ll += std::log(c) + beta * ls - d * std::exp(g * ls);
  return ll;
}

double mle_beta(const std::vector<double>& spacings, const BrodyFitOptions& opts) {
  std::vector<double> log_s(spacings.size());
  for (std::size_t i = 0; i < spacings.size(); ++i) log_s[i] = std::log(spacings[i]);
  auto f = [&](double b) { return brody_score(log_s, spacings, b); };
  const double f_lo = f(opts.beta_lo), f_hi = f(opts.beta_hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw Error(ErrorCode::NonConvergence, "Brody likelihood has no interior maximum on the beta bracket");
  }
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, opts.beta_lo, opts.beta_hi, f_lo, f_hi,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  if (iters >= 200) throw Error(ErrorCode::NonConvergence, "Brody score root did not converge");
  return 0.5 * (r.first + r.second);
}

}  // namespace

UnfoldedSpectrum unfold(const SpectrumWindow& window, int window_id) {
  if (window.levels.size() < 100) throw Error(ErrorCode::TooFewLevels, "unfolding needs at least 100 levels");
  const StadiumShape shape(window.epsilon);
  UnfoldedSpectrum out;
  out.window_id = window_id;
  out.levels.resize(window.levels.size());
  for (std::size_t i = 0; i < window.levels.size(); ++i) out.levels[i] = weyl_count(shape, window.levels[i]);
  const double mean = (out.levels.back() - out.levels.front()) / static_cast<double>(out.levels.size() - 1);
  if (!(mean > 0.0)) throw Error(ErrorCode::InvalidArgument, "unfolded levels are not increasing");
  const double e0 = out.levels.front();
  for (double& e : out.levels) e = e0 + (e - e0) / mean;
  out.spacings.resize(out.levels.size() - 1);
  for (std::size_t i = 0; i + 1 < out.levels.size(); ++i) {
    out.spacings[i] = out.levels[i + 1] - out.levels[i];
    if (!(out.spacings[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "non-positive unfolded spacing");
  }
  return out;
}

BrodyConstants brody_constants(double beta) {
  check_beta(beta);
  const double g = beta + 1.0;
  const double d = std::pow(std::tgamma((beta + 2.0) / g), g);
  return {g * d, d};
}

double brody_pdf(double S, double beta) {
  if (!(S >= 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing must be non-negative");
  const auto [c, d] = brody_constants(beta);
  if (S == 0.0) return beta == 0.0 ? c : (beta > 0.0 ? 0.0 : INFINITY);
  return c * std::pow(S, beta) * std::exp(-d * std::pow(S, beta + 1.0));
}

double brody_cdf(double S, double beta) {
  if (!(S >= 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing must be non-negative");
  const double d = brody_constants(beta).d;
  return -std::expm1(-d * std::pow(S, beta + 1.0));
}

double brody_quantile(double prob, double beta) {
  if (!(prob >= 0.0 && prob < 1.0)) throw Error(ErrorCode::InvalidArgument, "probability must be in [0, 1)");
  const double d = brody_constants(beta).d;
  return std::pow(-std::log1p(-prob) / d, 1.0 / (beta + 1.0));
}

BrodyFit fit_brody(const std::vector<double>& spacings, const BrodyFitOptions& opts) {
  if (spacings.size() < opts.min_spacings) {
    throw Error(ErrorCode::InvalidArgument, "Brody fit needs at least " + std::to_string(opts.min_spacings) +
                                                " spacings");
  }
  for (const double s : spacings) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "spacings must be positive");
  }
  BrodyFit fit;
  fit.n = spacings.size();
  fit.beta = mle_beta(spacings, opts);
  {
    std::vector<double> log_s(spacings.size());
    for (std::size_t i = 0; i < spacings.size(); ++i) log_s[i] = std::log(spacings[i]);
    fit.loglik = brody_loglik(log_s, fit.beta);
  }

  fit.ci_lo = fit.ci_hi = fit.beta;
  if (opts.bootstrap > 0) {
    std::mt19937_64 gen(opts.seed);
    std::vector<double> betas, sample(spacings.size());
    for (std::size_t b = 0; b < opts.bootstrap; ++b) {
      for (double& s : sample) s = spacings[gen() % spacings.size()];
      try {
        betas.push_back(mle_beta(sample, opts));
      } catch (const Error&) {
        // resample without an interior maximum; excluded from the interval
      }
    }
    fit.bootstrap_used = betas.size();
    if (!betas.empty()) {
      std::sort(betas.begin(), betas.end());
      const double tail = 0.5 * (1.0 - opts.confidence);
      auto pick = [&](double q) {
        const double pos = q * static_cast<double>(betas.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double t = pos - static_cast<double>(i);
        return i + 1 < betas.size() ? betas[i] * (1.0 - t) + betas[i + 1] * t : betas[i];
      };
      fit.ci_lo = pick(tail);
      fit.ci_hi = pick(1.0 - tail);
    }
  }
  return fit;
}

double fit_brody_histogram(const std::vector<double>& spacings, std::size_t nbins, double s_max) {
  if (spacings.empty() || nbins == 0 || !(s_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "histogram fit needs spacings, bins and s_max > 0");
  }
  const double w = s_max / static_cast<double>(nbins);
  std::vector<double> density(nbins, 0.0);
  for (const double s : spacings) {
    if (s >= 0.0 && s < s_max) density[static_cast<std::size_t>(s / w)] += 1.0;
  }
  for (double& v : density) v /= static_cast<double>(spacings.size()) * w;
  // Compare bin averages of the density, which are exact cdf differences.
  auto sse = [&](double beta) {
    double total = 0.0;
    for (std::size_t b = 0; b < nbins; ++b) {
      const double model = (brody_cdf((b + 1) * w, beta) - brody_cdf(b * w, beta)) / w;
      total += (density[b] - model) * (density[b] - model);
    }
    return total;
  };
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(sse, -0.2, 1.3, 40, iters).first;
}

}  // namespace stadloc
