#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stadloc/eigensolver.hpp"

namespace stadloc {

struct UnfoldedSpectrum {
  int window_id = 0;
  std::vector<double> levels;
  std::vector<double> spacings;
};

/// e_i = N_weyl(k_i), then rescaled so the mean spacing is exactly one.
/// Throws Error(TooFewLevels) below 100 levels and Error(InvalidArgument)
/// for non-increasing unfolded levels.
UnfoldedSpectrum unfold(const SpectrumWindow& window, int window_id = 0);

struct BrodyConstants {
  double c = 0.0;
  double d = 0.0;
};

/// d = Gamma((beta+2)/(beta+1))^(beta+1), c = (beta+1) d.
BrodyConstants brody_constants(double beta);
double brody_pdf(double S, double beta);
double brody_cdf(double S, double beta);
/// Inverse of brody_cdf, for sampling.
double brody_quantile(double prob, double beta);

struct BrodyFit {
  double beta = 0.0;
  double loglik = 0.0;
  std::size_t n = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Bootstrap resamples whose fit converged.
  std::size_t bootstrap_used = 0;
};

struct BrodyFitOptions {
  double beta_lo = -0.2;
  double beta_hi = 1.3;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 1;
  double confidence = 0.95;
  std::size_t min_spacings = 500;
};

/// Maximum-likelihood beta: root of the score on [beta_lo, beta_hi], with a
/// percentile bootstrap interval. Throws Error(NonConvergence) when the score
/// does not change sign on the bracket.
BrodyFit fit_brody(const std::vector<double>& spacings, const BrodyFitOptions& opts = {});

/// Cross-check: least-squares fit of the Brody density to a histogram of the
/// spacings on [0, s_max].
double fit_brody_histogram(const std::vector<double>& spacings, std::size_t nbins = 30, double s_max = 3.0);

}  // namespace stadloc
