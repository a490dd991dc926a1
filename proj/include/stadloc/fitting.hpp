#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "stadloc/localization.hpp"

namespace stadloc {

/// P(A) = C A^a (A0 - A)^b on [0, A0].
struct BetaFit {
  double a = 0.0;
  double b = 0.0;
  double A0 = 0.7;
  double C = 0.0;
  double loglik = 0.0;
  /// Kolmogorov-Smirnov distance between the empirical and fitted W(A).
  double gof = 0.0;
  /// Asymptotic KS p-value of gof.
  double ks_pvalue = 1.0;
  std::size_t n = 0;
  double a_ci_lo = 0.0, a_ci_hi = 0.0;
  double b_ci_lo = 0.0, b_ci_hi = 0.0;
};

/// C = 1 / (A0^(a+b+1) B(a+1, b+1)).
double beta_normalization(double a, double b, double A0);
inline BetaFit make_beta(double a, double b, double A0) {
  BetaFit f;
  f.a = a;
  f.b = b;
  f.A0 = A0;
  f.C = beta_normalization(a, b, A0);
  return f;
}

/// Throws Error(OutOfSupport) outside [0, A0].
double beta_pdf(double A, const BetaFit& fit);
/// W(A), the regularized incomplete beta function at A/A0.
double beta_cdf(double A, const BetaFit& fit);

struct BetaMoments {
  double mean = 0.0;
  double second = 0.0;
  double sigma = 0.0;
};

/// Moments of the normalized density, from the beta-function integrals:
/// <A> = A0 (a+1)/(a+b+2), <A^2> = A0^2 (a+1)(a+2)/((a+b+2)(a+b+3)).
BetaMoments beta_moments(const BetaFit& fit);
/// The printed closed forms, which carry an index shift in the denominators;
/// kept only so comparisons against tabulated values can report both.
BetaMoments beta_moments_as_printed(const BetaFit& fit);

enum class A0Mode { Fixed, MaxSample };

struct BetaFitOptions {
  double A0 = 0.7;
  A0Mode a0_mode = A0Mode::Fixed;
  std::size_t min_samples = 200;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 1;
  double confidence = 0.95;
};

/// A0 used in MaxSample mode: max * (1 + 1/n), so no sample sits on the bound.
double max_sample_A0(const std::vector<double>& samples);

/// Maximum-likelihood (a, b) with A0 fixed (Newton on the concave
/// log-likelihood, a, b > -1). Throws Error(SampleAtBoundary) for samples
/// outside (0, A0) and Error(NonConvergence).
BetaFit fit_beta(const std::vector<double>& samples, const BetaFitOptions& opts = {});
BetaFit fit_beta(const MeasureDistribution& dist, BetaFitOptions opts = {});

/// Kolmogorov-Smirnov distance of sorted samples against a fitted beta.
double ks_distance(const std::vector<double>& sorted, const BetaFit& fit);
/// Asymptotic Kolmogorov tail probability for distance D with n samples.
double ks_pvalue(double D, std::size_t n);

/// y = limit * s alpha / (1 + s alpha).
struct RationalFit {
  double limit = 0.0;
  double s = 0.0;
  /// RMS residual.
  double residual = 0.0;
  std::size_t n = 0;
};

double rational_model(double alpha, double limit, double s);

/// Least squares from (limit, s) = (max y, 1/median alpha).
/// Throws Error(DegenerateSpan) for fewer than 5 points, less than one decade
/// of alpha or all-zero y, and Error(FitDiverged) for a non-positive result.
RationalFit fit_rational(const std::vector<std::pair<double, double>>& points);

/// sigma(beta) = C beta^a (1 - beta)^b.
struct SigmaCurveFit {
  double C = 0.0;
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;
};

double sigma_curve(double beta, const SigmaCurveFit& fit);

/// Linearized log fit for the start, then least squares on sigma itself.
/// Throws Error(InvalidArgument) for beta outside [0, 1] and
/// Error(DegenerateSpan) for fewer than 3 interior points with sigma > 0.
SigmaCurveFit fit_sigma_curve(const std::vector<std::pair<double, double>>& points);

}  // namespace stadloc
