#pragma once

#include <cstddef>
#include <vector>

#include "stadloc/husimi.hpp"

namespace stadloc {

struct LocalizationRecord {
  double k = 0.0;
  /// exp(I) / N.
  double A = 0.0;
  double nIPR = 0.0;
  /// Information entropy in nats.
  double I = 0.0;
  std::size_t N = 0;
};

/// Allowed deviation of the grid sum from one.
inline constexpr double kNormalizationTolerance = 1e-9;

/// I = -sum H ln H (0 ln 0 = 0), A = exp(I)/N, nIPR filled in as well.
/// Throws Error(NotNormalized) if the grid does not sum to one or has negative cells.
LocalizationRecord entropy_measure(const HusimiGrid& H);
LocalizationRecord entropy_measure(const std::vector<double>& H, double k = 0.0);

/// 1 / (N sum H^2).  Throws Error(NotNormalized).
double nipr(const HusimiGrid& H);
double nipr(const std::vector<double>& H);

struct WindowStat {
  double k_mid = 0.0;
  double mean = 0.0;
  /// Population standard deviation (divide by n).
  double sigma = 0.0;
  double mean_nipr = 0.0;
  std::size_t count = 0;
};

/// Mean and population sigma of A (and mean nIPR) over non-overlapping blocks
/// of `window` consecutive records; an incomplete trailing block is dropped.
/// Throws Error(WindowTooLarge) when window exceeds the record count or is zero.
std::vector<WindowStat> windowed_stats(const std::vector<LocalizationRecord>& records, std::size_t window);

struct MeasureDistribution {
  double epsilon = 0.0;
  double k0 = 0.0;
  double A0 = 0.7;
  std::vector<double> samples;
  std::vector<double> edges;
  std::vector<double> density;
  /// Sorted samples and the empirical cumulative W at each of them (i+1)/n.
  std::vector<double> sorted;
  std::vector<double> cumulative;

  /// Empirical W(A): fraction of samples <= A.
  double W(double A) const;
};

/// Samples within 1e-9 above A0 are clamped to A0; larger excesses throw.
inline constexpr double kA0Clamp = 1e-9;

/// Density-normalized histogram of A on [0, A0] with nbins bins.
/// Throws Error(InvalidArgument) for fewer than 100 records and
/// Error(SampleExceedsA0) naming the offending k.
MeasureDistribution distribution(const std::vector<LocalizationRecord>& records, double A0 = 0.7,
                                 std::size_t nbins = 35, double epsilon = 0.0, double k0 = 0.0);

}  // namespace stadloc
