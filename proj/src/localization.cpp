#include "stadloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

// Neumaier-compensated sum; keeps the uniform and single-cell limits at round-off level.
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

void check_normalized(const std::vector<double>& H) {
  if (H.empty()) throw Error(ErrorCode::NotNormalized, "empty grid");
  CompensatedSum acc;
  for (const double v : H) {
    if (!(v >= 0.0)) throw Error(ErrorCode::NotNormalized, "grid has negative or NaN cells");
    acc.add(v);
  }
  const double total = acc.value();
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << "grid sums to " << total << ", expected 1";
    throw Error(ErrorCode::NotNormalized, msg.str());
  }
}

double inverse_participation(const std::vector<double>& H) {
  CompensatedSum sq;
  for (const double v : H) sq.add(v * v);
  return 1.0 / (static_cast<double>(H.size()) * sq.value());
}

}  // namespace

LocalizationRecord entropy_measure(const std::vector<double>& H, double k) {
  check_normalized(H);
  CompensatedSum entropy;
  for (const double v : H) {
    if (v > 0.0) entropy.add(-v * std::log(v));
  }
  const double I = entropy.value();
  LocalizationRecord rec;
  rec.k = k;
  rec.N = H.size();
  rec.I = I;
  rec.A = std::exp(I) / static_cast<double>(rec.N);
  rec.nIPR = inverse_participation(H);
  return rec;
}

LocalizationRecord entropy_measure(const HusimiGrid& H) { return entropy_measure(H.values, H.k); }

double nipr(const std::vector<double>& H) {
  check_normalized(H);
  return inverse_participation(H);
}

double nipr(const HusimiGrid& H) { return nipr(H.values); }

std::vector<WindowStat> windowed_stats(const std::vector<LocalizationRecord>& records, std::size_t window) {
  if (window == 0 || window > records.size()) {
    throw Error(ErrorCode::WindowTooLarge, "window must be between 1 and the number of records");
  }
  std::vector<WindowStat> out;
  for (std::size_t start = 0; start + window <= records.size(); start += window) {
    WindowStat w;
    w.count = window;
    double sum = 0.0, sum_nipr = 0.0;
    for (std::size_t i = start; i < start + window; ++i) {
      sum += records[i].A;
      sum_nipr += records[i].nIPR;
    }
    const double n = static_cast<double>(window);
    w.mean = sum / n;
    w.mean_nipr = sum_nipr / n;
    double var = 0.0;
    for (std::size_t i = start; i < start + window; ++i) {
      const double d = records[i].A - w.mean;
      var += d * d;
    }
    w.sigma = std::sqrt(var / n);
    w.k_mid = 0.5 * (records[start].k + records[start + window - 1].k);
    out.push_back(w);
  }
  return out;
}

double MeasureDistribution::W(double A) const {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), A);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

MeasureDistribution distribution(const std::vector<LocalizationRecord>& records, double A0, std::size_t nbins,
                                 double epsilon, double k0) {
  if (records.size() < 100) throw Error(ErrorCode::InvalidArgument, "distribution needs at least 100 samples");
  if (!(A0 > 0.0) || nbins == 0) throw Error(ErrorCode::InvalidArgument, "need A0 > 0 and nbins > 0");
  MeasureDistribution d;
  d.epsilon = epsilon;
  d.k0 = k0;
  d.A0 = A0;
  d.samples.reserve(records.size());
  for (const auto& r : records) {
    double a = r.A;
    if (a > A0) {
      if (a - A0 > kA0Clamp) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "A = " << a << " exceeds A0 = " << A0 << " at k = " << r.k;
        throw Error(ErrorCode::SampleExceedsA0, msg.str());
      }
      a = A0;
    }
    d.samples.push_back(a);
  }

  d.edges.resize(nbins + 1);
  for (std::size_t b = 0; b <= nbins; ++b) d.edges[b] = A0 * static_cast<double>(b) / static_cast<double>(nbins);
  std::vector<std::size_t> counts(nbins, 0);
  for (const double a : d.samples) {
    auto b = static_cast<std::size_t>(a / A0 * static_cast<double>(nbins));
    counts[std::min(b, nbins - 1)]++;
  }
  const double width = A0 / static_cast<double>(nbins);
  const double n = static_cast<double>(d.samples.size());
  d.density.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) d.density[b] = static_cast<double>(counts[b]) / (n * width);

  d.sorted = d.samples;
  std::sort(d.sorted.begin(), d.sorted.end());
  d.cumulative.resize(d.sorted.size());
  for (std::size_t i = 0; i < d.sorted.size(); ++i) d.cumulative[i] = static_cast<double>(i + 1) / n;
  return d;
}

}  // namespace stadloc
