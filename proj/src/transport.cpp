#include "stadloc/transport.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "stadloc/error.hpp"
#include "stadloc/parallel.hpp"

namespace stadloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 256;

double fraction_of(TransportCriterion c) {
  switch (c) {
    case TransportCriterion::F50: return 0.5;
    case TransportCriterion::F70: return 0.7;
    case TransportCriterion::F80: return 0.8;
    case TransportCriterion::F90: return 0.9;
    case TransportCriterion::ExpModel: break;
  }
  return 0.0;
}

// First n with var_p >= level, linearly interpolated; negative if never reached.
double first_crossing(const DiffusionCurve& c, double level) {
  for (std::size_t i = 0; i < c.var_p.size(); ++i) {
    if (c.var_p[i] < level) continue;
    if (i == 0) return static_cast<double>(c.n[0]);
    const double n0 = static_cast<double>(c.n[i - 1]), n1 = static_cast<double>(c.n[i]);
    const double v0 = c.var_p[i - 1], v1 = c.var_p[i];
    return n0 + (n1 - n0) * (level - v0) / (v1 - v0);
  }
  return -1.0;
}

}  // namespace

std::string_view to_string(TransportCriterion c) {
  switch (c) {
    case TransportCriterion::F50: return "f50";
    case TransportCriterion::F70: return "f70";
    case TransportCriterion::F80: return "f80";
    case TransportCriterion::F90: return "f90";
    case TransportCriterion::ExpModel: return "expmodel";
  }
  return "unknown";
}

TransportCriterion transport_criterion_from_string(std::string_view name) {
  for (const TransportCriterion c : kAllCriteria) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown transport criterion " + std::string(name));
}

double initial_arclength(const StadiumShape& shape, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 gen(seq);
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  const double t = 2.0 * kPi * u;
  const double e = shape.epsilon();
  if (t < 0.5 * kPi) return t;
  if (t < 1.5 * kPi) return t + e;
  return t + 2.0 * e;
}

DiffusionCurve simulate_ensemble(const StadiumShape& shape, std::size_t n_particles,
                                 std::size_t n_collisions, std::uint64_t seed, int jobs) {
  if (shape.epsilon() == 0.0) {
    throw Error(ErrorCode::DegenerateShape, "circle conserves |p|; momentum does not diffuse");
  }
  if (n_particles < 1000) throw Error(ErrorCode::InvalidArgument, "need at least 1000 particles");
  if (n_collisions < 1) throw Error(ErrorCode::InvalidArgument, "need at least one collision");

  const std::size_t blocks = (n_particles + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> sums(blocks, std::vector<double>(n_collisions + 1, 0.0));
  parallel_for(blocks, jobs, [&](std::size_t b) {
    std::vector<double>& acc = sums[b];
    const std::size_t end = std::min(n_particles, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      PhasePoint x{initial_arclength(shape, seed, i), 0.0};
      for (std::size_t n = 1; n <= n_collisions; ++n) {
        x = bounce_map(shape, x);
        acc[n] += x.p * x.p;
      }
    }
  });

  DiffusionCurve curve;
  curve.epsilon = shape.epsilon();
  curve.n_particles = n_particles;
  curve.seed = seed;
  curve.n.resize(n_collisions + 1);
  curve.var_p.assign(n_collisions + 1, 0.0);
  for (std::size_t n = 0; n <= n_collisions; ++n) {
    curve.n[n] = n;
    double total = 0.0;
    for (const auto& acc : sums) total += acc[n];
    curve.var_p[n] = total / static_cast<double>(n_particles);
  }
  return curve;
}

TransportEstimate estimate_NT(const DiffusionCurve& curve, TransportCriterion criterion) {
  if (curve.var_p.size() < 2 || curve.var_p.size() != curve.n.size()) {
    throw Error(ErrorCode::InvalidArgument, "diffusion curve needs matching n and var_p of length >= 2");
  }
  TransportEstimate est;
  est.epsilon = curve.epsilon;
  est.criterion = criterion;

  if (criterion != TransportCriterion::ExpModel) {
    if (curve.var_p.back() < 0.9 * kSaturatedVariance) {
      throw Error(ErrorCode::NotSaturated, "final <p^2> below 90% of 1/3; run more collisions");
    }
    est.N_T = first_crossing(curve, fraction_of(criterion) * kSaturatedVariance);
    if (!(est.N_T > 0.0)) throw Error(ErrorCode::NotSaturated, "criterion level never reached");
    return est;
  }

  // Fit on the rising part only; the flat tail would dominate the residual.
  const double cross95 = first_crossing(curve, 0.95 * kSaturatedVariance);
  const double n_max = cross95 > 0.0 ? cross95 : static_cast<double>(curve.n.back());
  std::size_t used = 0;
  while (used < curve.n.size() && static_cast<double>(curve.n[used]) <= n_max) ++used;
  if (used < 3) throw Error(ErrorCode::FitDiverged, "too few points before saturation");

  auto sse = [&](double log_nt) {
    const double nt = std::exp(log_nt);
    double s = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
      const double model = kSaturatedVariance * (1.0 - std::exp(-static_cast<double>(curve.n[i]) / nt));
      const double r = curve.var_p[i] - model;
      s += r * r;
    }
    return s;
  };
  double guess = first_crossing(curve, (1.0 - std::exp(-1.0)) * kSaturatedVariance);
  if (!(guess > 0.0)) guess = n_max;
  guess = std::max(guess, 1e-3);
  const double lo = std::log(guess) - std::log(50.0);
  const double hi = std::log(guess) + std::log(50.0);
  std::uintmax_t iters = 500;
  const auto [best, value] = boost::math::tools::brent_find_minima(sse, lo, hi, 52, iters);
  if (iters >= 500 || best - lo < 1e-6 || hi - best < 1e-6 || !std::isfinite(value)) {
    throw Error(ErrorCode::FitDiverged, "exponential transport fit did not converge");
  }
  est.N_T = std::exp(best);
  est.fit_residual = std::sqrt(value / static_cast<double>(used));
  return est;
}

double alpha(double k, const TransportEstimate& estimate) {
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha needs k > 0");
  if (!(estimate.N_T > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha needs N_T > 0");
  return 2.0 * k / estimate.N_T;
}

}  // namespace stadloc
