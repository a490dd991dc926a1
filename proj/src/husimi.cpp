#include "stadloc/husimi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stadloc/error.hpp"
#include "stadloc/parallel.hpp"

namespace stadloc {

namespace {

// Gaussian factor exp(-k d^2 / 2) is below e^-36 outside this half-width.
double window_half_width(double k) { return std::sqrt(72.0 / k); }

}  // namespace

int coherent_truncation(double k, double period) {
  if (!(k > 0.0) || !(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "coherent state needs k, period > 0");
  int M = 1;
  while (k * (M * period) * (M * period) / 2.0 <= 36.0) ++M;
  return M;
}

std::complex<double> coherent_state(const CoherentStateSpec& spec, double s) {
  std::complex<double> sum = 0.0;
  for (int m = -spec.M; m <= spec.M; ++m) {
    const double d = s - spec.q + m * spec.period;
    sum += std::polar(std::exp(-0.5 * spec.k * d * d), spec.k * spec.p * d);
  }
  return sum;
}

void normalize(HusimiGrid& grid) {
  const double total = std::accumulate(grid.values.begin(), grid.values.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::NotNormalized, "Husimi grid has zero mass");
  for (double& v : grid.values) v /= total;
}

HusimiGrid husimi_grid(const StadiumShape& shape, const BoundaryFunction& bf, std::size_t nq, std::size_t np,
                       const HusimiOptions& opts, int jobs) {
  const std::size_t n = bf.u.size();
  if (n == 0 || bf.s.size() != n) throw Error(ErrorCode::EmptyBoundaryFunction, "boundary function has no samples");
  if (std::all_of(bf.u.begin(), bf.u.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::EmptyBoundaryFunction, "boundary function is identically zero");
  }
  if (nq == 0 || np == 0) throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  if (!(bf.k > 0.0)) throw Error(ErrorCode::InvalidArgument, "boundary function needs k > 0");
  if (!(opts.p_max > opts.p_min)) throw Error(ErrorCode::InvalidArgument, "empty momentum range");

  const double L = shape.perimeter();
  const double quarter = 0.25 * L;
  const double h = quarter / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(bf.s[i] - (static_cast<double>(i) + 0.5) * h) > 1e-9 * L) {
      throw Error(ErrorCode::InvalidArgument, "boundary function must be sampled on the uniform midpoint grid");
    }
  }

  // Odd-odd extension: u(L/2 - s) = -u(s), u(s + L/2) = u(s).
  const std::size_t total = 4 * n;
  std::vector<double> ext(total);
  for (std::size_t r = 0; r < n; ++r) {
    ext[r] = bf.u[r];
    ext[n + r] = -bf.u[n - 1 - r];
    ext[2 * n + r] = bf.u[r];
    ext[3 * n + r] = -bf.u[n - 1 - r];
  }

  const double k = bf.k;
  const double half = window_half_width(k);
  const auto reach = static_cast<long>(std::ceil(half / h)) + 1;
  const double dq = quarter / static_cast<double>(nq);
  const double dp = (opts.p_max - opts.p_min) / static_cast<double>(np);

  HusimiGrid grid;
  grid.epsilon = shape.epsilon();
  grid.k = k;
  grid.nq = nq;
  grid.np = np;
  grid.p_min = opts.p_min;
  grid.p_max = opts.p_max;
  grid.values.assign(nq * np, 0.0);

  parallel_for(nq, jobs, [&](std::size_t i) {
    const double q = (static_cast<double>(i) + 0.5) * dq;
    const auto centre = static_cast<long>(std::floor(q / h));
    // Window samples wrap around the full boundary, which sums the periodic images.
    std::vector<std::complex<double>> z, step;
    z.reserve(static_cast<std::size_t>(2 * reach + 1));
    step.reserve(z.capacity());
    for (long j = centre - reach; j <= centre + reach; ++j) {
      const double d = (static_cast<double>(j) + 0.5) * h - q;
      if (std::abs(d) > half) continue;
      const long w = ((j % static_cast<long>(total)) + static_cast<long>(total)) % static_cast<long>(total);
      const double amp = std::exp(-0.5 * k * d * d) * ext[static_cast<std::size_t>(w)] * h;
      const double p0 = opts.p_min + 0.5 * dp;
      // conj(c) u: the sign of the phase only mirrors p for real u.
      z.push_back(std::polar(amp, -k * p0 * d));
      step.push_back(std::polar(1.0, -k * dp * d));
    }
    double* row = grid.values.data() + i * np;
    for (std::size_t jp = 0; jp < np; ++jp) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < z.size(); ++t) {
        acc += z[t];
        z[t] *= step[t];
      }
      row[jp] = std::norm(acc);
    }
  });

  if (opts.normalize) normalize(grid);
  return grid;
}

}  // namespace stadloc
