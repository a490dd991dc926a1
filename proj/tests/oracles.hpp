#pragma once

// Independent reference values used only by the tests.

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>

namespace oracle {

// Zeros of J_m below x_max by scanning for sign changes and bracketed refinement.
inline std::vector<double> bessel_zeros(int m, double x_max) {
  std::vector<double> out;
  auto f = [m](double x) { return std::cyl_bessel_j(static_cast<double>(m), x); };
  const double h = 0.02;
  double x0 = 0.5 + 0.5 * m, f0 = f(x0);
  for (double x1 = x0 + h; x1 <= x_max + h; x1 += h) {
    const double f1 = f(x1);
    if (f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0)) {
      std::uintmax_t it = 200;
      const auto r = boost::math::tools::toms748_solve(f, x0, x1, f0, f1,
                                                       boost::math::tools::eps_tolerance<double>(52), it);
      const double z = 0.5 * (r.first + r.second);
      if (z <= x_max) out.push_back(z);
    }
    x0 = x1;
    f0 = f1;
  }
  return out;
}

// Odd-odd quarter-disc spectrum: zeros of J_2, J_4, ... below k_max, sorted.
inline std::vector<double> quarter_disc_levels(double k_max) {
  std::vector<double> all;
  for (int m = 2; m < k_max; m += 2) {
    const auto z = bessel_zeros(m, k_max);
    all.insert(all.end(), z.begin(), z.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

// Composite Gauss-Legendre (10 points) on [a, b] with n panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int n = 200) {
  static const double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
                              0.9739065285171717};
  static const double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                              0.0666713443086881};
  const double h = (b - a) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = a + (i + 0.5) * h;
    for (int j = 0; j < 5; ++j) {
      total += w[j] * 0.5 * h * (f(c - 0.5 * h * x[j]) + f(c + 0.5 * h * x[j]));
    }
  }
  return total;
}

}  // namespace oracle
