#include "stadloc/junction_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stadloc/error.hpp"

namespace stadloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286061;

// Power series  sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!) [log(x/2) - psi(m+n+1)].
double order_derivative_series(int n, double x) {
  const double h = 0.5 * x;
  const double lh = std::log(h);
  double harmonic = 0.0;  // H_{m+n}
  for (int j = 1; j <= n; ++j) harmonic += 1.0 / j;
  double t = std::pow(h, n) / std::tgamma(n + 1.0);
  double sum = 0.0;
  for (int m = 0; m < 400; ++m) {
    const double term = t * (lh + kEulerGamma - harmonic);
    sum += term;
    if (m > 2 && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    t *= -h * h / ((m + 1.0) * (m + n + 1.0));
    harmonic += 1.0 / (m + n + 1.0);
  }
  return sum;
}

// Closed form (pi/2) Y_n + (n!/2) (x/2)^-n sum_{j<n} (x/2)^j J_j / (j! (n-j)).
double order_derivative_closed(int n, double x, const double* jv, const double* yv) {
  const double h = 0.5 * x;
  double sum = 0.0;
  double scale = std::tgamma(n + 1.0) / 2.0 * std::pow(h, -n);
  double hp = 1.0, fact = 1.0;
  for (int j = 0; j < n; ++j) {
    sum += hp * jv[j] / (fact * (n - j));
    hp *= h;
    fact *= j + 1;
  }
  return 0.5 * kPi * yv[n] + scale * sum;
}

}  // namespace

double bessel_j_order_derivative(int n, double x) {
  if (n < 0 || !(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "order derivative needs n >= 0, x > 0");
  if (x < 2.0 + n) return order_derivative_series(n, x);
  std::vector<double> jv(static_cast<std::size_t>(n) + 1), yv(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    jv[static_cast<std::size_t>(j)] = ::jn(j, x);
    yv[static_cast<std::size_t>(j)] = ::yn(j, x);
  }
  return order_derivative_closed(n, x, jv.data(), yv.data());
}

void JunctionFunction::evaluate(double k, const Vec2& r, const std::vector<int>& orders,
                                double* value, Vec2* gradient) const {
  if (orders.empty()) return;
  const Vec2 d = r - center;
  const double a = d.dot(wall);
  const double b = d.dot(inward);
  const double rho = std::hypot(a, b);
  if (rho == 0.0) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      value[i] = 0.0;
      gradient[i] = Vec2::Zero();
    }
    return;
  }
  double phi = std::atan2(b, a);
  if (phi < -0.5 * kPi) phi += 2.0 * kPi;  // cut along -inward, outside the billiard
  const double x = k * rho;
  const int top = *std::max_element(orders.begin(), orders.end()) + 1;

  std::vector<double> jv(static_cast<std::size_t>(top) + 1), yv(static_cast<std::size_t>(top) + 1);
  std::vector<double> dj(static_cast<std::size_t>(top) + 1);
  for (int j = 0; j <= top; ++j) {
    jv[static_cast<std::size_t>(j)] = ::jn(j, x);
    yv[static_cast<std::size_t>(j)] = ::yn(j, x);
  }
  for (int j = 0; j <= top; ++j) {
    dj[static_cast<std::size_t>(j)] =
        x < 2.0 + j ? order_derivative_series(j, x) : order_derivative_closed(j, x, jv.data(), yv.data());
  }

  const Vec2 e_rho = (a * wall + b * inward) / rho;
  const Vec2 e_phi = (-b * wall + a * inward) / rho;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const int n = orders[i];
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "junction orders start at 1");
    const auto un = static_cast<std::size_t>(n);
    const double s = std::sin(n * phi), c = std::cos(n * phi);
    const double jn_ = jv[un];
    const double jp = 0.5 * (jv[un - 1] - jv[un + 1]);
    const double ap = 0.5 * (dj[un - 1] - dj[un + 1]);
    value[i] = dj[un] * s + phi * jn_ * c;
    const double d_rho = k * (ap * s + phi * jp * c);
    const double d_phi = n * dj[un] * c + jn_ * c - n * phi * jn_ * s;
    gradient[i] = d_rho * e_rho + (d_phi / rho) * e_phi;
  }
}

}  // namespace stadloc
