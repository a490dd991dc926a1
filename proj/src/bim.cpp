#include "stadloc/bim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cstdint>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <tuple>

#include "stadloc/boundary_nodes.hpp"
#include "stadloc/error.hpp"
#include "stadloc/parallel.hpp"

namespace stadloc {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

struct Image {
  double sx, sy, sign;
};
// Odd-odd images: identity, reflections in each axis, inversion.
constexpr Image kImages[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};

BoundaryNodes bim_nodes(const StadiumShape& shape, double k, const BimOptions& opts) {
  return quarter_panels(shape, opts.panel_wavelengths * 2.0 * kPi / k, opts.junction_levels);
}

cd kernel_term(double k, const Vec2& x, const Vec2& n, const Vec2& t_image) {
  const Vec2 r = x - t_image;
  const double rho = r.norm();
  const double z = k * rho;
  return cd(0.0, -0.5 * k) * cd(::j1(z), ::y1(z)) * (n.dot(r) / rho);
}

Vec2 mirrored(const Image& im, const Vec2& t) { return {im.sx * t.x(), im.sy * t.y()}; }

// Product-integration data for a target node close to one image of a panel:
// fine quadrature points (already mirrored) and the panel's Lagrange basis
// times the fine weights, so that the panel contributes
// sum_m K(x, t_m) * lagrange(m, j) to column j.
struct NearBlock {
  std::size_t target = 0;
  std::size_t panel = 0;
  int image = 0;
  std::vector<Vec2> points;
  Eigen::MatrixXd lagrange;  // fine points x panel nodes, weights folded in
};

struct Discretization {
  BoundaryNodes nodes;
  std::vector<NearBlock> near;
  std::vector<std::uint8_t> near_mask;  // (target, panel) -> image bits
};

std::array<double, kPanelOrder> reference_nodes() {
  std::array<double, kPanelOrder> x{};
  const auto& half = boost::math::quadrature::gauss<double, kPanelOrder>::abscissa();
  const std::size_t h = half.size();
  for (std::size_t i = 0; i < h; ++i) {
    x[h - 1 - i] = -half[i];
    x[h + i] = half[i];
  }
  return x;
}

// Values at x in [-1, 1] of the Lagrange basis on the panel nodes.
std::array<double, kPanelOrder> lagrange_basis(double x) {
  static const auto xref = reference_nodes();
  static const auto bary = [] {
    std::array<double, kPanelOrder> b{};
    for (std::size_t j = 0; j < kPanelOrder; ++j) {
      double prod = 1.0;
      for (std::size_t m = 0; m < kPanelOrder; ++m) {
        if (m != j) prod *= xref[j] - xref[m];
      }
      b[j] = 1.0 / prod;
    }
    return b;
  }();
  std::array<double, kPanelOrder> out{};
  for (std::size_t j = 0; j < kPanelOrder; ++j) {
    if (x == xref[j]) {
      out[j] = 1.0;
      return out;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < kPanelOrder; ++j) {
    out[j] = bary[j] / (x - xref[j]);
    denom += out[j];
  }
  for (double& v : out) v /= denom;
  return out;
}

// Graded Gauss-Legendre points on [a, b] clustered toward `toward` (a or b).
void graded_points(double a, double b, double toward, int levels, std::vector<double>& s,
                   std::vector<double>& w) {
  using Rule = boost::math::quadrature::gauss<double, kPanelOrder>;
  std::vector<double> cuts{0.0};
  for (int l = levels; l >= 1; --l) cuts.push_back(std::ldexp(1.0, -l));
  cuts.push_back(1.0);
  const double len = b - a;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double u0 = cuts[c], u1 = cuts[c + 1];
    const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
    for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
      for (const double sign : {-1.0, 1.0}) {
        const double u = mid + sign * half * Rule::abscissa()[i];
        s.push_back(toward == a ? a + u * len : b - u * len);
        w.push_back(half * Rule::weights()[i] * len);
      }
    }
  }
}

Discretization build_discretization(const StadiumShape& shape, double k, const BimOptions& opts) {
  Discretization d;
  d.nodes = bim_nodes(shape, k, opts);
  const std::size_t n = d.nodes.size();
  const std::size_t np = d.nodes.panels.size();
  d.near_mask.assign(n * np, 0);
  constexpr int kSelfGrading = 6;
  constexpr int kNeighbourGrading = 4;

  for (std::size_t p = 0; p < np; ++p) {
    const auto [pa, pb] = d.nodes.panels[p];
    const double len = pb - pa;
    const Vec2 ea = boundary_point(shape, pa).position;
    const Vec2 eb = boundary_point(shape, pb).position;
    for (std::size_t i = 0; i < n; ++i) {
      for (int q = 0; q < 4; ++q) {
        const Image& im = kImages[q];
        // Distance from the target to the mirrored panel, from its nodes and ends.
        double dist = std::min((d.nodes.position[i] - mirrored(im, ea)).norm(),
                               (d.nodes.position[i] - mirrored(im, eb)).norm());
        for (std::size_t j = 0; j < kPanelOrder; ++j) {
          dist = std::min(dist, (d.nodes.position[i] - mirrored(im, d.nodes.position[p * kPanelOrder + j])).norm());
        }
        if (dist > opts.near_panels * len) continue;

        NearBlock blk;
        blk.target = i;
        blk.panel = p;
        blk.image = q;
        std::vector<double> fs, fw;
        const bool inside = q == 0 && i / kPanelOrder == p;
        if (inside) {
          graded_points(pa, d.nodes.s[i], d.nodes.s[i], kSelfGrading, fs, fw);
          graded_points(d.nodes.s[i], pb, d.nodes.s[i], kSelfGrading, fs, fw);
        } else {
          // Cluster toward the panel end nearest the target.
          const double da = (d.nodes.position[i] - mirrored(im, ea)).norm();
          const double db = (d.nodes.position[i] - mirrored(im, eb)).norm();
          graded_points(pa, pb, da < db ? pa : pb, kNeighbourGrading, fs, fw);
        }
        blk.points.resize(fs.size());
        blk.lagrange.resize(static_cast<Eigen::Index>(fs.size()), kPanelOrder);
        for (std::size_t m = 0; m < fs.size(); ++m) {
          blk.points[m] = mirrored(im, boundary_point(shape, fs[m]).position);
          const auto basis = lagrange_basis((2.0 * fs[m] - pa - pb) / len);
          for (std::size_t j = 0; j < kPanelOrder; ++j) {
            blk.lagrange(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) =
                im.sign * fw[m] * basis[j];
          }
        }
        d.near_mask[i * np + p] |= static_cast<std::uint8_t>(1u << q);
        d.near.push_back(std::move(blk));
      }
    }
  }
  return d;
}

Eigen::MatrixXcd weighted_operator(const Discretization& d, double k) {
  const BoundaryNodes& nodes = d.nodes;
  const std::size_t np = nodes.panels.size();
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw[i] = std::sqrt(nodes.weight[static_cast<std::size_t>(i)]);
  // Unweighted Nystrom matrix K w first; near blocks replace plain quadrature.
  // |x_i - R x_j| = |x_j - R x_i| for every image R, so each Hankel value serves
  // both (i, j) and (j, i).
  Eigen::MatrixXcd kw = Eigen::MatrixXcd::Zero(n, n);
  const cd factor(0.0, -0.5 * k);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const std::size_t pj = j / kPanelOrder;
    for (std::size_t i = 0; i <= j; ++i) {
      const std::size_t pi = i / kPanelOrder;
      const std::uint8_t mask_ij = d.near_mask[i * np + pj];
      const std::uint8_t mask_ji = d.near_mask[j * np + pi];
      cd sum_ij = 0.0, sum_ji = 0.0;
      for (int q = 0; q < 4; ++q) {
        const std::uint8_t bit = static_cast<std::uint8_t>(1u << q);
        if ((mask_ij & bit) && (mask_ji & bit)) continue;
        const Image& im = kImages[q];
        const Vec2 r = nodes.position[i] - mirrored(im, nodes.position[j]);
        const double rho = r.norm();
        const double z = k * rho;
        const cd h = im.sign * factor * cd(::j1(z), ::y1(z)) / rho;
        if (!(mask_ij & bit)) sum_ij += h * nodes.normal[i].dot(r);
        if (!(mask_ji & bit)) sum_ji -= h * nodes.normal[j].dot(mirrored(im, r));
      }
      kw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum_ij * nodes.weight[j];
      if (i != j) kw(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = sum_ji * nodes.weight[i];
    }
  }
  for (const NearBlock& blk : d.near) {
    const Vec2& x = nodes.position[blk.target];
    const Vec2& nx = nodes.normal[blk.target];
    Eigen::VectorXcd kv(static_cast<Eigen::Index>(blk.points.size()));
    for (std::size_t m = 0; m < blk.points.size(); ++m) {
      kv[static_cast<Eigen::Index>(m)] = kernel_term(k, x, nx, blk.points[m]);
    }
    const Eigen::RowVectorXcd row = kv.transpose() * blk.lagrange;
    kw.block(static_cast<Eigen::Index>(blk.target), static_cast<Eigen::Index>(blk.panel * kPanelOrder), 1,
             kPanelOrder) += row;
  }
  // Symmetric weighting: sqrt(w_i) K_ij sqrt(w_j) = sqrt(w_i) (K w)_ij / sqrt(w_j).
  Eigen::MatrixXcd a = -(sw.asDiagonal() * kw * sw.cwiseInverse().asDiagonal()).eval();
  a.diagonal().array() += 1.0;
  return a;
}

// Two smallest singular values by inverse subspace iteration on A^H A with one
// LU factorization; much cheaper than a full SVD and just as accurate for the
// small end of the spectrum.
SingularPair smallest_two(const Eigen::MatrixXcd& a) {
  constexpr Eigen::Index kBlock = 4;
  constexpr int kIterations = 8;
  const Eigen::Index n = a.rows();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const Eigen::MatrixXcd ah = a.adjoint();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> luh(ah);
  const Eigen::Index b = std::min(kBlock, n);
  // Fixed, smooth start block keeps every evaluation deterministic.
  Eigen::MatrixXcd x(n, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, j) = cd(std::cos(0.7 * (i + 1) * (j + 1)), std::sin(1.3 * (i + 1) + j));
    }
  }
  for (int it = 0; it < kIterations; ++it) {
    const Eigen::MatrixXcd y = luh.solve(lu.solve(x));
    x = Eigen::HouseholderQR<Eigen::MatrixXcd>(y).householderQ() * Eigen::MatrixXcd::Identity(n, b);
  }
  // Rayleigh-Ritz: singular values of A^{-1} on the converged subspace.
  const Eigen::MatrixXcd z = lu.solve(x);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(z);
  const Eigen::VectorXd& t = svd.singularValues();
  return {1.0 / t[0], b > 1 ? 1.0 / t[1] : 1.0 / t[0]};
}

struct Minimum {
  double k;
  double sigma;
};

double parabola_vertex(double x0, double f0, double x1, double f1, double x2, double f2) {
  const double d01 = (f1 - f0) / (x1 - x0);
  const double d12 = (f2 - f1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);
  if (!(curv > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * (x0 + x1) - 0.5 * d01 / curv;
}

template <class F>
bool vertex_iterations(F&& f, double a, double b, std::vector<std::pair<double, double>>& pts,
                       const BimOptions& opts) {
  bool ok = false;
  for (int it = 0; it < 12; ++it) {
    std::sort(pts.begin(), pts.end(),
              [](const auto& p, const auto& q) { return p.second < q.second; });
    std::array<std::pair<double, double>, 3> best{pts[0], pts[1], pts[2]};
    std::sort(best.begin(), best.end());
    const double next = parabola_vertex(best[0].first, best[0].second, best[1].first,
                                        best[1].second, best[2].first, best[2].second);
    if (!std::isfinite(next) || next <= a || next >= b) break;
    const double shift = std::abs(next - pts[0].first);
    pts.emplace_back(next, f(next));
    if (shift < opts.k_tolerance * next) {
      ok = true;
      break;
    }
  }
  return ok;
}

// Near an isolated level sigma_min^2 = c^2 (k - k*)^2 + floor^2 exactly, so
// vertex fits through the three lowest samples converge in a few steps. Brent
// is the fallback.
Minimum refine_minimum(const Discretization& disc, double a, double m, double b, double fa,
                       double fm, double fb, const BimOptions& opts) {
  auto f = [&](double k) {
    const double s = smallest_two(weighted_operator(disc, k)).first;
    return s * s;
  };
  std::vector<std::pair<double, double>> pts{{a, fa * fa}, {m, fm * fm}, {b, fb * fb}};
  bool ok = vertex_iterations(f, a, b, pts, opts);
  std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) { return p.second < q.second; });
  double k = pts[0].first, s2 = pts[0].second;
  if (!ok) {
    // Brent alone stops near 1e-8 relative (half the mantissa); restart the vertex fits
    // from a tight bracket around its answer.
    std::uintmax_t iters = 100;
    std::tie(k, s2) = boost::math::tools::brent_find_minima(f, a, b, 26, iters);
    const double d = std::min({4e-8 * k, k - a, b - k});
    if (d > 0.0) {
      std::vector<std::pair<double, double>> tight{{k - d, f(k - d)}, {k, s2}, {k + d, f(k + d)}};
      vertex_iterations(f, k - d, k + d, tight, opts);
      std::sort(tight.begin(), tight.end(), [](const auto& p, const auto& q) { return p.second < q.second; });
      if (tight[0].second <= s2) std::tie(k, s2) = tight[0];
    }
  }
  return {k, std::sqrt(std::max(s2, 0.0))};
}

// Near a close pair sigma_1 sigma_2 ~ c |k - k1| |k - k2|, so dividing out the
// known zero k1 leaves a V-shaped function whose minimum is the partner k2.
Minimum find_partner(const Discretization& disc, double k1, double half, const BimOptions& opts) {
  auto pair_at = [&](double k) { return smallest_two(weighted_operator(disc, k)); };
  auto deflated = [&](double k) {
    const SingularPair s = pair_at(k);
    return s.first * s.second / std::abs(k - k1);
  };
  constexpr int kProbe = 24;
  const double dk = 2.0 * half / kProbe;
  double best_k = k1, best_h = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kProbe; ++j) {
    const double k = k1 - half + (j + 0.5) * dk;
    const double h = deflated(k);
    if (h < best_h) {
      best_h = h;
      best_k = k;
    }
  }
  std::uintmax_t iters = 100;
  double k2 = boost::math::tools::brent_find_minima(deflated, best_k - dk, best_k + dk, 30, iters).first;
  // Polish on sigma_1 itself, as for any other level: walk downhill until bracketed.
  double d = std::max(std::min(0.25 * dk, std::abs(k2 - k1) / 3.0), 1e-9 * k2);
  double fm = pair_at(k2).first;
  for (int it = 0; it < 20; ++it) {
    const double fa = pair_at(k2 - d).first, fb = pair_at(k2 + d).first;
    if (fm <= fa && fm <= fb) return refine_minimum(disc, k2 - d, k2, k2 + d, fa, fm, fb, opts);
    if (fa < fb) {
      k2 -= d;
      fm = fa;
    } else {
      k2 += d;
      fm = fb;
    }
  }
  return {k2, fm};
}

}  // namespace

SingularPair bim_singular_values(const StadiumShape& shape, double k, const BimOptions& opts) {
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "BIM needs k > 0");
  return smallest_two(weighted_operator(build_discretization(shape, k, opts), k));
}

BimResult bim_levels(const StadiumShape& shape, double k_lo, double k_hi, const BimOptions& opts,
                     int jobs) {
  constexpr double kClusterSteps = 6.0;
  if (!(k_hi > k_lo) || !(k_lo > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad BIM k range");
  // Scan one step past each end so that boundary levels are bracketed.
  std::vector<double> grid;
  {
    double k = std::max(k_lo - opts.scan_step_spacings * mean_spacing(shape, k_lo), 0.5 * k_lo);
    grid.push_back(k);
    while (k < k_hi) {
      k += opts.scan_step_spacings * mean_spacing(shape, k);
      grid.push_back(k);
    }
  }
  // One discretization, resolved for the top of the range, serves the whole scan
  // so that sigma_min is a continuous function of k.
  const Discretization disc = build_discretization(shape, grid.back(), opts);
  auto sigma = [&](double k) { return smallest_two(weighted_operator(disc, k)); };
  std::vector<SingularPair> sv(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { sv[i] = sigma(grid[i]); });

  std::vector<std::size_t> dips;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (sv[i].first <= sv[i - 1].first && sv[i].first < sv[i + 1].first) dips.push_back(i);
  }

  std::vector<std::vector<double>> found(dips.size());
  parallel_for(dips.size(), jobs, [&](std::size_t d) {
    const std::size_t i = dips[d];
    const double a = grid[i - 1], b = grid[i + 1];
    const double shoulder = std::max(sv[i - 1].first, sv[i + 1].first);
    const Minimum m =
        refine_minimum(disc, a, grid[i], b, sv[i - 1].first, sv[i].first, sv[i + 1].first, opts);
    if (!(m.sigma < opts.accept_ratio * shoulder)) return;
    found[d].push_back(m.k);
    // A small second singular value means another level within a few scan steps;
    // such a partner need not show up as a separate scan minimum.
    const SingularPair at = sigma(m.k);
    const double h = 0.5 * (b - a);
    // sigma_1 grows like slope * |k - level|; the slope converts sigma_2 to a distance.
    const double slope = 0.5 * (sv[i - 1].first / std::abs(a - m.k) + sv[i + 1].first / std::abs(b - m.k));
    if (at.second < kClusterSteps * h * slope) {
      // Levels about two scan steps apart can alias away; rescan finer.
      const int n = 4 * static_cast<int>(kClusterSteps) * 2;
      const double lo = m.k - kClusterSteps * h, step = 2.0 * kClusterSteps * h / n;
      std::vector<double> ks(static_cast<std::size_t>(n) + 1), fs(ks.size());
      for (std::size_t j = 0; j < ks.size(); ++j) {
        ks[j] = lo + static_cast<double>(j) * step;
        fs[j] = sigma(ks[j]).first;
      }
      for (std::size_t j = 1; j + 1 < ks.size(); ++j) {
        if (!(fs[j] <= fs[j - 1] && fs[j] < fs[j + 1])) continue;
        if (std::abs(ks[j] - m.k) < step) continue;
        const Minimum f = refine_minimum(disc, ks[j - 1], ks[j], ks[j + 1], fs[j - 1], fs[j], fs[j + 1], opts);
        if (f.sigma < opts.accept_ratio * std::max(fs[j - 1], fs[j + 1])) found[d].push_back(f.k);
      }
    }
    if (!(at.second < 3.0 * shoulder)) return;
    const Minimum extra = find_partner(disc, m.k, 1.5 * (b - a), opts);
    if (!(extra.sigma < opts.accept_ratio * shoulder) || std::abs(extra.k - m.k) < 1e-9 * m.k) return;
    // Separate zeros have sigma_1 rising well above both floors between them.
    const double between = sigma(0.5 * (extra.k + m.k)).first;
    if (between > 10.0 * std::max(extra.sigma, m.sigma)) found[d].push_back(extra.k);
  });

  std::vector<double> levels;
  for (const auto& f : found) {
    for (const double k : f) {
      if (k >= k_lo && k <= k_hi) levels.push_back(k);
    }
  }
  std::sort(levels.begin(), levels.end());
  // Refinements from neighbouring brackets can land on the same zero.
  std::vector<double> unique;
  for (const double k : levels) {
    if (unique.empty() || k - unique.back() > 1e-9 * k) unique.push_back(k);
  }

  BimResult out;
  out.spectrum.epsilon = shape.epsilon();
  out.spectrum.k_lo = k_lo;
  out.spectrum.k_hi = k_hi;
  out.spectrum.method = SolverMethod::Bim;
  out.spectrum.levels = std::move(unique);
  out.weyl_expected = weyl_count(shape, k_hi) - weyl_count(shape, k_lo);
  out.missed_level_suspected =
      std::abs(static_cast<double>(out.spectrum.levels.size()) - out.weyl_expected) > 2.0;
  return out;
}

BoundaryFunction bim_boundary_function(const StadiumShape& shape, double k, std::size_t n_samples,
                                       const BimOptions& opts) {
  if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "empty sample grid");
  const Discretization disc = build_discretization(shape, k, opts);
  const BoundaryNodes& nodes = disc.nodes;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(weighted_operator(disc, k), Eigen::ComputeFullV);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  // Right singular vector of the weighted system is sqrt(w) u.
  Eigen::VectorXcd u = svd.matrixV().col(n - 1);
  for (Eigen::Index j = 0; j < n; ++j) u[j] /= std::sqrt(nodes.weight[static_cast<std::size_t>(j)]);

  // Rotate the arbitrary global phase onto the real axis.
  const cd phase = std::sqrt(u.cwiseProduct(u).sum());
  const cd rot = std::abs(phase) > 0.0 ? std::conj(phase) / std::abs(phase) : cd(1.0);
  std::vector<double> ur(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) ur[j] = (u[static_cast<Eigen::Index>(j)] * rot).real();

  double rellich = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    rellich += nodes.weight[j] * nodes.position[j].dot(nodes.normal[j]) * ur[j] * ur[j];
  }
  if (!(rellich > 0.0)) throw Error(ErrorCode::EmptyBoundaryFunction, "BIM null vector vanishes");
  const double scale = std::sqrt(2.0 * k * k / rellich);

  // Panel-wise polynomial interpolation onto the midpoint grid.
  const BoundaryNodes grid = quarter_midpoints(shape, n_samples);
  BoundaryFunction bf;
  bf.k = k;
  bf.s = grid.s;
  bf.u.resize(n_samples);
  std::size_t p = 0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    while (p + 1 < nodes.panels.size() && bf.s[i] > nodes.panels[p].second) ++p;
    const auto [pa, pb] = nodes.panels[p];
    const auto basis = lagrange_basis((2.0 * bf.s[i] - pa - pb) / (pb - pa));
    double v = 0.0;
    for (std::size_t j = 0; j < kPanelOrder; ++j) v += basis[j] * ur[p * kPanelOrder + j];
    bf.u[i] = scale * v;
    if (std::abs(bf.u[i]) > std::abs(bf.u[peak])) peak = i;
  }
  if (bf.u[peak] < 0.0) {
    for (double& v : bf.u) v = -v;
  }
  return bf;
}

}  // namespace stadloc
