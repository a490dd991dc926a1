#include "stadloc/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stadloc/boundary_nodes.hpp"
#include "stadloc/error.hpp"
#include "stadloc/junction_basis.hpp"
#include "stadloc/parallel.hpp"

namespace stadloc {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> plane_wave_directions(std::size_t n) {
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta[j] = (static_cast<double>(j) + 0.5) * 0.5 * kPi / static_cast<double>(n);
  }
  return theta;
}

std::size_t basis_size(const StadiumShape& shape, double k, const SolverOptions& opts) {
  const double n = std::ceil(opts.basis_factor * k * shape.quarter_length() / (2.0 * kPi));
  return static_cast<std::size_t>(std::max<double>(n, opts.min_basis));
}

BoundaryNodes integration_nodes(const StadiumShape& shape, double k, const SolverOptions& opts) {
  return quarter_panels(shape, opts.panel_wavelengths * 2.0 * kPi / k, opts.junction_levels);
}

// Basis layout at wavenumber k0, coefficients left empty.
ScalingState make_basis(const StadiumShape& shape, double k0, const SolverOptions& opts) {
  ScalingState b;
  b.k = k0;
  b.directions = plane_wave_directions(basis_size(shape, k0, opts));
  if (shape.epsilon() > 0.0) b.junction_orders = opts.junction_orders;
  b.junction = Vec2(0.5 * shape.epsilon(), 1.0);
  return b;
}

std::size_t basis_count(const ScalingState& b) { return b.directions.size() + b.junction_orders.size(); }

// Values and gradients of every basis function at r.
void basis_at(const ScalingState& b, const Vec2& r, double* f, Vec2* g) {
  const double k = b.k;
  const std::size_t np = b.directions.size();
  for (std::size_t j = 0; j < np; ++j) {
    const double c = std::cos(b.directions[j]);
    const double s = std::sin(b.directions[j]);
    const double ax = k * c * r.x();
    const double ay = k * s * r.y();
    const double sx = std::sin(ax), cx = std::cos(ax);
    const double sy = std::sin(ay), cy = std::cos(ay);
    f[j] = sx * sy;
    g[j] = Vec2(k * c * cx * sy, k * s * sx * cy);
  }
  const std::size_t nj = b.junction_orders.size();
  if (nj == 0) return;
  JunctionFunction w;
  w.center = b.junction;
  std::vector<double> fv(nj);
  std::vector<Vec2> gv(nj);
  for (std::size_t i = 0; i < nj; ++i) {
    f[np + i] = 0.0;
    g[np + i] = Vec2::Zero();
  }
  // Odd-odd images: W(Rr) with sign det-like parity, gradient R grad W(Rr).
  for (const auto& [sx, sy] : {std::pair{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}}) {
    const double sign = sx * sy;
    w.evaluate(k, Vec2(sx * r.x(), sy * r.y()), b.junction_orders, fv.data(), gv.data());
    for (std::size_t i = 0; i < nj; ++i) {
      f[np + i] += sign * fv[i];
      g[np + i] += sign * Vec2(sx * gv[i].x(), sy * gv[i].y());
    }
  }
}

// Basis values and scaling derivatives r . grad phi at the nodes.
void evaluate_basis(const BoundaryNodes& nodes, const ScalingState& b, Eigen::MatrixXd& phi,
                    Eigen::MatrixXd& scaled) {
  const auto rows = static_cast<Eigen::Index>(nodes.size());
  const std::size_t m = basis_count(b);
  phi.resize(rows, static_cast<Eigen::Index>(m));
  scaled.resize(rows, static_cast<Eigen::Index>(m));
  std::vector<double> f(m);
  std::vector<Vec2> g(m);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec2& r = nodes.position[static_cast<std::size_t>(i)];
    basis_at(b, r, f.data(), g.data());
    for (std::size_t j = 0; j < m; ++j) {
      phi(i, static_cast<Eigen::Index>(j)) = f[j];
      scaled(i, static_cast<Eigen::Index>(j)) = r.dot(g[j]);
    }
  }
}

struct ScalingEigen {
  Eigen::VectorXd eta;      // generalized eigenvalues; k_n = k0 - 2 / eta
  Eigen::MatrixXd coeffs;   // basis coefficients, one column per eta
  ScalingState basis;
};

// Generalized problem  F x = lambda F' x  with F the weighted boundary Gram
// matrix and F' its k-derivative, reduced to the well-conditioned range of F.
ScalingEigen scaling_eigen(const StadiumShape& shape, double k0, const SolverOptions& opts) {
  const BoundaryNodes nodes = integration_nodes(shape, k0, opts);
  ScalingEigen out;
  out.basis = make_basis(shape, k0, opts);

  Eigen::MatrixXd phi, scaled;
  evaluate_basis(nodes, out.basis, phi, scaled);
  Eigen::VectorXd w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] = nodes.weight[i] / nodes.position[i].dot(nodes.normal[i]);
  }
  const Eigen::MatrixXd wphi = w.asDiagonal() * phi;
  const Eigen::MatrixXd gram = phi.transpose() * wphi;
  Eigen::MatrixXd dgram = scaled.transpose() * wphi;
  dgram = (dgram + dgram.transpose()).eval() / k0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram);
  if (gram_eig.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditioned, "Gram eigendecomposition failed");
  }
  const Eigen::VectorXd& g = gram_eig.eigenvalues();
  const double cutoff = opts.regularization * g.maxCoeff();
  Eigen::Index first = 0;
  while (first < g.size() && g[first] <= cutoff) ++first;
  const Eigen::Index rank = g.size() - first;
  const double needed = 0.5 * k0 * shape.quarter_length() / kPi;
  if (rank <= 0 || static_cast<double>(rank) < std::min(needed, 0.5 * static_cast<double>(g.size()))) {
    throw Error(ErrorCode::IllConditioned, "plane-wave Gram matrix rank " + std::to_string(rank) +
                                               " too small at k=" + std::to_string(k0));
  }
  const Eigen::MatrixXd y =
      gram_eig.eigenvectors().rightCols(rank) *
      g.tail(rank).cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::MatrixXd reduced = y.transpose() * dgram * y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> red_eig(reduced);
  if (red_eig.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditioned, "reduced eigendecomposition failed");
  }
  out.eta = red_eig.eigenvalues();
  out.coeffs = y * red_eig.eigenvectors();
  return out;
}

struct RefinedLevel {
  double k = 0.0;
  double tension = 0.0;
  ScalingState state;
};

double weighted_boundary_sum(const BoundaryNodes& nodes, const ScalingState& st, bool residual) {
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (residual) {
      const double v = st.value(nodes.position[i]);
      total += nodes.weight[i] * v * v;
    } else {
      const double u = st.gradient(nodes.position[i]).dot(nodes.normal[i]);
      total += nodes.weight[i] * nodes.position[i].dot(nodes.normal[i]) * u * u;
    }
  }
  return total;
}

// Re-centres the scaling solve slightly off the current estimate and keeps the
// generalized eigenvalue nearest to it. Centring exactly on a level would push
// its Gram eigenvalue below the regularization cutoff.
RefinedLevel refine_level(const StadiumShape& shape, double k_guess, const SolverOptions& opts) {
  double k = k_guess;
  ScalingEigen eig;
  Eigen::Index best = 0;
  for (const double offset : opts.refine_offsets) {
    const double k0 = k + offset;
    eig = scaling_eigen(shape, k0, opts);
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig.eta.size(); ++i) {
      const double d = std::abs(k0 - 2.0 / eig.eta[i] - k);
      if (d < nearest) {
        nearest = d;
        best = i;
      }
    }
    k = k0 - 2.0 / eig.eta[best];
  }
  if (opts.refine_offsets.empty()) {
    eig = scaling_eigen(shape, k, opts);
    eig.eta.cwiseAbs().maxCoeff(&best);
  }
  RefinedLevel out;
  out.k = k;
  // Basis functions are functions of k r; junction functions keep their
  // centre at k0 c in scaled coordinates.
  out.state = eig.basis;
  out.state.junction *= eig.basis.k / k;
  out.state.k = k;
  const Eigen::VectorXd c = eig.coeffs.col(best);
  out.state.coefficients.assign(c.data(), c.data() + c.size());

  // Rellich: \oint (r.n) u^2 ds = 2 k^2 for a unit-norm interior state.
  const BoundaryNodes nodes = integration_nodes(shape, k, opts);
  const double rellich = weighted_boundary_sum(nodes, out.state, false);
  const double scale = std::sqrt(2.0 * k * k / rellich);
  for (double& v : out.state.coefficients) v *= scale;
  out.tension = weighted_boundary_sum(nodes, out.state, true);
  return out;
}

BoundaryFunction sample_boundary(const StadiumShape& shape, const ScalingState& st,
                                 const SolverOptions& opts) {
  const auto n = static_cast<std::size_t>(
      std::ceil(opts.samples_per_wavelength * st.k * shape.quarter_length() / (2.0 * kPi)));
  const BoundaryNodes grid = quarter_midpoints(shape, n);
  BoundaryFunction bf;
  bf.k = st.k;
  bf.s = grid.s;
  bf.u.resize(n);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bf.u[i] = st.gradient(grid.position[i]).dot(grid.normal[i]);
    if (std::abs(bf.u[i]) > std::abs(bf.u[peak])) peak = i;
  }
  if (bf.u[peak] < 0.0) {
    for (double& v : bf.u) v = -v;
  }
  return bf;
}

std::vector<SolvedState> window_states(const StadiumShape& shape, double k_center,
                                       double half_width, const SolverOptions& opts,
                                       int window_id) {
  const ScalingEigen eig = scaling_eigen(shape, k_center, opts);
  std::vector<double> guesses;
  for (Eigen::Index i = 0; i < eig.eta.size(); ++i) {
    const double k = k_center - 2.0 / eig.eta[i];
    if (std::abs(k - k_center) <= 1.5 * half_width) guesses.push_back(k);
  }
  std::sort(guesses.begin(), guesses.end());

  const double tol = opts.dedupe_spacings * mean_spacing(shape, k_center);
  std::vector<SolvedState> states;
  for (const double guess : guesses) {
    RefinedLevel lvl = refine_level(shape, guess, opts);
    if (std::abs(lvl.k - k_center) > half_width) continue;
    if (!(lvl.tension <= opts.max_tension)) continue;
    const bool dup = std::any_of(states.begin(), states.end(), [&](const SolvedState& s) {
      return std::abs(s.k - lvl.k) <= tol;
    });
    if (dup) continue;
    SolvedState st;
    st.k = lvl.k;
    st.tension = lvl.tension;
    st.window_id = window_id;
    if (!opts.levels_only) st.boundary = sample_boundary(shape, lvl.state, opts);
    states.push_back(std::move(st));
  }
  std::sort(states.begin(), states.end(),
            [](const SolvedState& a, const SolvedState& b) { return a.k < b.k; });
  return states;
}

void validate_window(const StadiumShape& shape, double k_center, double half_width,
                     const SolverOptions& opts) {
  if (!(half_width > 0.0) || !(k_center - half_width > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "scaling window must satisfy k_center - half_width > 1");
  }
  if (half_width > opts.max_half_width_spacings * mean_spacing(shape, k_center)) {
    throw Error(ErrorCode::WindowTooWide,
                "half-width " + std::to_string(half_width) + " exceeds " +
                    std::to_string(opts.max_half_width_spacings) + " mean spacings");
  }
}

SpectrumWindow make_spectrum(const StadiumShape& shape, double lo, double hi,
                             const std::vector<SolvedState>& states) {
  SpectrumWindow w;
  w.epsilon = shape.epsilon();
  w.k_lo = lo;
  w.k_hi = hi;
  w.method = SolverMethod::Scaling;
  for (const auto& s : states) {
    w.levels.push_back(s.k);
    w.window_id.push_back(s.window_id);
  }
  return w;
}

}  // namespace

std::string_view to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Scaling: return "scaling";
    case SolverMethod::Bim: return "bim";
    case SolverMethod::CircleOracle: return "circle_oracle";
  }
  return "unknown";
}

SolverMethod solver_method_from_string(std::string_view name) {
  if (name == "scaling") return SolverMethod::Scaling;
  if (name == "bim") return SolverMethod::Bim;
  if (name == "circle_oracle") return SolverMethod::CircleOracle;
  throw Error(ErrorCode::InvalidArgument, "unknown solver method " + std::string(name));
}

double ScalingState::value(const Vec2& r) const {
  const std::size_t m = basis_count(*this);
  std::vector<double> f(m);
  std::vector<Vec2> g(m);
  basis_at(*this, r, f.data(), g.data());
  double v = 0.0;
  for (std::size_t j = 0; j < m; ++j) v += coefficients[j] * f[j];
  return v;
}

Vec2 ScalingState::gradient(const Vec2& r) const {
  const std::size_t m = basis_count(*this);
  std::vector<double> f(m);
  std::vector<Vec2> g(m);
  basis_at(*this, r, f.data(), g.data());
  Vec2 v = Vec2::Zero();
  for (std::size_t j = 0; j < m; ++j) v += coefficients[j] * g[j];
  return v;
}

double weyl_constant(const StadiumShape&) {
  // (pi^2 - theta^2) / (24 pi theta) per corner with theta = pi/2, and
  // (1 / 12 pi) \int kappa ds over the quarter arc.
  return 3.0 / 16.0 + 1.0 / 24.0;
}

double weyl_count(const StadiumShape& shape, double k) {
  if (!(k >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weyl_count needs k >= 0");
  return shape.quarter_area() * k * k / (4.0 * kPi) - shape.quarter_perimeter() * k / (4.0 * kPi) +
         weyl_constant(shape);
}

double mean_spacing(const StadiumShape& shape, double k) {
  const double density = shape.quarter_area() * k / (2.0 * kPi) - shape.quarter_perimeter() / (4.0 * kPi);
  if (!(density > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "level density not positive at k=" + std::to_string(k));
  }
  return 1.0 / density;
}

ScalingState scaling_state(const StadiumShape& shape, double k_guess, const SolverOptions& opts) {
  return refine_level(shape, k_guess, opts).state;
}

WindowSolution solve_window(const StadiumShape& shape, double k_center, double half_width,
                            const SolverOptions& opts) {
  validate_window(shape, k_center, half_width, opts);
  WindowSolution out;
  out.states = window_states(shape, k_center, half_width, opts, 0);
  out.spectrum = make_spectrum(shape, k_center - half_width, k_center + half_width, out.states);
  return out;
}

WindowSolution solve_range(const StadiumShape& shape, double k_lo, double k_hi,
                           const SolverOptions& opts, int jobs) {
  if (!(k_hi > k_lo)) throw Error(ErrorCode::InvalidArgument, "empty k range");
  std::vector<double> centers, widths;
  for (double c = k_lo;;) {
    const double h = std::min(opts.half_width_spacings * mean_spacing(shape, c), opts.max_half_width);
    centers.push_back(c);
    widths.push_back(h);
    if (c + h >= k_hi) break;
    c += h;
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    validate_window(shape, centers[i], widths[i], opts);
  }

  std::vector<std::vector<SolvedState>> per_window(centers.size());
  parallel_for(centers.size(), jobs, [&](std::size_t i) {
    per_window[i] = window_states(shape, centers[i], widths[i], opts, static_cast<int>(i));
  });

  std::vector<SolvedState> all;
  for (auto& w : per_window) {
    for (auto& s : w) {
      if (s.k >= k_lo && s.k <= k_hi) all.push_back(std::move(s));
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const SolvedState& a, const SolvedState& b) { return a.k < b.k; });

  // Merge duplicates from overlapping windows, keeping the best-centred copy.
  std::vector<SolvedState> merged;
  for (auto& s : all) {
    const double tol = opts.dedupe_spacings * mean_spacing(shape, s.k);
    if (!merged.empty() && s.k - merged.back().k <= tol) {
      auto& prev = merged.back();
      const double d_prev = std::abs(prev.k - centers[static_cast<std::size_t>(prev.window_id)]);
      const double d_new = std::abs(s.k - centers[static_cast<std::size_t>(s.window_id)]);
      if (d_new < d_prev) prev = std::move(s);
      continue;
    }
    merged.push_back(std::move(s));
  }

  WindowSolution out;
  out.states = std::move(merged);
  out.spectrum = make_spectrum(shape, k_lo, k_hi, out.states);
  return out;
}

double wavefunction(const StadiumShape& shape, const BoundaryFunction& bf, const Vec2& r) {
  if (!(r.x() > 0.0 && r.y() > 0.0 && shape.contains(r))) {
    throw Error(ErrorCode::PointOnBoundary, "point is not strictly inside the quarter stadium");
  }
  if (bf.s.empty()) throw Error(ErrorCode::EmptyBoundaryFunction, "no boundary samples");
  const double h = shape.quarter_length() / static_cast<double>(bf.s.size());
  // psi = -\oint u G,  G = -(i/4) H0;  the J0 part integrates to zero.
  double total = 0.0;
  for (std::size_t i = 0; i < bf.s.size(); ++i) {
    const Vec2 t = boundary_point(shape, bf.s[i]).position;
    const double y00 = ::y0(bf.k * (r - t).norm());
    const double y10 = ::y0(bf.k * (r - Vec2(t.x(), -t.y())).norm());
    const double y01 = ::y0(bf.k * (r - Vec2(-t.x(), t.y())).norm());
    const double y11 = ::y0(bf.k * (r + t).norm());
    total += bf.u[i] * (y00 - y10 - y01 + y11);
  }
  return -0.25 * h * total;
}

}  // namespace stadloc
