#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "stadloc/eigensolver.hpp"
#include "stadloc/geometry.hpp"

namespace stadloc {

struct CoherentStateSpec {
  double q = 0.0;
  double p = 0.0;
  double k = 1.0;
  double period = 1.0;
  int M = 1;
};

/// Smallest M >= 1 with k (M period)^2 / 2 > 36.
int coherent_truncation(double k, double period);

/// Sum over images m in [-M, M] of exp(i k p (s - q + m P)) exp(-k (s - q + m P)^2 / 2).
std::complex<double> coherent_state(const CoherentStateSpec& spec, double s);

/// Poincare-Husimi function on cell midpoints of q in [0, L/4] (nq rows) and
/// p in [p_min, p_max] (np columns), row-major, normalized to unit sum.
struct HusimiGrid {
  double epsilon = 0.0;
  double k = 0.0;
  std::size_t nq = 0;
  std::size_t np = 0;
  double p_min = 0.0;
  double p_max = 1.0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * np + j]; }
  std::size_t size() const { return nq * np; }
};

struct HusimiOptions {
  double p_min = 0.0;
  double p_max = 1.0;
  bool normalize = true;
};

/// Projects u(s) onto the coherent states. The quarter-boundary function is
/// first extended to the whole boundary by the odd-odd symmetry, so the
/// periodization length is the full perimeter L and the quadrant values are
/// those of the full-boundary Husimi function.
/// Needs u on the uniform midpoint grid produced by the eigensolver.
/// Throws Error(EmptyBoundaryFunction) for empty or all-zero u.
HusimiGrid husimi_grid(const StadiumShape& shape, const BoundaryFunction& bf, std::size_t nq = 400,
                       std::size_t np = 400, const HusimiOptions& opts = {}, int jobs = 1);

/// Rescales values to unit sum (a no-op for a normalized grid up to rounding).
void normalize(HusimiGrid& grid);

}  // namespace stadloc
