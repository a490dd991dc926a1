#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "stadloc/geometry.hpp"

namespace stadloc {

/// Ensemble momentum variance <p^2> after n collisions.
struct DiffusionCurve {
  double epsilon = 0.0;
  std::vector<std::size_t> n;
  std::vector<double> var_p;
  std::size_t n_particles = 0;
  std::uint64_t seed = 0;
};

enum class TransportCriterion { F50, F70, F80, F90, ExpModel };

std::string_view to_string(TransportCriterion c);
TransportCriterion transport_criterion_from_string(std::string_view name);
inline constexpr TransportCriterion kAllCriteria[] = {TransportCriterion::F50, TransportCriterion::F70,
                                                      TransportCriterion::F80, TransportCriterion::F90,
                                                      TransportCriterion::ExpModel};

struct TransportEstimate {
  double epsilon = 0.0;
  TransportCriterion criterion = TransportCriterion::F50;
  double N_T = 0.0;
  /// RMS residual of the exponential fit; 0 for the fractional criteria.
  double fit_residual = 0.0;
};

/// Ergodic value of <p^2> for p uniform on [-1, 1].
inline constexpr double kSaturatedVariance = 1.0 / 3.0;

/// Particles start at p = 0 with s uniform on the two semicircular arcs.
/// Each particle draws from its own generator seeded by (seed, index), and the
/// per-collision sums are reduced over fixed particle blocks, so the curve
/// does not depend on `jobs`.
/// Throws Error(DegenerateShape) for epsilon = 0 and Error(InvalidArgument)
/// for fewer than 1000 particles or zero collisions.
DiffusionCurve simulate_ensemble(const StadiumShape& shape, std::size_t n_particles,
                                 std::size_t n_collisions, std::uint64_t seed, int jobs = 1);

/// Initial arclength of particle `index` (uniform on the arcs).
double initial_arclength(const StadiumShape& shape, std::uint64_t seed, std::uint64_t index);

/// Fractional criteria return the first (interpolated) n with
/// <p^2> >= fraction/3 and need a saturated curve (final value >= 0.9/3);
/// ExpModel fits (1/3)(1 - exp(-n/N_T)) up to the first 95% crossing.
/// Throws Error(NotSaturated) or Error(FitDiverged).
TransportEstimate estimate_NT(const DiffusionCurve& curve, TransportCriterion criterion);

/// alpha = 2 k / N_T.
double alpha(double k, const TransportEstimate& estimate);

}  // namespace stadloc
