#pragma once

#include <cstdint>
#include <vector>

#include "rfbm/asymptotics.hpp"
#include "rfbm/mc.hpp"

namespace rfbm::grid {

using fbm::HurstParameter;

/// Lattice over [0, T] x J(v), J(v) = {|tau - tau0| <= log(v)/v}:
///   s_l = l q,        0 <= l <= L,  L = floor(T/q),
///   tau_n = tau0 + n q, |n| <= N,  N = floor(tau*(v)/q),
/// with q = theta v^{-1/H} and tau*(v) = log(v)/v.
struct DiscretizationGrid {
  double theta = 0.0;
  double v = 0.0;
  double q = 0.0;
  double tau_star = 0.0;
  std::int64_t L = 0;
  std::int64_t N = 0;
  std::vector<double> s;    // L + 1 points
  std::vector<double> tau;  // 2N + 1 points, ascending
};

/// Requires T, theta > 0 and v >= e.
DiscretizationGrid build_grid(double T, double theta, double v, const asym::ModelConstants& k);

struct GridCheckParams {
  double T = 1.0;
  double theta = 1.0;
  double v = 3.0;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  int refinement = 32;  // reference grid is this many times finer in both axes
};

struct GridCheckResult {
  McEstimate p_grid;       // P(max over the theta-grid of A Z > v)
  McEstimate p_reference;  // same over the refined grid
  double ratio = 0.0;      // p_grid / p_reference
  double ratio_stderr = 0.0;
  std::uint64_t pathwise_violations = 0;  // replications with grid max > reference max
  std::size_t field_points = 0;           // distinct fBm sample times used
};

/// Common-random-number comparison of the theta-grid maximum with a refined
/// reference grid that contains it. Both maxima are computed from the same fBm
/// sample in every replication.
GridCheckResult grid_vs_continuum_experiment(HurstParameter h, const GridCheckParams& params);

}  // namespace rfbm::grid
