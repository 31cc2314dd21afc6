#pragma once

#include <cstdint>
#include <vector>

#include "rfbm/fbm.hpp"
#include "rfbm/rng.hpp"

namespace rfbm::pickands {

using fbm::HurstParameter;

enum class Method {
  /// Unbiased change of measure: tilting by exp(Y(t_i)) for a uniformly chosen
  /// grid point t_i turns E exp(max Y) into n E[max_j e^{W_j} / sum_k e^{W_k}],
  /// W_j = sqrt(2)(B(t_j) - B(t_i)) - |t_j - t_i|^{2H}. Each term lies in [1/n, 1].
  ChangeOfMeasure,
  /// Plain mean of exp(max Y). Heavy-tailed; kept for comparison.
  Direct,
};

struct PickandsEstimate {
  HurstParameter hurst{0.5};
  double theta = 0.0;  // 0 marks an extrapolated value
  double span = 0.0;
  std::uint64_t reps = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t rejected = 0;  // Direct only: samples whose exponent exceeded 700
  Method method = Method::ChangeOfMeasure;
};

struct ThetaParams {
  double theta = 0.1;
  double span = 0.0;  // 0: default_span(h)
  std::uint64_t reps = 10'000;
  Method method = Method::ChangeOfMeasure;
  std::size_t centers = 16;  // stratified tilt centres per path (ChangeOfMeasure)
};

/// 256 for H >= 0.4, 512 below (longer memory needs longer spans); sized so the
/// O(1/S) edge bias stays below the default-budget noise.
double default_span(HurstParameter h) noexcept;

/// (1/S) E exp(max_{t in theta Z cap [0,S]} (sqrt(2) B_H(t) - t^{2H})).
/// Replication r uses substream pickands/<theta>/<r> under `key`.
PickandsEstimate estimate_pickands_theta(HurstParameter h, const ThetaParams& params, StreamKey key);

struct Budget {
  std::uint64_t reps_per_theta = 10'000;
  double span = 0.0;  // 0: default_span(h)
  std::vector<double> thetas{0.4, 0.2, 0.1};
};

struct Extrapolation {
  PickandsEstimate estimate;            // theta = 0
  std::vector<PickandsEstimate> levels;  // one per theta
  double slope = 0.0;                    // d value / d theta^H
  double max_standardised_residual = 0.0;     // |residual| / se of that level
  double residual_over_propagated_se = 0.0;  // max |residual| / se of the extrapolated value
};

/// Weighted least-squares fit value = c0 + c1 theta^H through the theta-level
/// estimates; c0 is the theta -> 0 extrapolation.
Extrapolation estimate_pickands(HurstParameter h, StreamKey key, const Budget& budget = {});

}  // namespace rfbm::pickands
