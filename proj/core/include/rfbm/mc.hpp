#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace rfbm {

/// Monte Carlo point estimate with its sampling uncertainty and the seed
/// lineage needed to reproduce it.
struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  std::string stream;  // substream label, e.g. "tail"
};

/// Proportion estimate from `hits` successes in `reps` Bernoulli trials with a
/// 95% Wilson score interval.
McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t reps);

/// Sample mean with standard error sd/sqrt(n) and a normal 95% interval.
/// Reduction is pairwise so the result does not depend on worker layout.
McEstimate mean_estimate(std::span<const double> samples);

}  // namespace rfbm
