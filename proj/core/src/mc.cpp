#include "rfbm/mc.hpp"

#include <cmath>
#include <vector>

#include "rfbm/numeric.hpp"

namespace rfbm {
namespace {
constexpr double kZ95 = 1.959963984540054;
}

McEstimate binomial_estimate(std::uint64_t hits, std::uint64_t reps) {
  McEstimate e;
  e.reps = reps;
  if (reps == 0) return e;
  const double n = static_cast<double>(reps);
  const double p = static_cast<double>(hits) / n;
  e.value = p;
  e.stderr_ = std::sqrt(p * (1.0 - p) / n);
  const double z2 = kZ95 * kZ95;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  e.ci_low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  e.ci_high = hits == reps ? 1.0 : std::min(1.0, centre + half);
  return e;
}

McEstimate mean_estimate(std::span<const double> samples) {
  McEstimate e;
  e.reps = samples.size();
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - mean;
    sq[i] = d * d;
  }
  const double var = samples.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  e.value = mean;
  e.stderr_ = std::sqrt(var / n);
  e.ci_low = mean - kZ95 * e.stderr_;
  e.ci_high = mean + kZ95 * e.stderr_;
  return e;
}

}  // namespace rfbm
