#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rfbm/asymptotics.hpp"
#include "rfbm/fbm.hpp"
#include "rfbm/mc.hpp"
#include "rfbm/rng.hpp"

namespace rfbm::storage {

using fbm::HurstParameter;

struct Reflected {
  double q0 = 0.0;
  double burn_in = 0.0;
};
struct TruncatedSup {
  double window = 0.0;
};

/// Storage process sampled at t0 + i * dt.
struct QueuePath {
  HurstParameter hurst{0.5};
  double dt = 0.0;
  double drift = 1.0;
  double t0 = 0.0;
  std::vector<double> values;
  std::variant<Reflected, TruncatedSup> mode;

  double time(std::size_t i) const noexcept { return t0 + dt * static_cast<double>(i); }
};

/// One Lindley step per increment: Q_{i+1} = max(Q_i + dB_i - c dt, 0).
std::vector<double> lindley(double q0, std::span<const double> increments, double dt, double drift = 1.0);

/// Reflected process from Q(0) = q0, driven by exact fGn. With burn_in > 0 the
/// returned path starts after the burn-in period.
QueuePath simulate_reflected(double q0, double horizon, double dt, HurstParameter h, StreamKey key,
                             double burn_in = 0.0);

/// Look-back window from the dominant lag of the stationary representation:
/// kappa * tau0 * max(level, 1).
double default_window(HurstParameter h, double max_level, double kappa = 8.0);

struct StationaryOptions {
  bool doubling_check = true;
  /// Allowed sup-norm change of the empirical marginal tail when W -> 2W.
  double doubling_tolerance = 5e-3;
  double t0 = 0.0;
};

/// Q(t) = max_{s in [t-W, t]} (B(t) - B(s) - (t - s)) on the grid of [t0, t0+horizon].
QueuePath simulate_stationary(double horizon, double dt, double window, HurstParameter h, StreamKey key,
                              const StationaryOptions& options = {});

/// Largest change of the empirical tail function u -> #{i : q[i] > u}/n
/// between two pathwise-ordered samples (narrow <= wide elementwise).
double tail_sup_distance(std::span<const double> narrow, std::span<const double> wide);

struct TailProbabilityParams {
  double interval = 1.0;
  double level = 1.0;
  double dt = 0.01;
  double window = 0.0;  // 0: default_window(h, level)
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  double pickands = 1.0;  // only used for the feasibility guard
};

/// P(sup_{t in [0, interval]} Q(t) > level) by Monte Carlo over stationary paths.
McEstimate sup_tail_probability(HurstParameter h, const TailProbabilityParams& params);

struct CrossingRecord {
  double p = 0.0;
  std::vector<double> times;
  std::vector<double> xi;                   // last crossing at or before t (0 if none)
  std::vector<std::optional<double>> eta;   // first crossing at or after t
  std::vector<double> lil_statistic;        // (xi - t) / h_p(t); NaN where h_p undefined
  std::vector<double> log_ratio_statistic;  // log(xi / t) / (h_p(t) / t); NaN where undefined
};

/// Crossing times of Q over f_p, detected on the grid only.
CrossingRecord extract_crossings(const QueuePath& qp, const asym::ThresholdFamily& fam);

struct LilOptions {
  double t0 = 0.0;      // 0: just above max(s_min, e^e)
  double window = 0.0;  // 0: default_window at the largest level of interest
  std::size_t record_stride = 1;  // keep every k-th grid point in the record
};

struct LilSummary {
  double running_min_statistic = 0.0;  // of the iterated-logarithm normalisation matching p
  double log_scaled_max = 0.0;         // max_{s<=t} Q(s) / (log t)^{1/(2(1-H))} at the horizon
  double limsup_constant = 0.0;
  std::size_t crossings = 0;
  bool uses_log_ratio = false;  // p in (0, 1]
};

struct LilResult {
  CrossingRecord record;
  std::vector<double> log_scaled_max_trajectory;  // aligned with record.times
  LilSummary summary;
};

LilResult lil_experiment(const asym::ThresholdFamily& fam, double horizon, double dt, StreamKey key,
                         const LilOptions& options = {});

void write_queue_csv(std::ostream& os, const QueuePath& qp);
void write_crossings_csv(std::ostream& os, const CrossingRecord& rec);

}  // namespace rfbm::storage
