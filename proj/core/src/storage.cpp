#include "rfbm/storage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

#include "rfbm/csv.hpp"
#include "rfbm/error.hpp"
#include "rfbm/numeric.hpp"
#include "rfbm/parallel.hpp"

namespace rfbm::storage {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t steps_of(double length, double dt) { return static_cast<std::size_t>(std::llround(length / dt)); }

// X_i = B(t_i) - c t_i for `count` increments, compensated.
std::vector<double> drifted_walk(std::size_t count, double dt, double drift, HurstParameter h, StreamKey key) {
  auto inc = fbm::sample_fgn_circulant(count, dt, h, key);
  for (double& x : inc) x -= drift * dt;
  return compensated_prefix_sum(inc);
}

// Q at indices [offset, offset + n] of x using a look-back of `window` steps.
std::vector<double> truncated_sup(std::span<const double> x, std::size_t window, std::size_t offset,
                                  std::size_t n) {
  const auto low = sliding_min(x, window);
  std::vector<double> q(n + 1);
  for (std::size_t i = 0; i <= n; ++i) q[i] = x[offset + i] - low[offset + i];
  return q;
}

}  // namespace

std::vector<double> lindley(double q0, std::span<const double> increments, double dt, double drift) {
  if (q0 < 0.0) throw Error(ErrorCode::DomainError, "q0 must be nonnegative");
  std::vector<double> q(increments.size() + 1);
  q[0] = q0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    q[i + 1] = std::max(q[i] + increments[i] - drift * dt, 0.0);
  }
  return q;
}

QueuePath simulate_reflected(double q0, double horizon, double dt, HurstParameter h, StreamKey key,
                             double burn_in) {
  if (!(dt > 0.0) || !(horizon >= dt)) throw Error(ErrorCode::DomainError, "need dt > 0 and horizon >= dt");
  if (burn_in < 0.0) throw Error(ErrorCode::DomainError, "burn-in must be nonnegative");
  const std::size_t n_burn = steps_of(burn_in, dt);
  const std::size_t n = steps_of(horizon, dt);
  const auto inc = fbm::sample_fgn_circulant(n_burn + n, dt, h, key);
  auto q = lindley(q0, inc, dt);
  QueuePath path{h, dt, 1.0, 0.0, {}, Reflected{q0, burn_in}};
  path.values.assign(q.begin() + static_cast<std::ptrdiff_t>(n_burn), q.end());
  return path;
}

double default_window(HurstParameter h, double max_level, double kappa) {
  const double tau0 = h.value() / (1.0 - h.value());
  return kappa * tau0 * std::max(max_level, 1.0);
}

double tail_sup_distance(std::span<const double> narrow, std::span<const double> wide) {
  if (narrow.size() != wide.size()) throw Error(ErrorCode::DomainError, "size mismatch");
  std::vector<std::pair<double, int>> events;
  for (std::size_t i = 0; i < narrow.size(); ++i) {
    if (wide[i] > narrow[i]) {
      events.emplace_back(narrow[i], +1);
      events.emplace_back(wide[i], -1);
    }
  }
  std::sort(events.begin(), events.end());  // -1 sorts before +1 at equal positions
  long open = 0, best = 0;
  for (const auto& [pos, delta] : events) {
    open += delta;
    best = std::max(best, open);
  }
  return narrow.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(narrow.size());
}

QueuePath simulate_stationary(double horizon, double dt, double window, HurstParameter h, StreamKey key,
                              const StationaryOptions& options) {
  if (!(dt > 0.0) || !(horizon >= dt)) throw Error(ErrorCode::DomainError, "need dt > 0 and horizon >= dt");
  if (!(window >= dt)) throw Error(ErrorCode::DomainError, "window must be at least one step");
  const std::size_t nw = steps_of(window, dt);
  const std::size_t n = steps_of(horizon, dt);
  QueuePath path{h, dt, 1.0, options.t0, {}, TruncatedSup{window}};

  if (!options.doubling_check) {
    const auto x = drifted_walk(nw + n, dt, 1.0, h, key);
    path.values = truncated_sup(x, nw, nw, n);
    return path;
  }
  const auto x = drifted_walk(2 * nw + n, dt, 1.0, h, key);
  path.values = truncated_sup(x, nw, 2 * nw, n);
  const auto wide = truncated_sup(x, 2 * nw, 2 * nw, n);
  const double change = tail_sup_distance(path.values, wide);
  if (change > options.doubling_tolerance) {
    throw Error(ErrorCode::WindowTooSmall, "doubling the window moves the marginal tail by " +
                                               std::to_string(change) + " (> " +
                                               std::to_string(options.doubling_tolerance) + ")");
  }
  return path;
}

McEstimate sup_tail_probability(HurstParameter h, const TailProbabilityParams& params) {
  if (params.reps < 100) throw Error(ErrorCode::DomainError, "need reps >= 100");
  if (!(params.interval > 0.0) || !(params.dt > 0.0)) throw Error(ErrorCode::DomainError, "bad interval or dt");
  if (params.level <= 0.0) {
    // Q > 0 somewhere on any nondegenerate interval, almost surely.
    McEstimate e{1.0, 0.0, 1.0, 1.0, params.reps, params.seed, "tail"};
    return e;
  }
  const double window = params.window > 0.0 ? params.window : default_window(h, params.level);
  const std::size_t nw = steps_of(window, params.dt);
  const std::size_t nt = steps_of(params.interval, params.dt);
  const StreamKey base = StreamKey::root(params.seed).child("tail");

  std::vector<char> hit(params.reps, 0);
  parallel_for(params.reps, [&](std::size_t r) {
    const auto x = drifted_walk(nw + nt, params.dt, 1.0, h, base.child(r));
    const auto low = sliding_min(x, nw);
    for (std::size_t i = nw; i <= nw + nt; ++i) {
      if (x[i] - low[i] > params.level) {
        hit[r] = 1;
        break;
      }
    }
  });
  const auto hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  if (hits == 0) {
    const auto k = asym::derive_constants(h);
    const double p = asym::piterbarg_tail(params.interval / params.level, params.level, k, params.pickands).value;
    if (static_cast<double>(params.reps) * p < 0.1) {
      throw Error(ErrorCode::InfeasibleLevel, "no exceedances and reps * p_asymptotic < 0.1");
    }
  }
  auto e = binomial_estimate(hits, params.reps);
  e.seed = params.seed;
  e.stream = "tail";
  return e;
}

CrossingRecord extract_crossings(const QueuePath& qp, const asym::ThresholdFamily& fam) {
  if (qp.values.empty()) throw Error(ErrorCode::DomainError, "empty path");
  if (!(qp.time(0) > fam.s_min)) throw Error(ErrorCode::DomainError, "path must start above s_min of f_p");
  const std::size_t n = qp.values.size();
  CrossingRecord rec;
  rec.p = fam.p;
  rec.times.resize(n);
  rec.xi.resize(n);
  rec.eta.resize(n);
  rec.lil_statistic.assign(n, kNaN);
  rec.log_ratio_statistic.assign(n, kNaN);

  std::vector<char> crossing(n);
  for (std::size_t i = 0; i < n; ++i) {
    rec.times[i] = qp.time(i);
    crossing[i] = qp.values[i] >= asym::f_p(rec.times[i], fam);
  }
  double last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (crossing[i]) last = rec.times[i];
    rec.xi[i] = last;
  }
  std::optional<double> next;
  for (std::size_t i = n; i-- > 0;) {
    if (crossing[i]) next = rec.times[i];
    rec.eta[i] = next;
  }
  if (fam.p > 0.0) {
    const double start = std::max(fam.s_min, std::exp(std::numbers::e));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = rec.times[i];
      if (!(t > start)) continue;
      const double hp = asym::h_p(t, fam);
      rec.lil_statistic[i] = (rec.xi[i] - t) / hp;
      if (rec.xi[i] > 0.0) rec.log_ratio_statistic[i] = std::log(rec.xi[i] / t) / (hp / t);
    }
  }
  return rec;
}

LilResult lil_experiment(const asym::ThresholdFamily& fam, double horizon, double dt, StreamKey key,
                         const LilOptions& options) {
  if (!(fam.p > 0.0)) throw Error(ErrorCode::DomainError, "lil experiment needs p > 0");
  const auto& k = fam.constants;
  const double t0 = options.t0 > 0.0 ? options.t0 : std::max(fam.s_min, std::exp(std::numbers::e)) + dt;
  const double t_end = t0 + horizon;
  if (!(std::log(std::log(t_end)) > 1.0)) throw Error(ErrorCode::DomainError, "horizon too short: log log t <= 1");
  const double exponent = 1.0 / (2.0 * (1.0 - k.h.value()));
  const double top_level =
      std::max(asym::f_p(t_end, fam), asym::limsup_constant(k) * std::pow(std::log(t_end), exponent));
  const double window = options.window > 0.0 ? options.window : default_window(k.h, 1.25 * top_level);

  StationaryOptions sopt;
  sopt.t0 = t0;
  const auto qp = simulate_stationary(horizon, dt, window, k.h, key, sopt);
  CrossingRecord full = extract_crossings(qp, fam);

  LilResult result;
  auto& s = result.summary;
  s.limsup_constant = asym::limsup_constant(k);
  s.uses_log_ratio = fam.p <= 1.0;
  const auto& stat = s.uses_log_ratio ? full.log_ratio_statistic : full.lil_statistic;
  s.running_min_statistic = HUGE_VAL;
  for (double v : stat) {
    if (std::isfinite(v)) s.running_min_statistic = std::min(s.running_min_statistic, v);
  }
  for (std::size_t i = 0; i < qp.values.size(); ++i) s.crossings += full.xi[i] == full.times[i];

  std::vector<double> scaled_max(qp.values.size());
  double running_max = 0.0;
  for (std::size_t i = 0; i < qp.values.size(); ++i) {
    running_max = std::max(running_max, qp.values[i]);
    scaled_max[i] = running_max / std::pow(std::log(qp.time(i)), exponent);
  }
  s.log_scaled_max = scaled_max.back();

  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
  if (stride == 1) {
    result.record = std::move(full);
    result.log_scaled_max_trajectory = std::move(scaled_max);
  } else {
    auto& r = result.record;
    r.p = full.p;
    for (std::size_t i = 0; i < full.times.size(); i += stride) {
      r.times.push_back(full.times[i]);
      r.xi.push_back(full.xi[i]);
      r.eta.push_back(full.eta[i]);
      r.lil_statistic.push_back(full.lil_statistic[i]);
      r.log_ratio_statistic.push_back(full.log_ratio_statistic[i]);
      result.log_scaled_max_trajectory.push_back(scaled_max[i]);
    }
  }
  return result;
}

void write_queue_csv(std::ostream& os, const QueuePath& qp) {
  std::vector<double> t(qp.values.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = qp.time(i);
  const std::string_view header[] = {"t", "Q"};
  const std::span<const double> cols[] = {t, qp.values};
  write_csv(os, header, cols);
}

void write_crossings_csv(std::ostream& os, const CrossingRecord& rec) {
  const auto& stat = rec.p > 1.0 ? rec.lil_statistic : rec.log_ratio_statistic;
  const std::string_view header[] = {"t", "xi", "lil_stat"};
  const std::span<const double> cols[] = {rec.times, rec.xi, stat};
  write_csv(os, header, cols);
}

}  // namespace rfbm::storage
