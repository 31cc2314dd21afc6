#include "rfbm/pickands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rfbm/csv.hpp"
#include "rfbm/error.hpp"
#include "rfbm/mc.hpp"
#include "rfbm/parallel.hpp"

namespace rfbm::pickands {
namespace {

constexpr double kExponentGuard = 700.0;

// max_j e^{w_j} / sum_k e^{w_k} for w_k = sqrt2 (b_k - b_c) - |t_k - t_c|^{2H};
// lag_drift[d] = (theta d)^{2H}.
double tilted_ratio(std::span<const double> b, std::span<const double> lag_drift, std::size_t centre,
                    std::vector<double>& w) {
  const double bc = b[centre];
  double top = -HUGE_VAL;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const std::size_t d = k > centre ? k - centre : centre - k;
    w[k] = std::numbers::sqrt2 * (b[k] - bc) - lag_drift[d];
    top = std::max(top, w[k]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) sum += std::exp(w[k] - top);
  return 1.0 / sum;
}

}  // namespace

double default_span(HurstParameter h) noexcept { return h.value() >= 0.4 ? 256.0 : 512.0; }

PickandsEstimate estimate_pickands_theta(HurstParameter h, const ThetaParams& params, StreamKey key) {
  const double span = params.span > 0.0 ? params.span : default_span(h);
  if (!(params.theta > 0.0)) throw Error(ErrorCode::DomainError, "theta must be positive");
  if (span < 10.0 * params.theta) throw Error(ErrorCode::DomainError, "span must be at least 10 theta");
  if (params.reps < 1000) throw Error(ErrorCode::DomainError, "need reps >= 1000");

  const auto n = static_cast<std::size_t>(std::floor(span / params.theta + 1e-9)) + 1;
  const double e = h.twice();
  std::vector<double> grid_drift(n);
  for (std::size_t j = 0; j < n; ++j) grid_drift[j] = std::pow(params.theta * static_cast<double>(j), e);

  const StreamKey base = key.child("pickands").child(format_real(params.theta));
  const std::size_t centres = std::clamp<std::size_t>(params.centers, 1, n);
  std::vector<double> samples(params.reps, 0.0);
  std::vector<char> rejected(params.reps, 0);

  parallel_for(params.reps, [&](std::size_t r) {
    const StreamKey rep_key = base.child(r);
    const auto path = fbm::sample_fbm_circulant(n, params.theta, h, rep_key);
    const auto b = path.values();
    if (params.method == Method::Direct) {
      double top = -HUGE_VAL;
      for (std::size_t j = 0; j < n; ++j) top = std::max(top, std::numbers::sqrt2 * b[j] - grid_drift[j]);
      if (top > kExponentGuard) {
        rejected[r] = 1;
        return;
      }
      samples[r] = std::exp(top) / span;
      return;
    }
    // Stratified centres: stratum m covers [m n / M, (m+1) n / M).
    NormalSource pick(rep_key.child("centre"));
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t m = 0; m < centres; ++m) {
      const std::size_t lo = m * n / centres;
      const std::size_t hi = (m + 1) * n / centres;
      const std::size_t c = lo + pick.below(hi - lo);
      total += static_cast<double>(hi - lo) * tilted_ratio(b, grid_drift, c, w);
    }
    samples[r] = total / span;
  });

  std::vector<double> kept;
  kept.reserve(params.reps);
  std::uint64_t dropped = 0;
  for (std::size_t r = 0; r < params.reps; ++r) {
    if (rejected[r]) {
      ++dropped;
    } else {
      kept.push_back(samples[r]);
    }
  }
  const auto m = mean_estimate(kept);
  PickandsEstimate out;
  out.hurst = h;
  out.theta = params.theta;
  out.span = span;
  out.reps = params.reps;
  out.value = m.value;
  out.stderr_ = m.stderr_;
  out.rejected = dropped;
  out.method = params.method;
  if (!(out.value > 0.0)) throw Error(ErrorCode::DomainError, "non-positive Pickands estimate");
  return out;
}

Extrapolation estimate_pickands(HurstParameter h, StreamKey key, const Budget& budget) {
  if (budget.thetas.size() < 3) throw Error(ErrorCode::DomainError, "need at least three theta levels");
  Extrapolation ex;
  for (double theta : budget.thetas) {
    ThetaParams p;
    p.theta = theta;
    p.span = budget.span;
    p.reps = budget.reps_per_theta;
    ex.levels.push_back(estimate_pickands_theta(h, p, key));
  }

  // Weighted least squares in x = theta^H.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& l : ex.levels) {
    const double w = 1.0 / (l.stderr_ * l.stderr_);
    const double x = std::pow(l.theta, h.value());
    sw += w;
    sx += w * x;
    sy += w * l.value;
    sxx += w * x * x;
    sxy += w * x * l.value;
  }
  const double det = sw * sxx - sx * sx;
  const double intercept = (sxx * sy - sx * sxy) / det;
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept_se = std::sqrt(sxx / det);

  // Residuals are judged against the uncertainty propagated to the
  // extrapolated value; per-level standardised residuals are reported only.
  double worst = 0.0, worst_abs = 0.0;
  for (const auto& l : ex.levels) {
    const double r = std::abs(l.value - intercept - slope * std::pow(l.theta, h.value()));
    worst = std::max(worst, r / l.stderr_);
    worst_abs = std::max(worst_abs, r);
  }
  ex.slope = slope;
  ex.max_standardised_residual = worst;
  ex.residual_over_propagated_se = worst_abs / intercept_se;
  if (ex.residual_over_propagated_se > 3.0) {
    throw Error(ErrorCode::ExtrapolationUnstable, "theta^H fit residual is " +
                                                      std::to_string(ex.residual_over_propagated_se) +
                                                      " propagated standard errors");
  }
  auto& est = ex.estimate;
  est.hurst = h;
  est.theta = 0.0;
  est.span = ex.levels.front().span;
  est.reps = budget.reps_per_theta * budget.thetas.size();
  est.value = intercept;
  est.stderr_ = intercept_se;
  est.method = Method::ChangeOfMeasure;
  if (!(est.value > 0.0)) throw Error(ErrorCode::ExtrapolationUnstable, "extrapolated value is not positive");
  return ex;
}

}  // namespace rfbm::pickands
