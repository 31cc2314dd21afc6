#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rfbm/error.hpp"
#include "rfbm/numeric.hpp"
#include "rfbm/storage.hpp"
#include "stats.hpp"

using namespace rfbm;
using namespace rfbm::storage;

namespace {

TEST(Lindley, ZeroNoiseDrainsLinearly) {
  const std::vector<double> zeros(200, 0.0);
  const auto q = lindley(1.0, zeros, 0.01);
  ASSERT_EQ(q.size(), 201u);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(q[i], std::max(1.0 - 0.01 * i, 0.0), 1e-12);
}

TEST(Lindley, SingleStep) {
  for (double x : {-0.3, 0.005, 0.02, 1.5}) {
    const auto q = lindley(0.0, std::vector<double>{x}, 0.01);
    EXPECT_DOUBLE_EQ(q[1], std::max(x - 0.01, 0.0));
  }
  EXPECT_THROW(lindley(-1.0, std::vector<double>{0.0}, 0.01), Error);
}

TEST(SimulateReflected, BurnInDropsLeadingSteps) {
  const auto key = StreamKey::root(3);
  const auto full = simulate_reflected(0.5, 3.0, 0.01, HurstParameter(0.6), key);
  const auto cut = simulate_reflected(0.5, 2.0, 0.01, HurstParameter(0.6), key, 1.0);
  ASSERT_EQ(full.values.size(), 301u);
  ASSERT_EQ(cut.values.size(), 201u);
  EXPECT_EQ(full.values[0], 0.5);
  for (double q : full.values) EXPECT_GE(q, 0.0);
  const auto again = simulate_reflected(0.5, 2.0, 0.01, HurstParameter(0.6), key, 1.0);
  EXPECT_EQ(cut.values, again.values);
}

TEST(SimulateStationary, MatchesBruteForceWindowMaximum) {
  const HurstParameter h(0.7);
  const double dt = 0.05, window = 1.0, horizon = 10.0;
  const auto key = StreamKey::root(8);
  StationaryOptions opts;
  opts.doubling_check = false;
  const auto qp = simulate_stationary(horizon, dt, window, h, key, opts);
  const std::size_t nw = 20, n = 200;
  ASSERT_EQ(qp.values.size(), n + 1);
  auto inc = fbm::sample_fgn_circulant(nw + n, dt, h, key);
  std::vector<double> x(1, 0.0);
  for (double v : inc) x.push_back(x.back() + v - dt);
  for (std::size_t i = 0; i <= n; ++i) {
    double best = 0.0;
    for (std::size_t j = i; j <= i + nw; ++j) best = std::max(best, x[nw + i] - x[j]);
    EXPECT_NEAR(qp.values[i], best, 1e-12) << i;
    EXPECT_GE(qp.values[i], 0.0);
    if (i > 0) {
      EXPECT_GE(qp.values[i], inc[nw + i - 1] - dt - 1e-12);
    }
  }
}

TEST(SimulateStationary, WindowDoublingCheck) {
  const HurstParameter h(0.5);
  const auto key = StreamKey::root(4);
  EXPECT_NO_THROW(simulate_stationary(500.0, 0.01, default_window(h, 2.0), h, key));
  try {
    simulate_stationary(500.0, 0.01, 0.05, h, key);
    FAIL() << "tiny window should fail the doubling check";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
  }
}

TEST(SimulateStationary, MarginalMatchesReflectedAfterBurnIn) {
  const HurstParameter h(0.5);
  const double dt = 0.01, window = default_window(h, 2.0);
  constexpr int reps = 1500;
  std::vector<double> a(reps), b(reps);
  StationaryOptions opts;
  opts.doubling_check = false;
  for (int r = 0; r < reps; ++r) {
    const auto k = StreamKey::root(12).child(static_cast<std::uint64_t>(r));
    a[static_cast<std::size_t>(r)] = simulate_stationary(dt, dt, window, h, k.child("s"), opts).values.back();
    b[static_cast<std::size_t>(r)] = simulate_reflected(0.0, dt, dt, h, k.child("r"), 5 * window).values.back();
  }
  EXPECT_FALSE(test::ks_two_sample_rejects(a, b, test::kKsCritical1pct));
}

TEST(TailSupDistance, CountsLargestOverlap) {
  const std::vector<double> narrow{0.0, 1.0, 2.0, 0.5};
  const std::vector<double> wide{0.0, 3.0, 2.5, 0.5};
  EXPECT_DOUBLE_EQ(tail_sup_distance(narrow, wide), 0.5);  // u in (2, 2.5): two points
  EXPECT_EQ(tail_sup_distance(narrow, narrow), 0.0);
}

TEST(SupTailProbability, ZeroLevelIsCertain) {
  TailProbabilityParams p;
  p.level = 0.0;
  const auto e = sup_tail_probability(HurstParameter(0.5), p);
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(SupTailProbability, MonotoneInLevel) {
  TailProbabilityParams p;
  p.reps = 1000;
  p.seed = 2;
  double prev = 1.0, prev_se = 0.0;
  for (double u : {1.0, 2.0, 3.0}) {
    p.level = u;
    const auto e = sup_tail_probability(HurstParameter(0.5), p);
    EXPECT_LE(e.value, prev + 3 * std::hypot(e.stderr_, prev_se)) << u;
    prev = e.value;
    prev_se = e.stderr_;
  }
}

TEST(SupTailProbability, GridRefinementIsWithinNoise) {
  TailProbabilityParams coarse;
  coarse.level = 2.0;
  coarse.reps = 2000;
  coarse.seed = 7;
  auto fine = coarse;
  fine.dt = coarse.dt / 4;
  fine.seed = 8;
  const auto a = sup_tail_probability(HurstParameter(0.5), coarse);
  const auto b = sup_tail_probability(HurstParameter(0.5), fine);
  EXPECT_LE(std::abs(a.value - b.value), 3 * std::hypot(a.stderr_, b.stderr_));
}

TEST(SupTailProbability, InfeasibleLevel) {
  TailProbabilityParams p;
  p.level = 40.0;
  p.reps = 100;
  p.window = 1.0;
  try {
    sup_tail_probability(HurstParameter(0.5), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleLevel);
  }
}

QueuePath constant_path(double t0, double value, std::size_t n) {
  return QueuePath{HurstParameter(0.5), 1.0, 1.0, t0, std::vector<double>(n, value), TruncatedSup{1.0}};
}

TEST(ExtractCrossings, PathAlwaysAbove) {
  const auto fam = asym::make_threshold_family(2.0, asym::derive_constants(HurstParameter(0.5)), 1.0);
  const auto rec = extract_crossings(constant_path(20.0, 1e6, 100), fam);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    EXPECT_EQ(rec.xi[i], rec.times[i]);
    EXPECT_EQ(rec.eta[i], rec.times[i]);
    EXPECT_EQ(rec.lil_statistic[i], 0.0);
  }
}

TEST(ExtractCrossings, PathAlwaysBelow) {
  const auto fam = asym::make_threshold_family(2.0, asym::derive_constants(HurstParameter(0.5)), 1.0);
  const auto rec = extract_crossings(constant_path(20.0, 0.0, 100), fam);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    EXPECT_EQ(rec.xi[i], 0.0);
    EXPECT_FALSE(rec.eta[i].has_value());
  }
}

TEST(ExtractCrossings, MatchesBruteForceScan) {
  const HurstParameter h(0.5);
  const auto fam = asym::make_threshold_family(1.5, asym::derive_constants(h), 1.0);
  StationaryOptions opts;
  opts.t0 = 20.0;
  opts.doubling_check = false;
  const auto qp = simulate_stationary(300.0, 0.05, 10.0, h, StreamKey::root(6), opts);
  const auto rec = extract_crossings(qp, fam);
  const std::size_t n = qp.values.size();
  auto crosses = [&](std::size_t j) { return qp.values[j] >= asym::f_p(qp.time(j), fam); };
  for (std::size_t i = 0; i < n; i += 7) {
    double xi = 0.0;
    for (std::size_t j = 0; j <= i; ++j) if (crosses(j)) xi = qp.time(j);
    std::optional<double> eta;
    for (std::size_t j = i; j < n && !eta; ++j) if (crosses(j)) eta = qp.time(j);
    EXPECT_EQ(rec.xi[i], xi);
    EXPECT_EQ(rec.eta[i], eta);
  }
  for (std::size_t i = 1; i < n; ++i) {
    EXPECT_GE(rec.xi[i], rec.xi[i - 1]);
    EXPECT_LE(rec.xi[i], rec.times[i]);
  }
  EXPECT_THROW(extract_crossings(constant_path(1.0, 0.0, 5), fam), Error);
}

TEST(LilExperiment, StructuralInvariantsAndDeterminism) {
  const auto fam = asym::make_threshold_family(2.0, asym::derive_constants(HurstParameter(0.5)), 1.0);
  const auto key = StreamKey::root(10).child("lil");
  const auto a = lil_experiment(fam, 2000.0, 0.01, key);
  const auto b = lil_experiment(fam, 2000.0, 0.01, key);
  EXPECT_EQ(a.record.xi, b.record.xi);
  EXPECT_EQ(a.summary.log_scaled_max, b.summary.log_scaled_max);
  const auto& r = a.record;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    EXPECT_LE(r.xi[i], r.times[i]);
    if (i) {
      EXPECT_GE(r.xi[i], r.xi[i - 1]);
    }
    if (r.xi[i] > 0.0) {
      // eta evaluated at xi(t) is xi(t) itself, hence <= t.
      const auto j = static_cast<std::size_t>(std::llround((r.xi[i] - r.times[0]) / 0.01));
      ASSERT_TRUE(r.eta[j].has_value());
      EXPECT_LE(*r.eta[j], r.times[i] + 1e-9);
    }
    EXPECT_TRUE(std::isfinite(r.lil_statistic[i]));
  }
  EXPECT_GE(a.summary.running_min_statistic, -3.0);
  EXPECT_LE(a.summary.running_min_statistic, 0.0);
  EXPECT_GT(a.summary.log_scaled_max, 0.0);
}

TEST(LilExperiment, StrideThinsRecord) {
  const auto fam = asym::make_threshold_family(0.5, asym::derive_constants(HurstParameter(0.5)), 1.0);
  LilOptions o;
  o.record_stride = 10;
  const auto r = lil_experiment(fam, 100.0, 0.01, StreamKey::root(1), o);
  EXPECT_EQ(r.record.times.size(), 1001u);
  EXPECT_TRUE(r.summary.uses_log_ratio);
  std::ostringstream os;
  write_crossings_csv(os, r.record);
  EXPECT_EQ(os.str().substr(0, 14), "t,xi,lil_stat\n");
}

}  // namespace
