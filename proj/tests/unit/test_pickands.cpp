#include <gtest/gtest.h>

#include <cmath>

#include "rfbm/error.hpp"
#include "rfbm/pickands.hpp"

using namespace rfbm;
using namespace rfbm::pickands;

namespace {

TEST(DefaultSpan, LongerForLongMemoryDeficit) {
  EXPECT_EQ(default_span(HurstParameter(0.5)), 256.0);
  EXPECT_EQ(default_span(HurstParameter(0.3)), 512.0);
}

TEST(PickandsTheta, BrownianValueNearOne) {
  ThetaParams p;
  p.theta = 0.05;
  p.span = 64;
  p.reps = 10'000;
  const auto e = estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(1));
  EXPECT_NEAR(e.value, 1.0, 0.15);
  EXPECT_GT(e.stderr_, 0.0);
  EXPECT_EQ(e.theta, 0.05);
  EXPECT_EQ(e.reps, 10'000u);
}

TEST(PickandsTheta, DecreasesAsGridCoarsens) {
  double prev = INFINITY, prev_se = 0;
  for (double theta : {0.05, 0.2, 0.8}) {
    ThetaParams p;
    p.theta = theta;
    p.span = 64;
    p.reps = 2000;
    const auto e = estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(2));
    EXPECT_LT(e.value, prev + 2 * std::hypot(e.stderr_, prev_se)) << theta;
    prev = e.value;
    prev_se = e.stderr_;
  }
}

TEST(PickandsTheta, Deterministic) {
  ThetaParams p;
  p.theta = 0.4;
  p.reps = 1000;
  const auto a = estimate_pickands_theta(HurstParameter(0.7), p, StreamKey::root(3));
  const auto b = estimate_pickands_theta(HurstParameter(0.7), p, StreamKey::root(3));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(PickandsTheta, DirectMethodIsFiniteAndCountsRejections) {
  ThetaParams p;
  p.theta = 0.2;
  p.span = 20;
  p.reps = 2000;
  p.method = Method::Direct;
  const auto e = estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(4));
  EXPECT_TRUE(std::isfinite(e.value));
  EXPECT_GT(e.value, 0.0);
  EXPECT_EQ(e.rejected, 0u);
  EXPECT_EQ(e.method, Method::Direct);
}

TEST(PickandsTheta, RejectsBadParameters) {
  ThetaParams p;
  p.theta = 0.0;
  EXPECT_THROW(estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(1)), Error);
  p.theta = 1.0;
  p.span = 5.0;  // < 10 theta
  EXPECT_THROW(estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(1)), Error);
  p.span = 64;
  p.reps = 999;
  EXPECT_THROW(estimate_pickands_theta(HurstParameter(0.5), p, StreamKey::root(1)), Error);
}

TEST(PickandsExtrapolation, BrownianValueAndOrdering) {
  Budget b;
  b.reps_per_theta = 4000;
  const auto ex = estimate_pickands(HurstParameter(0.5), StreamKey::root(5), b);
  EXPECT_EQ(ex.estimate.theta, 0.0);
  EXPECT_NEAR(ex.estimate.value, 1.0, 0.1);
  for (const auto& l : ex.levels) EXPECT_GE(ex.estimate.value, l.value - 2 * l.stderr_) << l.theta;
  EXPECT_LE(ex.residual_over_propagated_se, 3.0);
}

TEST(PickandsExtrapolation, DecreasingInHurst) {
  Budget b;
  b.reps_per_theta = 2000;
  const auto half = estimate_pickands(HurstParameter(0.5), StreamKey::root(6), b);
  const auto high = estimate_pickands(HurstParameter(0.8), StreamKey::root(6), b);
  EXPECT_GT(half.estimate.value, high.estimate.value);
}

TEST(PickandsExtrapolation, NeedsThreeLevels) {
  Budget b;
  b.thetas = {0.2, 0.1};
  EXPECT_THROW(estimate_pickands(HurstParameter(0.5), StreamKey::root(1), b), Error);
}

}  // namespace
