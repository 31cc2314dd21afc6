#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rfbm/mvn.hpp"

using namespace rfbm::mvn;

namespace {

double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Independent oracle: P(X <= a, Y <= b) = int_{-inf}^{a} phi(x) Phi((b - rho x)/sqrt(1-rho^2)) dx,
// composite Simpson on [-12, a].
double bivariate_brute(double a, double b, double rho) {
  const int n = 20000;
  const double lo = -12.0, h = (a - lo) / n;
  const double s = std::sqrt(1.0 - rho * rho);
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * phi_pdf(x) * phi_cdf((b - rho * x) / s);
  }
  return acc * h / 3.0;
}

CorrelationMatrix equicorrelated(std::size_t n, double rho) {
  CorrelationMatrix c{n, std::vector<double>(n * n, rho)};
  for (std::size_t i = 0; i < n; ++i) c.values[i * n + i] = 1.0;
  return c;
}

TEST(PhiCdf, Values) {
  EXPECT_EQ(phi_cdf(0.0), 0.5);
  EXPECT_NEAR(phi_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(phi_cdf(-5.0), 2.8665157187919391e-07, 1e-20);
}

TEST(BivariateCdf, MatchesBruteForceQuadrature) {
  for (double rho : {-0.95, -0.5, -0.1, 0.3, 0.7, 0.99}) {
    for (auto [a, b] : {std::pair{0.0, 0.0}, {1.0, -0.5}, {-2.0, 1.5}, {2.5, 2.5}, {-1.0, -3.0}}) {
      EXPECT_NEAR(bivariate_cdf(a, b, rho), bivariate_brute(a, b, rho), 1e-10) << rho << " " << a << " " << b;
    }
  }
}

TEST(BivariateCdf, ReflectionIdentity) {
  // P(X <= a, Y <= b) + P(X <= a, -Y < -b) = P(X <= a).
  for (double rho : {-0.9999, -0.93, -0.4, 0.2, 0.92, 0.999}) {
    for (auto [a, b] : {std::pair{0.0, 0.0}, {1.3, -0.2}, {-3.0, 2.0}, {4.0, 4.5}}) {
      EXPECT_NEAR(bivariate_cdf(a, b, rho) + bivariate_cdf(a, -b, -rho), phi_cdf(a), 1e-13) << rho << " " << a;
    }
  }
}

TEST(BivariateCdf, BoundaryCorrelations) {
  EXPECT_NEAR(bivariate_cdf(0.3, -0.4, 0.0), phi_cdf(0.3) * phi_cdf(-0.4), 1e-15);
  EXPECT_NEAR(bivariate_cdf(0.3, -0.4, 1.0), phi_cdf(-0.4), 1e-15);
  EXPECT_NEAR(bivariate_cdf(0.3, -0.4, -1.0), 0.0, 1e-15);
  EXPECT_NEAR(bivariate_cdf(1.0, 0.5, -1.0), phi_cdf(1.0) + phi_cdf(0.5) - 1.0, 1e-15);
  // Sheppard: P(X <= 0, Y <= 0) = 1/4 + asin(rho)/(2 pi).
  EXPECT_NEAR(bivariate_cdf(0, 0, 0.6), 0.25 + std::asin(0.6) / (2 * std::numbers::pi), 1e-12);
}

TEST(OrthantCdf, TrivariateOrthantClosedForm) {
  const CorrelationMatrix c{3, {1.0, 0.2, -0.4, 0.2, 1.0, 0.5, -0.4, 0.5, 1.0}};
  const std::vector<double> zero(3, 0.0);
  const double ref = 0.125 + (std::asin(0.2) + std::asin(-0.4) + std::asin(0.5)) / (4 * std::numbers::pi);
  EXPECT_NEAR(orthant_cdf(zero, c), ref, 1e-9);
}

TEST(OrthantCdf, ExchangeableHalfCorrelation) {
  // With all correlations 1/2, P(all X_i <= 0) = 1/(n+1).
  for (std::size_t n : {2u, 3u, 4u}) {
    const std::vector<double> zero(n, 0.0);
    EXPECT_NEAR(orthant_cdf(zero, equicorrelated(n, 0.5)), 1.0 / static_cast<double>(n + 1), 1e-9) << n;
  }
}

TEST(OrthantCdf, IndependentIsProduct) {
  const std::vector<double> u{0.5, -0.3, 1.2, 2.0};
  double ref = 1.0;
  for (double x : u) ref *= phi_cdf(x);
  EXPECT_NEAR(orthant_cdf(u, equicorrelated(4, 0.0)), ref, 1e-9);
}

TEST(OrthantCdf, ReducesToLowerDimensions) {
  EXPECT_NEAR(orthant_cdf(std::vector<double>{0.7}, equicorrelated(1, 0.0)), phi_cdf(0.7), 1e-15);
  const CorrelationMatrix c{2, {1.0, 0.3, 0.3, 1.0}};
  EXPECT_NEAR(orthant_cdf(std::vector<double>{0.2, -1.0}, c), bivariate_cdf(0.2, -1.0, 0.3), 1e-12);
  // Perfectly correlated third coordinate collapses onto the first.
  const CorrelationMatrix d{3, {1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0}};
  EXPECT_NEAR(orthant_cdf(std::vector<double>{0.2, -1.0, 0.5}, d), bivariate_cdf(0.2, -1.0, 0.3), 1e-9);
}

TEST(OrthantCdf, RejectsTooManyDimensions) {
  const std::vector<double> u(5, 0.0);
  EXPECT_ANY_THROW(orthant_cdf(u, equicorrelated(5, 0.1)));
}

TEST(RandomCorrelation, ValidMatrices) {
  rfbm::NormalSource noise(rfbm::StreamKey::root(2));
  for (int i = 0; i < 100; ++i) {
    const auto c = random_correlation(3, noise);
    for (std::size_t a = 0; a < 3; ++a) {
      EXPECT_EQ(c(a, a), 1.0);
      for (std::size_t b = 0; b < 3; ++b) {
        EXPECT_EQ(c(a, b), c(b, a));
        EXPECT_LE(std::abs(c(a, b)), 1.0);
      }
    }
  }
}

}  // namespace
