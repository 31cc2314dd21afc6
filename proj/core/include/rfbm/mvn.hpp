#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rfbm/rng.hpp"

namespace rfbm::mvn {

/// Row-major n x n correlation matrix.
struct CorrelationMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Standard normal CDF.
double phi_cdf(double x) noexcept;

/// P(X1 <= a, X2 <= b) for a standard bivariate normal with correlation rho.
double bivariate_cdf(double a, double b, double rho);

/// P(X_j <= u_j for all j) for a centred, unit-variance normal vector with the
/// given correlation, n <= 4. Nested adaptive quadrature; absolute accuracy
/// around 1e-9 or better for well-conditioned inputs.
double orthant_cdf(std::span<const double> upper, const CorrelationMatrix& corr);

/// Random valid correlation matrix: normalised Gram matrix of n Gaussian
/// vectors in R^n. Always symmetric PSD with unit diagonal.
CorrelationMatrix random_correlation(std::size_t n, NormalSource& noise);

}  // namespace rfbm::mvn
