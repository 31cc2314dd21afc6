#include "rfbm/mvn.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfbm::mvn {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Legendre = boost::math::quadrature::gauss<double, 20>;

constexpr double kCut = 10.0;  // |x| beyond which the normal mass is below 1e-23
constexpr double kDegenerate = 1e-10;

double phi_pdf(double x) noexcept { return std::exp(-0.5 * x * x) * 0.39894228040143267794; }

}  // namespace

double phi_cdf(double x) noexcept { return 0.5 * std::erfc(-x * (1.0 / std::numbers::sqrt2)); }

double bivariate_cdf(double a, double b, double rho) {
  if (std::isnan(a) || std::isnan(b) || std::isnan(rho)) throw std::invalid_argument("bivariate_cdf: NaN input");
  if (a <= -40.0 || b <= -40.0) return 0.0;
  if (a >= 40.0) return phi_cdf(b);
  if (b >= 40.0) return phi_cdf(a);
  if (rho >= 1.0 - 1e-15) return phi_cdf(std::min(a, b));
  if (rho <= -1.0 + 1e-15) return std::max(0.0, phi_cdf(a) + phi_cdf(b) - 1.0);
  if (rho == 0.0) return phi_cdf(a) * phi_cdf(b);

  // Drezner-Wesolowsky with Genz's refinement: P(X > h, Y > k).
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double h = -a;
  double k = -b;
  double hk = h * k;
  double upper_tail = 0.0;
  if (std::abs(rho) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    auto integrand = [hk, hs](double theta) {
      const double sn = std::sin(theta);
      return std::exp((sn * hk - hs) / (1.0 - sn * sn));
    };
    const double asr = std::asin(rho);
    upper_tail = Legendre::integrate(integrand, 0.0, asr) / kTwoPi + phi_cdf(-h) * phi_cdf(-k);
  } else {
    if (rho < 0.0) {
      k = -k;
      hk = -hk;
    }
    const double as = (1.0 - rho) * (1.0 + rho);
    const double sa = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double v = sa * std::exp(-0.5 * (bs / as + hk)) *
               (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double sb = std::sqrt(bs);
      v -= std::exp(-0.5 * hk) * std::sqrt(kTwoPi) * phi_cdf(-sb / sa) * sb * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    auto integrand = [bs, hk, c, d](double x) {
      const double xs = x * x;
      const double rs = std::sqrt(1.0 - xs);
      return std::exp(-0.5 * bs / xs - hk / (1.0 + rs)) / rs - std::exp(-0.5 * (bs / xs + hk)) * (1.0 + c * xs * (1.0 + d * xs));
    };
    v += Legendre::integrate(integrand, 0.0, sa);
    upper_tail = -v / kTwoPi;
    if (rho > 0.0) {
      upper_tail += phi_cdf(-std::max(h, k));
    } else {
      upper_tail = -upper_tail;
      if (k > h) upper_tail += phi_cdf(k) - phi_cdf(h);
    }
  }
  return std::clamp(upper_tail, 0.0, 1.0);
}

double orthant_cdf(std::span<const double> upper, const CorrelationMatrix& corr) {
  const std::size_t n = corr.n;
  if (n == 0 || upper.size() != n || corr.values.size() != n * n) {
    throw std::invalid_argument("orthant_cdf: dimension mismatch");
  }
  if (n > 4) throw std::invalid_argument("orthant_cdf: n <= 4 only");
  if (n == 1) return phi_cdf(upper[0]);
  if (n == 2) return bivariate_cdf(upper[0], upper[1], corr(0, 1));

  // Condition on X_0 = x. Remaining coordinates have means r_j x, standard
  // deviations s_j = sqrt(1 - r_j^2) and correlations (R_jk - r_j r_k)/(s_j s_k).
  double lo = -kCut;
  double hi = std::min(upper[0], kCut);
  std::vector<std::size_t> rest;
  std::vector<double> r, s;
  for (std::size_t j = 1; j < n; ++j) {
    const double rj = corr(0, j);
    const double sj2 = 1.0 - rj * rj;
    if (sj2 < kDegenerate) {
      // X_j = sign(r_j) X_0 almost surely: a constraint on x.
      if (rj > 0) {
        hi = std::min(hi, upper[j]);
      } else {
        lo = std::max(lo, -upper[j]);
      }
      continue;
    }
    rest.push_back(j);
    r.push_back(rj);
    s.push_back(std::sqrt(sj2));
  }
  if (lo >= hi) return 0.0;
  if (rest.empty()) return std::max(0.0, phi_cdf(hi) - phi_cdf(lo));

  const std::size_t m = rest.size();
  CorrelationMatrix cond{m, std::vector<double>(m * m, 1.0)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      if (i == k) continue;
      const double v = (corr(rest[i], rest[k]) - r[i] * r[k]) / (s[i] * s[k]);
      cond.values[i * m + k] = std::clamp(v, -1.0, 1.0);
    }
  }
  std::vector<double> shifted(m);
  auto integrand = [&](double x) {
    for (std::size_t i = 0; i < m; ++i) shifted[i] = (upper[rest[i]] - r[i] * x) / s[i];
    return phi_pdf(x) * orthant_cdf(shifted, cond);
  };
  // The integrand rebinds `shifted`, so evaluation must stay sequential.
  // A nested integrand is itself only accurate to ~1e-11, so asking for that
  // much from the outer rule just makes the error estimate chase noise.
  const double tol = m == 2 ? 1e-11 : 1e-9;
  const double value = Kronrod::integrate(integrand, lo, hi, 12, tol);
  return std::clamp(value, 0.0, 1.0);
}

CorrelationMatrix random_correlation(std::size_t n, NormalSource& noise) {
  std::vector<double> g(n * n);
  noise.fill_normal(g);
  CorrelationMatrix c{n, std::vector<double>(n * n)};
  std::vector<double> norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += g[i * n + k] * g[i * n + k];
    norm[i] = std::sqrt(s);
  }
  for (std::size_t i = 0; i < n; ++i) {
    c.values[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[i * n + k] * g[j * n + k];
      const double r = std::clamp(s / (norm[i] * norm[j]), -1.0, 1.0);
      c.values[i * n + j] = c.values[j * n + i] = r;
    }
  }
  return c;
}

}  // namespace rfbm::mvn
