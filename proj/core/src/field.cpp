#include "rfbm/field.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rfbm/error.hpp"
#include "rfbm/numeric.hpp"
#include "rfbm/parallel.hpp"

namespace rfbm::field {
namespace {

// |1 + x|^{2H} - 1 without cancellation for small x.
double power_offset(double x, double twice_h) {
  const double base = 1.0 + x;
  if (base == 0.0) return -1.0;
  const double lg = x > -1.0 ? std::log1p(x) : std::log(std::abs(base));
  return std::expm1(twice_h * lg);
}

double tau0_of(HurstParameter h) { return h.value() / (1.0 - h.value()); }

void validate_matrix(const mvn::CorrelationMatrix& m, std::size_t n) {
  if (m.n != n || m.values.size() != n * n) throw Error(ErrorCode::InvalidCorrelation, "dimension mismatch");
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidCorrelation, "non-finite entry");
      if (i == j && std::abs(v - 1.0) > 1e-12) throw Error(ErrorCode::InvalidCorrelation, "diagonal must be 1");
      if (std::abs(v - m(j, i)) > 1e-12) throw Error(ErrorCode::InvalidCorrelation, "matrix must be symmetric");
      if (std::abs(v) > 1.0 + 1e-12) throw Error(ErrorCode::InvalidCorrelation, "entries must lie in [-1, 1]");
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::InvalidCorrelation, "matrix is not positive semidefinite");
  }
}

}  // namespace

double nu(double tau, HurstParameter h) {
  if (!(tau > 0.0)) throw Error(ErrorCode::DomainError, "tau must be positive");
  return std::pow(tau, -h.value()) + std::pow(tau, 1.0 - h.value());
}

double sigma_z(double tau, HurstParameter h) { return 1.0 / nu(tau, h); }

double field_correlation(const CorrelationQuery& q, HurstParameter h) {
  if (!(q.u > 0.0) || !(q.u_prime > 0.0)) throw Error(ErrorCode::DomainError, "u, u' must be positive");
  if (!(q.p1.tau > 0.0) || !(q.p2.tau > 0.0)) throw Error(ErrorCode::DomainError, "tau must be positive");
  if (q.p1.s < 0.0 || q.p2.s < 0.0) throw Error(ErrorCode::DomainError, "s must be nonnegative");

  const double a1 = q.u * q.p1.s;
  const double len1 = q.u * q.p1.tau;
  const double b1 = q.u_prime * q.p2.s;
  const double len2 = q.u_prime * q.p2.tau;
  const double norm = std::pow(len1 * len2, h.value());

  if (h.value() == 0.5) {
    // Brownian increments: covariance is the overlap length.
    const double overlap = std::max(0.0, std::min(a1 + len1, b1 + len2) - std::max(a1, b1));
    return overlap / norm;
  }

  const double lag = a1 - b1;
  if (std::abs(lag) <= 1e-9 * std::max(len1, len2)) {
    using fbm::fbm_covariance;
    const double a2 = a1 + len1;
    const double b2 = b1 + len2;
    const double cov =
        fbm_covariance(a2, b2, h) - fbm_covariance(a2, b1, h) - fbm_covariance(a1, b2, h) + fbm_covariance(a1, b1, h);
    return cov / norm;
  }

  const double e = h.twice();
  const double bracket =
      power_offset(len1 / lag, e) - power_offset((len1 - len2) / lag, e) + power_offset(-len2 / lag, e);
  return std::pow(std::abs(lag), e) / (2.0 * norm) * bracket;
}

double correlation_decay_envelope(double t, HurstParameter h, double tau1, double tau2, StreamKey key,
                                  std::size_t samples) {
  const double tau0 = tau0_of(h);
  if (!(t > 0.0)) throw Error(ErrorCode::DomainError, "t must be positive");
  if (!(tau1 > 0.0 && tau1 < tau0 && tau0 < tau2)) {
    throw Error(ErrorCode::DomainError, "need 0 < tau1 < tau0 < tau2");
  }
  NormalSource rng(key);
  double best = 0.0;
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    // Candidates lean towards the binding corner of the constraint set
    // (smallest admissible lag, comparable scales, long windows) but cover it.
    const double u = std::exp(6.0 * rng.uniform() - 3.0);
    const double u_prime = u * std::exp(0.5 * rng.normal());
    const double w1 = rng.uniform();
    const double w2 = rng.uniform();
    const double tau = tau2 - (tau2 - tau1) * w1 * w1;
    const double tau_p = tau2 - (tau2 - tau1) * w2 * w2;
    const double slack = std::pow(rng.uniform(), 3.0);
    const double magnitude = t * std::max(u, u_prime) * (1.0 + slack);
    const double lag = rng.uniform() < 0.5 ? magnitude : -magnitude;
    const double base = magnitude + 1.0;  // u's' > |lag| keeps both s, s' positive
    CorrelationQuery q{u, u_prime, {(base + lag) / u, tau}, {base / u_prime, tau_p}};
    const double realised = q.u * q.p1.s - q.u_prime * q.p2.s;
    if (std::abs(realised) / u < t || std::abs(realised) / u_prime < t) continue;
    ++accepted;
    best = std::max(best, std::abs(field_correlation(q, h)));
  }
  if (accepted == 0) throw Error(ErrorCode::SearchBudgetExceeded, "no admissible query in the search budget");
  return best;
}

TransformationCheck transformation_check(double level_u, double horizon_t, HurstParameter h,
                                         const TransformationParams& params) {
  if (!(level_u > 0.0) || !(horizon_t > 0.0) || !(params.dt > 0.0)) {
    throw Error(ErrorCode::DomainError, "level, horizon and dt must be positive");
  }
  const double window = params.window > 0.0 ? params.window : 8.0 * tau0_of(h) * std::max(level_u, 1.0);
  const auto nw = static_cast<std::size_t>(std::ceil(window / params.dt));
  const auto nt = static_cast<std::size_t>(std::llround(horizon_t / params.dt));
  const std::size_t points = nw + nt + 1;
  const StreamKey root = StreamKey::root(params.seed);

  auto drifted = [&](StreamKey key) {
    auto path = fbm::sample_fbm_circulant(points, params.dt, h, key);
    std::vector<double> x(path.values().begin(), path.values().end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= params.dt * static_cast<double>(i);
    return x;
  };

  // Left: the storage process on [0, T] looks back over `window`.
  std::vector<char> left_hits(params.reps, 0);
  parallel_for(params.reps, [&](std::size_t r) {
    const auto x = drifted(root.child("transform-left").child(r));
    const auto low = sliding_min(x, nw);
    for (std::size_t i = nw; i <= nw + nt; ++i) {
      if (x[i] - low[i] > level_u) {
        left_hits[r] = 1;
        break;
      }
    }
  });

  // Right: Z_u(s, tau) > u^{1-H}  <=>  B(u(s+tau)) - B(us) - u tau > u,
  // with us on the grid of [0, T] and u tau in (0, window].
  std::vector<char> right_hits(params.reps, 0);
  parallel_for(params.reps, [&](std::size_t r) {
    const auto x = drifted(root.child("transform-right").child(r));
    const auto ahead = forward_sliding_max(x, nw);
    for (std::size_t a = 0; a <= nt; ++a) {
      if (ahead[a] - x[a] > level_u) {
        right_hits[r] = 1;
        break;
      }
    }
  });

  const auto count = [](const std::vector<char>& v) {
    return static_cast<std::uint64_t>(std::count(v.begin(), v.end(), 1));
  };
  TransformationCheck out{binomial_estimate(count(left_hits), params.reps),
                          binomial_estimate(count(right_hits), params.reps)};
  out.left.seed = out.right.seed = params.seed;
  out.left.stream = "transform-left";
  out.right.stream = "transform-right";
  if (out.left.value == 0.0 || out.right.value == 0.0) {
    throw Error(ErrorCode::InfeasibleLevel, "no exceedances; lower the level or raise reps");
  }
  return out;
}

BermanGap berman_gap(const mvn::CorrelationMatrix& corr1, const mvn::CorrelationMatrix& corr0,
                     std::span<const double> levels) {
  const std::size_t n = corr1.n;
  if (n == 0 || n > 4) throw Error(ErrorCode::InvalidCorrelation, "need 1 <= n <= 4");
  if (levels.size() != n) throw Error(ErrorCode::InvalidCorrelation, "one level per coordinate");
  validate_matrix(corr1, n);
  validate_matrix(corr0, n);

  BermanGap g;
  g.lhs = mvn::orthant_cdf(levels, corr1) - mvn::orthant_cdf(levels, corr0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = corr1(i, j) - corr0(i, j);
      if (diff <= 0.0) continue;
      const double rho = std::max(std::abs(corr1(i, j)), std::abs(corr0(i, j)));
      if (rho >= 1.0) {
        g.rhs = HUGE_VAL;
        continue;
      }
      g.rhs += diff / std::sqrt(1.0 - rho * rho) *
               std::exp(-(levels[i] * levels[i] + levels[j] * levels[j]) / (2.0 * (1.0 + rho)));
    }
  }
  g.rhs /= 2.0 * std::numbers::pi;
  return g;
}

}  // namespace rfbm::field
