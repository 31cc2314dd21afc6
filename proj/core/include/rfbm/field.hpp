#pragma once

#include <utility>
#include <vector>

#include "rfbm/fbm.hpp"
#include "rfbm/mc.hpp"
#include "rfbm/mvn.hpp"
#include "rfbm/rng.hpp"

namespace rfbm::field {

using fbm::HurstParameter;

/// (s, tau) coordinates of the rescaled field
/// Z_u(s, tau) = (B_H(u(s + tau)) - B_H(us)) / (tau^H u^H nu(tau)).
struct FieldPoint {
  double s = 0.0;
  double tau = 1.0;
};

struct CorrelationQuery {
  double u = 1.0;
  double u_prime = 1.0;
  FieldPoint p1;
  FieldPoint p2;
};

/// tau^{-H} + tau^{1-H}.
double nu(double tau, HurstParameter h);
/// Standard deviation of Z(s, tau): 1 / nu(tau), maximal at tau0 = H/(1-H).
double sigma_z(double tau, HurstParameter h);

/// r_{u,u'}(s, tau, s', tau'): correlation of the two normalised increments.
/// Closed form in the lag us - u's'; when that lag vanishes (relative to the
/// interval lengths) the covariance of raw increments is used directly.
double field_correlation(const CorrelationQuery& q, HurstParameter h);

/// Empirical sup of |r| over the constraint set
///   |us - u's'| >= t max(u, u'),  tau, tau' in (tau1, tau2),
/// found by randomised search with `samples` candidate queries.
double correlation_decay_envelope(double t, HurstParameter h, double tau1, double tau2, StreamKey key,
                                  std::size_t samples = 10'000);

struct TransformationParams {
  double dt = 0.01;
  double window = 0.0;  // look-back/ahead length; 0 selects the default rule
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
};

struct TransformationCheck {
  McEstimate left;   // P(sup_{t in [0,T]} Q(t) > u)
  McEstimate right;  // P(sup_{s in [0,T/u], tau >= 0} Z_u(s,tau) > u^{1-H})
};

/// Independent Monte Carlo estimates of both sides of the time-change identity.
TransformationCheck transformation_check(double level_u, double horizon_t, HurstParameter h,
                                         const TransformationParams& params);

struct BermanGap {
  double lhs = 0.0;  // P(xi <= u) - P(eta <= u)
  double rhs = 0.0;  // Berman's explicit bound
};

/// Both sides of Berman's comparison inequality for n <= 4 standard normal
/// vectors with correlations corr1 (xi) and corr0 (eta).
BermanGap berman_gap(const mvn::CorrelationMatrix& corr1, const mvn::CorrelationMatrix& corr0,
                     std::span<const double> levels);

}  // namespace rfbm::field
