#include "rfbm/asymptotics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "rfbm/error.hpp"

namespace rfbm::asym {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Inner expression of f_p in L = log s: L + c log L.
double threshold_inner(double L, double c) { return L + c * std::log(L); }

double bisect(double lo, double hi, double c) {
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (threshold_inner(mid, c) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// log s below which f_p is undefined or still decreasing.
double threshold_log_start(double c) {
  if (c == 0.0) return 0.0;
  if (c > 0.0) return bisect(0.0, 1.0, c);  // increasing; g(0+) = -inf, g(1) = 1
  const double turn = -c;                    // g'(L) >= 0 iff L >= -c
  if (threshold_inner(turn, c) > 0.0) return turn;
  double hi = 2.0 * turn;
  while (threshold_inner(hi, c) <= 0.0) hi *= 2.0;
  return bisect(turn, hi, c);
}

void require_monotone(const std::function<double(double)>& f, double t0, double t_max) {
  constexpr int kProbes = 2048;
  const double la = std::log(t0);
  const double lb = std::log(t_max);
  double prev = f(t0);
  if (!(prev > 0.0) || !std::isfinite(prev)) throw Error(ErrorCode::DomainError, "threshold must be positive");
  for (int i = 1; i <= kProbes; ++i) {
    const double u = std::exp(la + (lb - la) * i / kProbes);
    const double cur = f(u);
    if (!(cur > 0.0) || !std::isfinite(cur)) throw Error(ErrorCode::DomainError, "threshold must be positive");
    if (cur < prev * (1.0 - 1e-12)) {
      throw Error(ErrorCode::NotMonotone, "threshold decreases near u = " + std::to_string(u));
    }
    prev = cur;
  }
}

struct WindowIntegral {
  double value = 0.0;
  double error = 0.0;
};

// Integrates u -> (1/f(u)) P_approx(sup_{[0, f(u)]} Q > f(u)) over [t0, t_max]
// in x = log u, one unit-width panel at a time.
WindowIntegral integrate_window(const std::function<double(double)>& f, double t0, double t_max,
                                const ModelConstants& k, double pickands) {
  auto integrand = [&](double x) {
    const double u = std::exp(x);
    const double level = f(u);
    const auto tail = piterbarg_tail(1.0, level, k, pickands);
    return std::exp(x + tail.log_value - std::log(level));
  };
  const double xa = std::log(t0);
  const double xb = std::log(t_max);
  const int panels = std::max(1, static_cast<int>(std::ceil(xb - xa)));
  WindowIntegral out;
  for (int i = 0; i < panels; ++i) {
    const double lo = xa + (xb - xa) * i / panels;
    const double hi = xa + (xb - xa) * (i + 1) / panels;
    double err = 0.0;
    out.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15, 1e-10, &err);
    out.error += err;
  }
  return out;
}

}  // namespace

ModelConstants derive_constants(HurstParameter h) {
  const double H = h.value();
  ModelConstants k{h};
  k.c = 1.0;
  k.tau0 = H / (1.0 - H);
  k.A = std::pow(k.tau0, -H) / (1.0 - H);
  k.B = H * std::pow(k.tau0, -H - 2.0);
  k.a = 1.0 / (2.0 * std::pow(k.tau0, 2.0 * H));
  k.b = k.B / (2.0 * k.A);
  k.cH = (2.0 * (1.0 - H) * (1.0 - H) - H) / (2.0 * H * (1.0 - H));
  k.lambda = 2.0 - 2.0 * H;
  return k;
}

double psi(double u) noexcept { return 0.5 * std::erfc(u * (1.0 / std::numbers::sqrt2)); }

double log_psi(double u) noexcept {
  if (u < 30.0) return std::log(psi(u));
  // Asymptotic Mills-ratio series; the first omitted term is < 2e-14 at u = 30.
  const double w = 1.0 / (u * u);
  const double series = 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * (105.0 + w * (-945.0)))));
  return -0.5 * u * u - std::log(u) - kLogSqrt2Pi + std::log(series);
}

double v_of_level(double f, const ModelConstants& k) {
  if (!(f > 0.0)) throw Error(ErrorCode::DomainError, "level must be positive");
  return k.A * std::pow(f, 1.0 - k.h.value());
}

TailApproximation piterbarg_tail(double window_factor, double level_u, const ModelConstants& k, double pickands) {
  if (!(window_factor > 0.0)) throw Error(ErrorCode::DomainError, "window factor T must be positive");
  if (!(pickands > 0.0)) throw Error(ErrorCode::DomainError, "Pickands constant must be positive");
  const double H = k.h.value();
  const double v = v_of_level(level_u, k);
  TailApproximation out;
  out.log_value = 0.5 * std::log(std::numbers::pi) + (2.0 / H) * std::log(k.a) - 0.5 * std::log(k.b) +
                  2.0 * std::log(pickands) + std::log(window_factor) + (2.0 / H - 1.0) * std::log(v) + log_psi(v);
  out.value = std::exp(out.log_value);
  out.regime_warning = v < 2.0;
  return out;
}

ThresholdFamily make_threshold_family(double p, const ModelConstants& k, double pickands) {
  if (!(pickands > 0.0)) throw Error(ErrorCode::DomainError, "Pickands constant must be positive");
  const double H = k.h.value();
  ThresholdFamily fam;
  fam.p = p;
  fam.constants = k;
  fam.pickands = pickands;
  fam.prefactor = std::pow(k.a, 2.0 / H) / std::sqrt(k.b) * (1.0 / std::numbers::sqrt2) * pickands * pickands *
                  std::pow(k.A, 1.0 / (1.0 - H)) * std::pow(2.0, k.cH);
  fam.s_min = std::exp(threshold_log_start(1.0 + k.cH - p));
  return fam;
}

double f_p(double s, const ThresholdFamily& fam) {
  if (!(s > fam.s_min)) {
    throw Error(ErrorCode::DomainError, "f_p undefined at s = " + std::to_string(s) +
                                            " (needs s > " + std::to_string(fam.s_min) + ")");
  }
  const auto& k = fam.constants;
  const double L = std::log(s);
  const double inner = threshold_inner(L, 1.0 + k.cH - fam.p);
  return std::pow(2.0 / (k.A * k.A) * inner, 1.0 / (2.0 * (1.0 - k.h.value())));
}

double z_p(double u, const ThresholdFamily& fam) {
  if (!(u > fam.s_min)) throw Error(ErrorCode::DomainError, "z_p requires u > s_min");
  return fam.prefactor / (u * std::pow(std::log(u), 1.0 - fam.p));
}

double h_p(double t, const ThresholdFamily& fam, RateMode mode) {
  if (!(fam.p > 0.0)) throw Error(ErrorCode::DomainError, "h_p requires p > 0");
  if (!(t > std::max(fam.s_min, std::exp(std::numbers::e)))) {
    throw Error(ErrorCode::DomainError, "h_p requires t > max(s_min, e^e)");
  }
  const double loglog = std::log(std::log(t));
  if (mode == RateMode::Asymptotic) return fam.p * loglog / z_p(t, fam);
  const double level = f_p(t, fam);
  const auto tail = piterbarg_tail(1.0, level, fam.constants, fam.pickands);
  return fam.p * loglog * std::exp(std::log(level) - tail.log_value);
}

CriterionReport criterion_integral(const ThresholdFamily& fam, double t0, double t_max, CriterionMethod method) {
  if (!(t0 > fam.s_min)) throw Error(ErrorCode::DomainError, "window must start above s_min");
  if (!(t_max > t0)) throw Error(ErrorCode::DomainError, "need t_max > t0");
  auto f = [&fam](double u) { return f_p(u, fam); };
  require_monotone(f, t0, t_max);
  const auto w = integrate_window(f, t0, t_max, fam.constants, fam.pickands);
  CriterionReport r;
  r.integral_on_window = w.value;
  r.error_estimate = w.error;
  r.method = method;
  r.t0 = t0;
  r.t_max = t_max;
  // Quadrature cannot decide divergence; both methods use the exact rule for
  // du / (u log^{1-p} u).
  r.classification = fam.p >= 0.0 ? Classification::Infinite : Classification::Finite;
  return r;
}

CriterionReport criterion_integral(const std::function<double(double)>& f, double t0, double t_max,
                                   const ModelConstants& k, double pickands) {
  if (!(t0 > std::exp(1.0))) throw Error(ErrorCode::DomainError, "window must start above e");
  if (!(t_max > t0)) throw Error(ErrorCode::DomainError, "need t_max > t0");
  require_monotone(f, t0, t_max);
  const auto w = integrate_window(f, t0, t_max, k, pickands);

  constexpr int kPoints = 64;
  const double ya = std::log(std::log(t0));
  const double yb = std::log(std::log(t_max));
  double sy = 0, sd = 0, syy = 0, syd = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * i / (kPoints - 1);
    const double u = std::exp(std::exp(y));
    const double level = f(u);
    const double log_density =
        piterbarg_tail(1.0, level, k, pickands).log_value - std::log(level) + std::log(u) + std::log(std::log(u));
    sy += y;
    sd += log_density;
    syy += y * y;
    syd += y * log_density;
  }
  const double n = kPoints;
  const double slope = (n * syd - sy * sd) / (n * syy - sy * sy);

  CriterionReport r;
  r.integral_on_window = w.value;
  r.error_estimate = w.error;
  r.method = CriterionMethod::Quadrature;
  r.t0 = t0;
  r.t_max = t_max;
  r.classification = slope > -1e-3 ? Classification::Infinite : Classification::Finite;
  return r;
}

double limsup_constant(const ModelConstants& k) noexcept {
  return std::pow(2.0 / (k.A * k.A), 1.0 / (2.0 * (1.0 - k.h.value())));
}

}  // namespace rfbm::asym
