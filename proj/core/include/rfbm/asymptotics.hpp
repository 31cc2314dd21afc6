#pragma once

#include <functional>
#include <optional>

#include "rfbm/fbm.hpp"

namespace rfbm::asym {

using fbm::HurstParameter;

/// Constants of the storage process with unit drift, as functions of H.
struct ModelConstants {
  HurstParameter h{0.5};
  double c = 1.0;   // drift
  double tau0 = 0;  // argmax of the field standard deviation, H/(1-H)
  double A = 0;     // nu(tau0)
  double B = 0;     // nu''(tau0)
  double a = 0;     // 1/(2 tau0^{2H})
  double b = 0;     // B/(2A)
  double cH = 0;    // (2(1-H)^2 - H)/(2H(1-H)); may be negative
  double lambda = 0;  // correlation decay exponent 2-2H
};

ModelConstants derive_constants(HurstParameter h);

/// Upper standard normal tail 1 - Phi(u).
double psi(double u) noexcept;
/// log(1 - Phi(u)), finite for every finite u (no underflow in the far tail).
double log_psi(double u) noexcept;

/// Scaled level A f^{1-H}.
double v_of_level(double f, const ModelConstants& k);

struct TailApproximation {
  double value = 0.0;
  double log_value = 0.0;
  bool regime_warning = false;  // v < 2: outside the asymptotic regime
};

/// Leading-order approximation of P(sup_{t in [0, T*u]} Q(t) > u).
/// NOTE: `window_factor` is the multiplier T of the level, not a time length;
/// the time window is window_factor * level_u.
TailApproximation piterbarg_tail(double window_factor, double level_u, const ModelConstants& k, double pickands);

/// Threshold curves f_p and everything derived from them.
struct ThresholdFamily {
  double p = 0.0;
  ModelConstants constants;
  double pickands = 1.0;
  double prefactor = 0.0;  // the constant C in z_p(u) = C / (u log^{1-p} u)
  double s_min = 1.0;      // f_p is defined, positive and nondecreasing on (s_min, inf)
};

ThresholdFamily make_threshold_family(double p, const ModelConstants& k, double pickands);

double f_p(double s, const ThresholdFamily& fam);
double z_p(double u, const ThresholdFamily& fam);

enum class RateMode { Asymptotic, Exact };

/// p log log t / rate(t); rate is z_p(t) or (1/f_p) * piterbarg_tail(1, f_p(t)).
double h_p(double t, const ThresholdFamily& fam, RateMode mode = RateMode::Asymptotic);

enum class Classification { Finite, Infinite };
enum class CriterionMethod { AnalyticRate, Quadrature };

struct CriterionReport {
  double integral_on_window = 0.0;
  double error_estimate = 0.0;
  Classification classification = Classification::Finite;
  CriterionMethod method = CriterionMethod::AnalyticRate;
  double t0 = 0.0;
  double t_max = 0.0;
};

/// Dichotomy integral for the f_p family on [t0, t_max]. The window integral is
/// always computed by quadrature; the classification is the exact divergence
/// rule for du / (u log^{1-p} u), i.e. Infinite iff p >= 0.
CriterionReport criterion_integral(const ThresholdFamily& fam, double t0, double t_max, CriterionMethod method);

/// Same for a user-supplied threshold f (positive, nondecreasing on the window).
/// Classification is heuristic: the integrand is rewritten in y = log log u and
/// the window integral counts as Infinite when that density does not decay
/// exponentially over the upper part of the window.
CriterionReport criterion_integral(const std::function<double(double)>& f, double t0, double t_max,
                                   const ModelConstants& k, double pickands);

/// (2/A^2)^{1/(2(1-H))}: a.s. limsup of Q(t) / (log t)^{1/(2(1-H))}.
double limsup_constant(const ModelConstants& k) noexcept;

}  // namespace rfbm::asym
