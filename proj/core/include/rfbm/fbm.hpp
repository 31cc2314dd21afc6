#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "rfbm/rng.hpp"

namespace rfbm::fbm {

/// Hurst exponent H. Values outside [0.01, 0.99] are rejected: covariance
/// matrices and circulant embeddings lose conditioning near the endpoints.
class HurstParameter {
 public:
  static constexpr double kMin = 0.01;
  static constexpr double kMax = 0.99;

  explicit HurstParameter(double value);

  double value() const noexcept { return value_; }
  double twice() const noexcept { return 2.0 * value_; }

 private:
  double value_;
};

/// B_H sampled at t_i = i * dt, i = 0..n-1, with values[0] = 0.
class FbmPath {
 public:
  FbmPath(HurstParameter hurst, double dt, std::vector<double> values);

  HurstParameter hurst() const noexcept { return hurst_; }
  double dt() const noexcept { return dt_; }
  double horizon() const noexcept { return dt_ * static_cast<double>(values_.size() - 1); }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double time(std::size_t i) const noexcept { return dt_ * static_cast<double>(i); }

 private:
  HurstParameter hurst_;
  double dt_;
  std::vector<double> values_;
};

/// Cov(B_H(t), B_H(s)) = (|t|^2H + |s|^2H - |t-s|^2H) / 2.
double fbm_covariance(double t, double s, HurstParameter h) noexcept;

/// Lag-k autocovariance of unit-spaced fractional Gaussian noise.
double fgn_autocovariance(std::size_t k, HurstParameter h) noexcept;

struct FgnAutocovariance {
  HurstParameter hurst;
  std::vector<double> lags;  // gamma(0..K)
};

FgnAutocovariance fgn_autocovariance_sequence(std::size_t max_lag, HurstParameter h);

/// Circulant embedding of unit-step fGn of a given length. The circulant has
/// size M = 2K (K >= length, K smooth for the FFT), first row
/// gamma(0), ..., gamma(K), gamma(K-1), ..., gamma(1).
class CirculantEmbedding {
 public:
  /// Relative threshold below which negative eigenvalues are clamped to 0.
  static constexpr double kEigenTolerance = 1e-9;

  CirculantEmbedding(std::size_t length, HurstParameter h);

  std::size_t length() const noexcept { return length_; }
  std::size_t circulant_size() const noexcept { return 2 * half_; }
  /// Eigenvalues lambda_0 .. lambda_K (the rest follow by symmetry), clamped.
  std::span<const double> eigenvalues() const noexcept { return eigen_; }
  /// Mean of all M eigenvalues; equals gamma(0) = 1 analytically.
  double eigenvalue_mean() const noexcept;
  /// Number of eigenvalues that were slightly negative and clamped to 0.
  std::size_t clamped() const noexcept { return clamped_; }

  /// Unit-step fGn of `length()` values. Consumes exactly M normals from `noise`.
  std::vector<double> sample_increments(NormalSource& noise) const;

  /// Shared cache keyed by (length, H).
  static std::shared_ptr<const CirculantEmbedding> get(std::size_t length, HurstParameter h);

 private:
  std::size_t length_;
  std::size_t half_;
  HurstParameter hurst_;
  std::vector<double> eigen_;
  std::vector<double> scale_;
  std::size_t clamped_ = 0;
};

/// `count` exact fGn increments for step dt (variance dt^{2H}).
std::vector<double> sample_fgn_circulant(std::size_t count, double dt, HurstParameter h, StreamKey key);

/// Exact fBm path of n grid points via circulant embedding of fGn.
/// Increments are scaled by dt^H and prefix-summed with compensation.
FbmPath sample_fbm_circulant(std::size_t n, double dt, HurstParameter h, StreamKey key);

/// Dense-Cholesky exact sampler over arbitrary distinct positive times.
/// Factorisation is done once; each sample costs one triangular mat-vec.
class DenseFbmSampler {
 public:
  static constexpr std::size_t kMaxPoints = 8192;

  DenseFbmSampler(std::vector<double> times, HurstParameter h);
  ~DenseFbmSampler();
  DenseFbmSampler(DenseFbmSampler&&) noexcept;
  DenseFbmSampler& operator=(DenseFbmSampler&&) noexcept;

  std::span<const double> times() const noexcept { return times_; }
  /// B_H at times(), in order. Consumes times().size() normals.
  std::vector<double> sample(NormalSource& noise) const;
  /// Column-major times().size() x noises.size() block; column j draws from
  /// noises[j] only. One blocked triangular product instead of many
  /// matrix-vector products. Keep the column count fixed across calls if
  /// results must be bit-identical between runs of different lengths.
  std::vector<double> sample_block(std::span<NormalSource> noises) const;
  /// The covariance matrix that was factorised (row-major).
  std::vector<double> covariance() const;

 private:
  struct Factor;
  std::vector<double> times_;
  HurstParameter hurst_;
  std::unique_ptr<Factor> factor_;
};

/// Slow exact reference: Cholesky of the n-1 x n-1 covariance of B_H(dt..(n-1)dt).
FbmPath sample_fbm_dense_oracle(std::size_t n, double dt, HurstParameter h, StreamKey key);

inline constexpr std::size_t kDenseOracleMaxN = 2048;

/// CSV `t,value` with 17 significant digits.
void write_path_csv(std::ostream& os, const FbmPath& path);

}  // namespace rfbm::fbm
