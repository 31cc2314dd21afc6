#include "rfbm/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>

#include "rfbm/csv.hpp"
#include "rfbm/error.hpp"
#include "rfbm/numeric.hpp"

namespace rfbm::fbm {
namespace {

// FFTW's planner is not reentrant; execution on fresh arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct Plans {
  fftw_plan forward = nullptr;   // r2c, size M
  fftw_plan backward = nullptr;  // c2r, size M
};

const Plans& plans_for(std::size_t m) {
  static std::map<std::size_t, Plans> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto real = fftw_buffer<double>(m);
  auto cplx = fftw_buffer<fftw_complex>(m / 2 + 1);
  const int n = static_cast<int>(m);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(n, real.get(), cplx.get(), flags);
  p.backward = fftw_plan_dft_c2r_1d(n, cplx.get(), real.get(), flags);
  return cache.emplace(m, p).first->second;
}

bool is_smooth(std::size_t n) {
  for (std::size_t f : {2u, 3u, 5u, 7u}) {
    while (n % f == 0) n /= f;
  }
  return n == 1;
}

std::size_t next_smooth(std::size_t n) {
  while (!is_smooth(n)) ++n;
  return n;
}

}  // namespace

HurstParameter::HurstParameter(double value) : value_(value) {
  if (!(value >= kMin && value <= kMax)) {
    throw Error(ErrorCode::DomainError, "Hurst parameter must lie in [0.01, 0.99], got " + std::to_string(value));
  }
}

FbmPath::FbmPath(HurstParameter hurst, double dt, std::vector<double> values)
    : hurst_(hurst), dt_(dt), values_(std::move(values)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::DomainError, "dt must be positive");
  if (values_.size() < 2) throw Error(ErrorCode::DomainError, "a path needs at least two grid points");
  if (values_[0] != 0.0) throw Error(ErrorCode::DomainError, "fBm paths start at 0");
}

double fbm_covariance(double t, double s, HurstParameter h) noexcept {
  const double e = h.twice();
  return 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
}

double fgn_autocovariance(std::size_t k, HurstParameter h) noexcept {
  const double e = h.twice();
  const double kk = static_cast<double>(k);
  if (k == 0) return 1.0;
  return 0.5 * (std::pow(kk + 1.0, e) - 2.0 * std::pow(kk, e) + std::pow(kk - 1.0, e));
}

FgnAutocovariance fgn_autocovariance_sequence(std::size_t max_lag, HurstParameter h) {
  FgnAutocovariance out{h, std::vector<double>(max_lag + 1)};
  for (std::size_t k = 0; k <= max_lag; ++k) out.lags[k] = fgn_autocovariance(k, h);
  return out;
}

CirculantEmbedding::CirculantEmbedding(std::size_t length, HurstParameter h)
    : length_(length), half_(next_smooth(std::max<std::size_t>(length, 1))), hurst_(h) {
  if (length == 0) throw Error(ErrorCode::DomainError, "embedding length must be positive");
  const std::size_t m = 2 * half_;
  auto row = fftw_buffer<double>(m);
  auto spectrum = fftw_buffer<fftw_complex>(half_ + 1);
  for (std::size_t j = 0; j <= half_; ++j) row[j] = fgn_autocovariance(j, h);
  for (std::size_t j = 1; j < half_; ++j) row[m - j] = row[j];
  fftw_execute_dft_r2c(plans_for(m).forward, row.get(), spectrum.get());

  eigen_.resize(half_ + 1);
  double largest = 0.0;
  for (std::size_t k = 0; k <= half_; ++k) {
    eigen_[k] = spectrum[k][0];
    largest = std::max(largest, eigen_[k]);
  }
  const double floor = -kEigenTolerance * largest;
  for (double& lambda : eigen_) {
    if (lambda < floor) {
      throw Error(ErrorCode::EmbeddingNotNonnegative,
                  "circulant eigenvalue " + std::to_string(lambda) + " below tolerance; use the dense sampler");
    }
    if (lambda < 0.0) {
      lambda = 0.0;
      ++clamped_;
    }
  }

  const double md = static_cast<double>(m);
  scale_.resize(half_ + 1);
  scale_[0] = std::sqrt(eigen_[0] / md);
  scale_[half_] = std::sqrt(eigen_[half_] / md);
  for (std::size_t k = 1; k < half_; ++k) scale_[k] = std::sqrt(eigen_[k] / (2.0 * md));
}

double CirculantEmbedding::eigenvalue_mean() const noexcept {
  CompensatedSum s;
  s.add(eigen_[0]);
  s.add(eigen_[half_]);
  for (std::size_t k = 1; k < half_; ++k) s.add(2.0 * eigen_[k]);
  return s.value() / static_cast<double>(2 * half_);
}

std::vector<double> CirculantEmbedding::sample_increments(NormalSource& noise) const {
  const std::size_t m = 2 * half_;
  auto coeff = fftw_buffer<fftw_complex>(half_ + 1);
  auto out = fftw_buffer<double>(m);
  coeff[0][0] = scale_[0] * noise.normal();
  coeff[0][1] = 0.0;
  for (std::size_t k = 1; k < half_; ++k) {
    coeff[k][0] = scale_[k] * noise.normal();
    coeff[k][1] = scale_[k] * noise.normal();
  }
  coeff[half_][0] = scale_[half_] * noise.normal();
  coeff[half_][1] = 0.0;
  fftw_execute_dft_c2r(plans_for(m).backward, coeff.get(), out.get());
  return std::vector<double>(out.get(), out.get() + length_);
}

std::shared_ptr<const CirculantEmbedding> CirculantEmbedding::get(std::size_t length, HurstParameter h) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, std::shared_ptr<const CirculantEmbedding>> cache;
  const auto key = std::make_pair(length, h.value());
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const CirculantEmbedding>(length, h);
  std::lock_guard lock(mutex);
  // Large embeddings (long single paths) are not worth pinning in memory.
  if (built->circulant_size() <= (1u << 22)) cache.emplace(key, built);
  return built;
}

std::vector<double> sample_fgn_circulant(std::size_t count, double dt, HurstParameter h, StreamKey key) {
  if (count == 0) throw Error(ErrorCode::DomainError, "need at least one increment");
  if (!(dt > 0.0)) throw Error(ErrorCode::DomainError, "dt must be positive");
  const auto embedding = CirculantEmbedding::get(count, h);
  NormalSource noise(key);
  std::vector<double> increments = embedding->sample_increments(noise);
  const double scale = std::pow(dt, h.value());
  for (double& x : increments) x *= scale;
  return increments;
}

FbmPath sample_fbm_circulant(std::size_t n, double dt, HurstParameter h, StreamKey key) {
  if (n < 2) throw Error(ErrorCode::DomainError, "need n >= 2 grid points");
  return FbmPath(h, dt, compensated_prefix_sum(sample_fgn_circulant(n - 1, dt, h, key)));
}

struct DenseFbmSampler::Factor {
  Eigen::MatrixXd lower;
};

DenseFbmSampler::DenseFbmSampler(std::vector<double> times, HurstParameter h)
    : times_(std::move(times)), hurst_(h) {
  if (times_.empty()) throw Error(ErrorCode::DomainError, "no sample times");
  if (times_.size() > kMaxPoints) {
    throw Error(ErrorCode::SizeTooLarge, "dense sampler limited to " + std::to_string(kMaxPoints) + " points");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > 0.0) || (i > 0 && !(times_[i] > times_[i - 1]))) {
      throw Error(ErrorCode::DomainError, "sample times must be positive and strictly increasing");
    }
  }
  const auto n = static_cast<Eigen::Index>(times_.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      cov(i, j) = cov(j, i) = fbm_covariance(times_[i], times_[j], h);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "covariance matrix is not numerically positive definite");
  }
  factor_ = std::make_unique<Factor>(Factor{llt.matrixL()});
}

DenseFbmSampler::~DenseFbmSampler() = default;
DenseFbmSampler::DenseFbmSampler(DenseFbmSampler&&) noexcept = default;
DenseFbmSampler& DenseFbmSampler::operator=(DenseFbmSampler&&) noexcept = default;

std::vector<double> DenseFbmSampler::sample(NormalSource& noise) const {
  const auto n = static_cast<Eigen::Index>(times_.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = noise.normal();
  const Eigen::VectorXd x = factor_->lower.triangularView<Eigen::Lower>() * z;
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> DenseFbmSampler::sample_block(std::span<NormalSource> noises) const {
  const auto n = static_cast<Eigen::Index>(times_.size());
  const auto k = static_cast<Eigen::Index>(noises.size());
  Eigen::MatrixXd z(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = noises[static_cast<std::size_t>(j)].normal();
  }
  const Eigen::MatrixXd x = factor_->lower.triangularView<Eigen::Lower>() * z;
  return std::vector<double>(x.data(), x.data() + n * k);
}

std::vector<double> DenseFbmSampler::covariance() const {
  const std::size_t n = times_.size();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = fbm_covariance(times_[i], times_[j], hurst_);
  }
  return out;
}

FbmPath sample_fbm_dense_oracle(std::size_t n, double dt, HurstParameter h, StreamKey key) {
  if (n > kDenseOracleMaxN) {
    throw Error(ErrorCode::SizeTooLarge, "dense oracle limited to n <= " + std::to_string(kDenseOracleMaxN));
  }
  if (n < 2) throw Error(ErrorCode::DomainError, "need n >= 2 grid points");
  if (!(dt > 0.0)) throw Error(ErrorCode::DomainError, "dt must be positive");

  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, double, double>, std::shared_ptr<const DenseFbmSampler>> cache;
  const auto cache_key = std::make_tuple(n, dt, h.value());
  std::shared_ptr<const DenseFbmSampler> sampler;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(cache_key); it != cache.end()) sampler = it->second;
  }
  if (!sampler) {
    std::vector<double> times(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) times[i] = dt * static_cast<double>(i + 1);
    sampler = std::make_shared<const DenseFbmSampler>(std::move(times), h);
    std::lock_guard lock(mutex);
    if (cache.size() >= 8) cache.clear();
    cache.emplace(cache_key, sampler);
  }
  NormalSource noise(key);
  std::vector<double> inner = sampler->sample(noise);
  std::vector<double> values(n, 0.0);
  std::copy(inner.begin(), inner.end(), values.begin() + 1);
  return FbmPath(h, dt, std::move(values));
}

void write_path_csv(std::ostream& os, const FbmPath& path) {
  std::vector<double> t(path.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = path.time(i);
  const std::string_view header[] = {"t", "value"};
  const std::span<const double> cols[] = {t, path.values()};
  write_csv(os, header, cols);
}

}  // namespace rfbm::fbm
