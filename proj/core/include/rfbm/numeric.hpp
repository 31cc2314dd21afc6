#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace rfbm {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// out[0] = 0, out[i] = x[0] + ... + x[i-1], compensated.
inline std::vector<double> compensated_prefix_sum(std::span<const double> x) {
  std::vector<double> out(x.size() + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc.add(x[i]);
    out[i + 1] = acc.value();
  }
  return out;
}

/// Pairwise (cascade) summation; result is independent of thread layout.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

/// out[i] = min(x[max(0, i-window)] .. x[i]) via a monotone deque, O(n).
inline std::vector<double> sliding_min(std::span<const double> x, std::size_t window) {
  std::vector<double> out(x.size());
  std::deque<std::size_t> idx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (!idx.empty() && x[idx.back()] >= x[i]) idx.pop_back();
    idx.push_back(i);
    if (idx.front() + window < i) idx.pop_front();
    out[i] = x[idx.front()];
  }
  return out;
}

/// out[i] = max(x[i+1] .. x[min(n-1, i+window)]); the last entry has no
/// successor and is set to -infinity.
inline std::vector<double> forward_sliding_max(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  std::vector<double> out(n, -HUGE_VAL);
  std::deque<std::size_t> idx;
  for (std::size_t k = n; k-- > 0;) {
    // idx holds candidates among k+1 .. k+window, decreasing in value.
    while (!idx.empty() && idx.front() > k + window) idx.pop_front();
    if (!idx.empty()) out[k] = x[idx.front()];
    while (!idx.empty() && x[idx.back()] <= x[k]) idx.pop_back();
    idx.push_back(k);
  }
  return out;
}

}  // namespace rfbm
