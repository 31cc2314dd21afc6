#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace rfbm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A 64-bit key selects an independent stream; the 128-bit counter indexes
/// blocks of four 32-bit outputs inside it.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t key = 0) noexcept;

  static Block bijection(Block counter, Key key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Jump to an absolute block position within the stream.
  void seek(std::uint64_t block) noexcept;

 private:
  Key key_{};
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned used_ = 4;
};

/// Named, hierarchical substream identifier. Keys derive deterministically
/// from the root seed and the path of labels, e.g. root(7).child("fbm").child(12)
/// is the "fbm/12" stream.
class StreamKey {
 public:
  constexpr StreamKey() = default;
  static StreamKey root(std::uint64_t seed) noexcept;

  StreamKey child(std::string_view label) const noexcept;
  StreamKey child(std::uint64_t index) const noexcept;

  std::uint64_t value() const noexcept { return key_; }
  friend bool operator==(StreamKey, StreamKey) = default;

 private:
  constexpr explicit StreamKey(std::uint64_t k) : key_(k) {}
  std::uint64_t key_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Uniform and standard normal variates drawn from a single Philox stream.
/// Normals use Box-Muller so the number of 32-bit words consumed per variate
/// is fixed, which keeps noise consumption identical across samplers.
class NormalSource {
 public:
  explicit NormalSource(StreamKey key) noexcept : engine_(key.value()) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rfbm
