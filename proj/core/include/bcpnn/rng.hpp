#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bcpnn::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t hash2(std::uint64_t a, std::uint64_t b) {
  return mix(mix(a + kGolden) ^ (b + kGolden));
}

constexpr std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(hash2(a, b) ^ (c + kGolden));
}

constexpr std::uint64_t hash4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                              std::uint64_t d) {
  return mix(hash3(a, b, c) ^ (d + kGolden));
}

constexpr double to_unit_double(std::uint64_t r) {
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

/// Uniform draw in [0,1) keyed by (seed, salt, step, unit). Counter-based:
/// order-independent across units and steps, so parallel evaluation is
/// deterministic.
constexpr double unit_uniform(std::uint64_t seed, std::uint64_t salt,
                              std::uint64_t step, std::uint64_t unit) {
  return to_unit_double(hash4(seed, salt, step, unit));
}

/// Sequential SplitMix64 stream identified by (seed, stream_id).
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(hash2(seed, stream_id)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform in [0,1).
  double next_double() { return to_unit_double(next_u64()); }

  /// Unbiased uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t threshold = -bound % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Seeded Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Draw k distinct values from [0, n) (k <= n), ascending order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t state_;
};

}  // namespace bcpnn::rng
