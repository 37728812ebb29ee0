#pragma once

#include <cstdint>

namespace snngx {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Counter-based generator. Draw i of a stream depends only on (stream key, i),
/// so every consumer keyed by (seed, generation, index, tag) sees the same
/// sequence no matter how work is scheduled across threads.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
      : key_(stream_key(seed, a, b, c)) {}

  static std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                                  std::uint64_t c = 0) noexcept {
    constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t k = mix64(seed + golden);
    k = mix64(k ^ (a + golden));
    k = mix64(k ^ (b + golden));
    k = mix64(k ^ (c + golden));
    return k;
  }

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ ^ counter_);
  }

  /// Uniform in [0, 1).
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return next_double() < p; }

  /// Uniform in [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace snngx
