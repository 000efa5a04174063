#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace sgdlab {

/// Counter-based random stream: every output is a pure function of
/// (seed, counter), so a stream can be replayed from its seed and split
/// across parallel runs without shared state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), base_(mix(seed + 0x6A09E667F3BCC909ULL)), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return mix(base_ + counter_++); }

  /// Uniform on (0, 1), strictly excluding the endpoints.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform index in {0, ..., n-1} via fixed-point multiply.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// One standard normal draw; advances the counter by exactly one.
  double gaussian() {
    const std::uint64_t a = mix(base_ + counter_++);
    const std::uint64_t b = mix(a ^ 0xD1B54A32D192ED03ULL);
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

  std::vector<double> gaussian(std::size_t count) {
    std::vector<double> out(count);
    for (auto& z : out) z = gaussian();
    return out;
  }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace sgdlab
