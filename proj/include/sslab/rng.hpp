#pragma once

// Counter-based random streams. A stream is identified by a (seed, key...)
// tuple; draws within a stream are sequential splitmix64 outputs. Streams with
// distinct keys are independent for practical purposes, so data generation can
// be parallelized in any order and still produce identical results.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sslab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Order-sensitive key mixing: mix_key(a, b) != mix_key(b, a).
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
  splitmix64(s);
  return s;
}

class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : state_(seed) {}

  template <typename... Keys>
  static StreamRng keyed(std::uint64_t seed, Keys... keys) {
    std::uint64_t s = seed;
    ((s = mix_key(s, static_cast<std::uint64_t>(keys))), ...);
    return StreamRng(s);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [-half_width, half_width).
  double next_symmetric(double half_width) {
    return (2.0 * next_uniform() - 1.0) * half_width;
  }

  // Standard normal via Box-Muller; two uniforms per draw keeps streams
  // reproducible across standard libraries (std::normal_distribution is not).
  double next_gaussian() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

// Stream purposes, kept distinct so e.g. feature and noise draws for the same
// sample index never collide.
enum class StreamTag : std::uint64_t {
  features = 1,
  label_noise = 2,
  replicate = 3,
  sweep_cell = 4,
  subset_shuffle = 5,
  plan_permutation = 6,
};

inline std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
  std::uint64_t s = mix_key(seed, static_cast<std::uint64_t>(tag));
  s = mix_key(s, a);
  s = mix_key(s, b);
  return s;
}

}  // namespace sslab
