#pragma once

// Seedable random source shared by the whole library.
//
// The engine is std::mt19937_64. Uniforms, normals and exponentials are derived from its raw
// 64-bit output with fixed formulas (no std::*_distribution), so streams are identical across
// standard library implementations. Independent streams are keyed by (seed, index, generator id)
// through a splitmix64 mix, so parallel generation never shares mutable state.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ldo {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream for item `index` of generator `generator_id` under master seed `seed`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                           std::uint64_t generator_id) {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (generator_id * 0xd1b54a32d192ed03ULL));
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index, std::uint64_t generator_id) {
    return Rng(derive_seed(seed, index, generator_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_open0() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Box-Muller transform; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double exponential() { return -std::log(uniform_open0()); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ldo
