#pragma once

#include <cstdint>

namespace magloc {

/// Counter-based random stream: every draw is a pure function of
/// (seed, counter words), so parallel generation is reproducible at any
/// worker count.  splitmix64 finalizer over mixed-in words.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform double in [-1, 1] for the given counter tuple.
  double uniform_pm1(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return 2.0 * uniform01(a, b, c) - 1.0;
  }

  /// Uniform double in [0, 1).
  double uniform01(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    std::uint64_t x = seed_;
    x = mix(x ^ (a * 0x9e3779b97f4a7c15ULL));
    x = mix(x ^ (b * 0xbf58476d1ce4e5b9ULL));
    x = mix(x ^ (c * 0x94d049bb133111ebULL));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace magloc
