#ifndef BOXQP_RNG_HPP
#define BOXQP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace boxqp {

// SplitMix64 (Steele/Lea/Flood): 64-bit state, seeded directly by the
// user-supplied seed. Used everywhere randomness is needed so that runs
// are reproducible from a single integer.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Integer in [lo, hi], rejection-free modular mapping.
  long long uniform_int(long long lo, long long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long long>(next() % span);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1), never exactly 0 (safe for logarithms).
  double uniform01_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes two draws per call.
  double gaussian() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Stream for parallel-safe sample k of a run seeded with `seed`.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    return SplitMix64(mix.next());
  }

 private:
  std::uint64_t state_;
};

}  // namespace boxqp

#endif
