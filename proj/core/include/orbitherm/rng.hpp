#pragma once

// Counter-based splittable RNG for reproducible parallel Monte Carlo.
// Each draw is a pure function of (seed, stream, counter): batches can run
// on any thread in any order and still merge to identical results.

#include <cstdint>

namespace orbitherm {

namespace detail {
// SplitMix64 finalizer (Steele/Lea/Flood); full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(detail::mix64(seed ^ detail::mix64(stream))) {}

  uint64_t bits(uint64_t counter) const {
    return detail::mix64(key_ ^ detail::mix64(counter * 0xD1342543DE82EF95ull + key_));
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double uniform01(uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t key_;
};

// Stateful convenience wrapper over a stream.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream) : rng_(seed, stream) {}
  double next01() { return rng_.uniform01(counter_++); }
  uint64_t next_bits() { return rng_.bits(counter_++); }

 private:
  CounterRng rng_;
  uint64_t counter_ = 0;
};

}  // namespace orbitherm
