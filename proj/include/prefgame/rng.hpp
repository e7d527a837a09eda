#pragma once

#include <cstdint>

namespace prefgame {

// Splittable counter-based pseudo-random generator (splitmix64 core: the
// state advances by a fixed increment and the output is a bijective hash of
// it). Every stochastic operation in the library takes an explicit Rng, so a
// run is bit-reproducible for a given seed. split() derives an independent
// stream for use in parallel workers.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Independent child stream; advances this stream by one draw.
  Rng split() { return Rng(next_u64() ^ 0xD1B54A32D192ED03ULL); }

  // UniformRandomBitGenerator interface.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~static_cast<result_type>(0); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t state_;
};

}  // namespace prefgame
