#pragma once
// Splittable counter-keyed RNG: each trajectory draws from an independent
// xoshiro256++ stream derived from (seed, trajectory index) so results do not
// depend on how trajectories are scheduled across workers.

#include <cstdint>

namespace gptraj {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  // Stream keyed by (seed, stream); stream 0 is valid.
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (0xA0761D6478BD642FULL * (stream + 1));
    // Disperse the key through splitmix64 to fill the state.
    s_[0] = splitmix64(x);
    s_[1] = splitmix64(x);
    s_[2] = splitmix64(x);
    s_[3] = splitmix64(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // never all-zero
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace gptraj
