#pragma once

// xoshiro256** seeded through splitmix64. Every random draw in the project
// goes through this generator so streams can be replicated bit-for-bit by
// other implementations:
//
//   seeding  : s[i] = splitmix64(state) for i = 0..3, state starting at seed
//   index    : uniform_index(n) = (next() * n) >> 64 (128-bit product, no rejection)
//   unit     : uniform01() = ((next() >> 11) + 0.5) * 2^-53, strictly inside (0,1)
//   normal   : Box-Muller, cosine branch, two uniform01() draws per value

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spd {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

__extension__ typedef unsigned __int128 uint128_t;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<uint128_t>(next()) * n) >> 64);
  }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double sigma) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
};

// Per-volume seed for promptsim: seed XOR volume index.
inline std::uint64_t volume_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }

// Independent stream for another purpose (phantom geometry, corruption...)
// derived from the same master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (salt * 0xd1b54a32d192ed03ULL);
  return splitmix64(s);
}

}  // namespace spd
