#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "jpa/constants.hpp"

namespace jpa {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Child seed for positionally indexed streams; independent of evaluation
// order so parallel schedules cannot change results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64_next(s);
}

// xoshiro256++, seeded through splitmix64. Fully specified here so streams
// are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
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

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal pair via Box-Muller.
  void normal_pair(double& z0, double& z1) {
    const double u0 = 1.0 - uniform();  // (0, 1]
    const double u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u0));
    z0 = r * std::cos(kTwoPi * u1);
    z1 = r * std::sin(kTwoPi * u1);
  }

  double normal() {
    double z0, z1;
    normal_pair(z0, z1);
    return z0;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace jpa
