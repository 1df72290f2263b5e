#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace heis {

// Deterministic, platform-independent RNG stack. std::<*>_distribution output is
// implementation-defined, so uniform/normal variates are constructed explicitly.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_bits(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  std::uint64_t r = splitmix64(s);
  return r ^ splitmix64(s);
}

inline std::uint64_t hash_double_bits(std::uint64_t h, double v) {
  return mix_bits(h, std::bit_cast<std::uint64_t>(v));
}

// xoshiro256++
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
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

  // [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller; the spare is cached, so draws stay deterministic per stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t state_fingerprint() const { return s_[0] ^ rotl(s_[1], 13) ^ rotl(s_[2], 29) ^ rotl(s_[3], 47); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Independent child stream; deterministic in (seed, stream index).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_bits(seed, stream)); }

}  // namespace heis
