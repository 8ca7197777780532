#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sublin {

// Philox 4x32-10 counter-based generator. Counter-based RNGs give each stream
// an independent, reproducible sequence addressed by (seed, substream, index),
// so sample j of a run consumes exactly the same randomness no matter how the
// work is scheduled.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t substream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        hi_(substream) {}

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    std::uint64_t bits = next_u64();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    std::array<std::uint32_t, 4> block = run_block(hi_, lo_++);
    spare_ = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    have_spare_ = true;
    return (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  }

  // Standard normal via Box-Muller, bit-stable across platforms.
  double next_normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 == 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(theta);
    have_normal_ = true;
    return r * std::cos(theta);
  }

  // Raw block access for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t counter_hi,
                                            std::uint64_t counter_lo) {
    Philox p(seed, counter_hi);
    return p.run_block(counter_hi, counter_lo);
  }

 private:
  static constexpr std::uint32_t kW32A = 0x9E3779B9u;
  static constexpr std::uint32_t kW32B = 0xBB67AE85u;
  static constexpr std::uint32_t kM4x32A = 0xD2511F53u;
  static constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

  std::array<std::uint32_t, 4> run_block(std::uint64_t hi, std::uint64_t lo) const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
        static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = static_cast<std::uint64_t>(kM4x32A) * ctr[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kM4x32B) * ctr[2];
      std::array<std::uint32_t, 4> next = {
          static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
          static_cast<std::uint32_t>(p0)};
      ctr = next;
      k0 += kW32A;
      k1 += kW32B;
    }
    return ctr;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t hi_ = 0;
  std::uint64_t lo_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

}  // namespace sublin
