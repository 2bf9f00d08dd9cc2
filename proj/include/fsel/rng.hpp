#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fsel {

// Reproducibility contract
// ------------------------
// Every random choice in the library flows through the generator below, never
// through std:: distributions (whose outputs are implementation-defined).
// Streams are derived from user seeds with mix_seed:
//
//   * kmeans fit:        restart r runs on mix_seed(config.seed, r)
//   * compare trials:    trial t runs on mix_seed(base_seed, t)
//   * selection draws:   mix_seed(spec.seed, kSelectionStream)
//
// mix_seed(seed, i) is the i-th output of a SplitMix64 sequence started at
// `seed`, so equal seeds reproduce bit-identical results on any platform.

inline constexpr std::uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 output function (Steele, Lea & Vigna).
inline constexpr std::uint64_t split_mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix_seed(std::uint64_t seed,
                                        std::uint64_t stream) {
  return split_mix64(seed + kSplitMix64Gamma * (stream + 1));
}

// Stream tag for draws made by the selector itself (cluster choice, in-cluster
// sampling). Distinct from the small integers used for restart/trial streams.
inline constexpr std::uint64_t kSelectionStream = 0x53454C454354ull;  // "SELECT"

// xoshiro256** 1.0 (Blackman & Vigna), state seeded via SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (int i = 0; i < 4; ++i) state_[i] = mix_seed(seed, i);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t next_index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::next_index: bound is 0");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fsel
