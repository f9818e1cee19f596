#pragma once

#include <cstdint>
#include <random>

namespace estimlab {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Keyed hash of (master seed, stream index). Stream seeds never depend on
/// scheduling, so trial t sees identical randomness under any worker count.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Caller-owned random source. Integer helpers use rejection sampling on top
/// of the raw engine output so sequences are identical across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_trial(std::uint64_t master_seed, std::uint64_t trial) {
    return Rng(derive_seed(master_seed, trial));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    // Reject the low (2^64 mod bound) values so the modulus is unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// True with probability num/den.
  bool bernoulli(std::uint64_t num, std::uint64_t den) { return uniform_below(den) < num; }

  /// 53 random bits; the value k / 2^53 is uniform on a grid of [0, 1).
  std::uint64_t unit_bits() { return engine_() >> 11; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace estimlab
