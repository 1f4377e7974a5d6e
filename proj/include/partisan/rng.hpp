#pragma once

// Portable random streams.
//
// Every random draw in the library comes from `Rng`, which is xoshiro256**
// (Blackman & Vigna) with its 256-bit state filled by four successive
// SplitMix64 outputs of the 64-bit seed. Bounded integers use rejection
// sampling on the top bits and doubles take the top 53 bits, so the whole
// sequence is reproducible bit-for-bit in any language.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace partisan {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stage tags for seed derivation. Values are part of the reproducibility
/// contract; never renumber.
enum class SeedStage : std::uint64_t {
  kEmbedInit = 1,
  kKmeans = 2,
  kShuffle = 3,
  kSynthetic = 4,
};

/// Stable derivation of a child seed from a root seed and a path of
/// integers: fold each component through SplitMix64.
inline std::uint64_t derive_seed(std::uint64_t root, SeedStage stage,
                                 std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t state = root;
  std::uint64_t h = splitmix64(state);
  auto mix = [&h](std::uint64_t v) {
    std::uint64_t s = h ^ v;
    h = splitmix64(s);
  };
  mix(static_cast<std::uint64_t>(stage));
  for (auto v : path) mix(v);
  return h;
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
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

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Reject the short tail so every residue is equally likely.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x > limit);
    return x % bound;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace partisan
