// Deterministic random number generation.
//
// Every random choice in the toolkit flows from one of these generators so
// that outputs are reproducible bit-for-bit across platforms, compilers and
// thread counts. The algorithms are fixed by contract:
//
//   - stream derivation: FNV-1a 64 over the utterance id, folded with the
//     job seed and variant number through splitmix64 finalizer steps
//   - generator: xoshiro256** (Blackman & Vigna), seeded from four
//     consecutive splitmix64 outputs as its authors recommend
//   - bounded draws: rejection sampling, so selection is exactly uniform
//
// None of this may be swapped for std::mt19937 / std::uniform_int_distribution:
// the standard leaves distribution output unspecified across implementations.

#pragma once

#include <cstdint>
#include <string_view>

namespace pinsynth {

/// splitmix64 step: advances `state` and returns the next output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15uLL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9uLL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBuLL;
  return z ^ (z >> 31);
}

/// One splitmix64 output for initial state `x` (a 64-bit mixer).
inline std::uint64_t splitmix64_mix(std::uint64_t x) { return splitmix64_next(x); }

/// FNV-1a 64-bit hash of a byte string.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325uLL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3uLL;
  }
  return h;
}

/// xoshiro256** pseudo-random generator.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t next() {
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

  /// Unbiased draw in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = next();
    } while (x < limit);
    return x % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/// Seed for the per-output stream of (job seed, utterance id, variant).
/// Fixed derivation; changing it changes every generated corpus.
inline std::uint64_t derive_stream_seed(std::uint64_t job_seed,
                                        std::string_view utt_id,
                                        std::uint64_t variant) {
  std::uint64_t s = splitmix64_mix(job_seed ^ fnv1a64(utt_id));
  return splitmix64_mix(s ^ variant);
}

}  // namespace pinsynth
