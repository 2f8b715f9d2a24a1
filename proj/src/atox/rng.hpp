#pragma once

#include <cstdint>
#include <string_view>

namespace atox::rng {

// 64-bit FNV-1a. Used to fold (seed, purpose-tag, record-key) into a stream
// seed so that results never depend on stage order, sharding, or thread
// count.
inline uint64_t fnv1a(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// splitmix64: tiny, portable, fully specified by integer ops.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via rejection, no modulo bias.
  uint64_t bounded(uint64_t n) {
    if (n == 0) return 0;
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }

  // Uniform in [0, 1) with 53 bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

inline uint64_t derive_seed(uint64_t seed, std::string_view tag, std::string_view key) {
  uint64_t h = mix64(seed);
  h = fnv1a(tag, h ^ 0x9e3779b97f4a7c15ull);
  h = fnv1a("\x1f", h);
  h = fnv1a(key, h);
  return mix64(h);
}

inline SplitMix64 derive(uint64_t seed, std::string_view tag, std::string_view key) {
  return SplitMix64(derive_seed(seed, tag, key));
}

}  // namespace atox::rng
