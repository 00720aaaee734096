#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tough {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stable per-(stage, item) seed. Does not depend on std::hash or on the
// order in which items are processed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage,
                                 std::string_view item = {}) {
  std::uint64_t h = fnv1a64(stage);
  h = fnv1a64(std::string_view("\x1f", 1), h);
  h = fnv1a64(item, h);
  return splitmix64(seed ^ splitmix64(h));
}

// Uniform integer in [0, n). std::uniform_int_distribution is
// implementation-defined, so draws are made by rejection on the raw
// 64-bit engine output to stay identical across standard libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x > limit);
  return x % n;
}

}  // namespace tough
