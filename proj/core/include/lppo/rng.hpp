#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lppo {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent stream keyed by (seed, key, index, salt). Rollout workers use
/// (problem id, step) so results do not depend on evaluation order.
inline Rng substream(std::uint64_t seed, std::string_view key, std::uint64_t index,
                     std::uint64_t salt = 0) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ fnv1a(key));
  s = splitmix64(s ^ index);
  s = splitmix64(s ^ salt);
  return Rng(s);
}

/// Uniform double in [0, 1) with 53 random bits. Implemented directly so the
/// sequence is identical across standard library vendors.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace lppo
