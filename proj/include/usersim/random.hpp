#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace usersim {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  // 53 random mantissa bits; identical across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

// FNV-1a, 64 bit. Stable hash for seeds and the random scorer.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combine a base seed with labelled components into one stream seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = mix64(base);
  for (auto p : parts) {
    h = mix64(h ^ fnv1a(p));
    h = fnv1a("\x1f", h);
  }
  return h;
}

}  // namespace usersim
