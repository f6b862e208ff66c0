#pragma once

#include <cstdint>
#include <random>

namespace qpar {

using Rng = std::mt19937_64;

// std::uniform_int_distribution is implementation-defined; these helpers keep
// sampled sequences identical across standard libraries.
inline std::uint64_t rng_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n + 1) % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v > limit);
  return v % n;
}

inline double rng_double(Rng& rng) {  // uniform in [0,1), 53-bit resolution
  return double(rng() >> 11) * 0x1.0p-53;
}

inline bool rng_bool(Rng& rng) { return (rng() >> 63) != 0; }

// Derives an independent stream; distinct tags give distinct streams.
inline Rng rng_stream(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (2 * tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return Rng(z ^ (z >> 31));
}

}  // namespace qpar
