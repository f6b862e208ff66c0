#pragma once

#include <cstdint>
#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/rng.hpp"

namespace qpar_test {

using namespace qpar;

inline BooleanFunction make_dj4() {
  // arity 4, domain = all-zeros plus weight-2 strings
  return BooleanFunction::from_predicate(
      4, [](std::uint64_t i) { return i != 0; },
      [](std::uint64_t i) {
        int w = __builtin_popcountll(i);
        return w == 0 || w == 2;
      });
}

inline BooleanFunction make_ao22() {
  // (x0 | x1) & (x2 | x3)
  return BooleanFunction::from_predicate(
      4, [](std::uint64_t i) { return (i & 3) != 0 && (i & 12) != 0; }, nullptr);
}

inline BooleanFunction random_total(int n, std::uint64_t seed) {
  Rng rng = rng_stream(seed, 0xf00d);
  std::vector<int> out(std::uint64_t(1) << n);
  for (auto& b : out) b = int(rng() & 1);
  return BooleanFunction::total_from_bits(n, out);
}

inline BooleanFunction random_partial(int n, std::uint64_t seed, double keep = 0.7) {
  Rng rng = rng_stream(seed, 0xbeef);
  std::uint64_t size = std::uint64_t(1) << n;
  std::vector<Word> out((size + 63) / 64, 0), dom((size + 63) / 64, 0);
  for (std::uint64_t i = 0; i < size; ++i) {
    if (rng_double(rng) < keep) {
      dom[i >> 6] |= Word(1) << (i & 63);
      if (rng() & 1) out[i >> 6] |= Word(1) << (i & 63);
    }
  }
  return BooleanFunction::from_table(n, std::move(out), std::move(dom));
}

}  // namespace qpar_test
