#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "qpar/constructions.hpp"
#include "qpar/measures.hpp"
#include "qpar/rng.hpp"
#include "test_helpers.hpp"

using namespace qpar;

namespace {

// Straight-from-definition evaluators, kept independent of the builders.

int oracle_and_or(const Bits& x, int blocks, int bs) {
  bool all = true;
  for (int b = 0; b < blocks; ++b) {
    bool any = false;
    for (int i = 0; i < bs; ++i) any = any || x.get(b * bs + i);
    all = all && any;
  }
  return all ? 1 : 0;
}

std::int64_t oracle_block_value(const Bits& x, int b, int bb) {
  std::int64_t v = 0;
  for (int i = 0; i < bb; ++i)
    if (x.get(b * bb + i)) v += std::int64_t(1) << i;
  return v;
}

// k distinct block indices whose values sum to 0 mod m, by explicit subset scan.
int oracle_ksum(const Bits& x, int blocks, int k, int bb, std::int64_t m) {
  bool hit = false;
  for_each_subset_of_size(blocks, k, [&](std::uint64_t sel) {
    std::int64_t s = 0;
    for (int b = 0; b < blocks; ++b)
      if (sel >> b & 1) s += oracle_block_value(x, b, bb) % m;
    if (s % m == 0) hit = true;
  });
  return hit ? 1 : 0;
}

int oracle_block_ksum(const Bits& x, int blocks, int k, int bb, std::int64_t m) {
  std::vector<std::int64_t> bal;
  for (int b = 0; b < blocks; ++b) {
    int ones = 0;
    for (int i = 0; i < bb; ++i) ones += x.get(b * bb + i);
    if (2 * ones < bb) return 0;
    if (2 * ones == bb) bal.push_back(oracle_block_value(x, b, bb) % m);
  }
  bool hit = false;
  if ((int)bal.size() >= k)
    for_each_subset_of_size((int)bal.size(), k, [&](std::uint64_t sel) {
      std::int64_t s = 0;
      for (int b = 0; b < (int)bal.size(); ++b)
        if (sel >> b & 1) s += bal[b];
      if (s % m == 0) hit = true;
    });
  return hit ? 1 : 0;
}

// Phi as the explicit double sum over table entries, no transform.
double oracle_forrelation(const Bits& input, int n) {
  int m = 1 << n;
  double s = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      int sign = __builtin_popcount(unsigned(i & j)) & 1;
      double xi = input.get(i) ? -1.0 : 1.0;
      double yj = input.get(m + j) ? -1.0 : 1.0;
      s += (sign ? -1.0 : 1.0) * xi * yj;
    }
  return s / std::pow(2.0, 1.5 * n);
}

int oracle_pointer(const Bits& x, int hops, int w) {
  std::uint64_t v = 0;
  for (int h = 0; h < hops; ++h) {
    std::uint64_t next = 0;
    for (int b = 0; b < w; ++b)
      if (x.get(int(v) * w + b)) next |= std::uint64_t(1) << b;
    v = next;
  }
  return int(v & 1);
}

void ensure_generators() { register_construction_generators(); }

}  // namespace

TEST_CASE("and-of-ors agrees with its definition and known measures") {
  auto f = make_and_or(2, 2);
  REQUIRE(f.arity() == 4);
  REQUIRE(f.is_table());
  int ones = 0;
  for (std::uint64_t i = 0; i < 16; ++i) {
    CHECK(f.evaluate_index(i) == oracle_and_or(Bits::from_index(4, i), 2, 2));
    ones += f.evaluate_index(i);
  }
  CHECK(ones == 9);
  REQUIRE(f.block_meta().has_value());
  CHECK(f.block_meta()->block_bits == 2);
  CHECK(f.block_meta()->block_count == 2);

  auto cs = CertificateStats{certificate_complexity(f, 0), certificate_complexity(f, 1)};
  CHECK(cs.c0 == 2);
  CHECK(cs.c1 == 2);

  auto g33 = make_and_or(3, 3);
  for (std::uint64_t i = 0; i < 512; i += 7)
    CHECK(g33.evaluate_index(i) == oracle_and_or(Bits::from_index(9, i), 3, 3));

  auto big = make_and_or(5, 5);
  REQUIRE(!big.is_table());
  Rng rng = rng_stream(11, 0);
  for (int t = 0; t < 200; ++t) {
    Bits x(25);
    for (int i = 0; i < 25; ++i) x.set(i, rng_bool(rng));
    CHECK(big.evaluate(x) == oracle_and_or(x, 5, 5));
  }
  CHECK_THROWS_AS(make_and_or(0, 3), ArityMismatch);
}

TEST_CASE("ksum matches explicit subset enumeration") {
  auto f = make_ksum(3, 2, 2, 4);
  REQUIRE(f.arity() == 6);
  REQUIRE(!f.is_table());
  REQUIRE(f.total());
  for (std::uint64_t i = 0; i < 64; ++i) {
    Bits x = Bits::from_index(6, i);
    CHECK(f.evaluate(x) == oracle_ksum(x, 3, 2, 2, 4));
  }
  // hand-set block patterns: values (1,3,2) pair 1+3, (0,0,3) pair 0+0, (1,1,1) none
  CHECK(f.evaluate_index(45) == 1);
  CHECK(f.evaluate_index(48) == 1);
  CHECK(f.evaluate_index(21) == 0);

  auto g = make_ksum(4, 3, 3, 5);
  for (std::uint64_t i = 0; i < (1u << 12); i += 5) {
    Bits x = Bits::from_index(12, i);
    CHECK(g.evaluate(x) == oracle_ksum(x, 4, 3, 3, 5));
  }
  REQUIRE(g.block_meta().has_value());
  CHECK(g.block_meta()->block_bits == 3);
  CHECK(g.block_meta()->block_count == 4);
  CHECK_THROWS_AS(make_ksum(3, 4, 2, 4), ArityMismatch);
  CHECK_THROWS_AS(make_ksum(3, 2, 2, 1), ArityMismatch);
}

TEST_CASE("block-ksum: zero-majority forces 0, one-majority blocks sit out") {
  auto f = make_block_ksum(3, 2, 2, 2);
  REQUIRE(f.arity() == 6);
  for (std::uint64_t i = 0; i < 64; ++i) {
    Bits x = Bits::from_index(6, i);
    CHECK(f.evaluate(x) == oracle_block_ksum(x, 3, 2, 2, 2));
  }
  CHECK(f.evaluate_index(9) == 0);   // block of weight 0
  CHECK(f.evaluate_index(57) == 0);  // balanced residues {1,0}: 1+0 odd
  CHECK(f.evaluate_index(58) == 1);  // balanced residues {0,0}
  CHECK(f.evaluate_index(37) == 1);  // balanced residues {1,1}

  auto g = make_block_ksum(3, 2, 4, 3);
  for (std::uint64_t i = 0; i < (1u << 12); i += 3) {
    Bits x = Bits::from_index(12, i);
    CHECK(g.evaluate(x) == oracle_block_ksum(x, 3, 2, 4, 3));
  }
  CHECK_THROWS_AS(make_block_ksum(3, 2, 3, 2), ArityMismatch);  // odd block bits
}

TEST_CASE("bkk composes block-ksum over ksum cells") {
  auto f = make_bkk(2, 1, 2, 2, 2, 1, 1, 2);
  REQUIRE(f.arity() == 8);
  REQUIRE(f.block_meta().has_value());
  CHECK(f.block_meta()->block_bits == 2);
  CHECK(f.block_meta()->block_count == 4);
  for (std::uint64_t i = 0; i < 256; ++i) {
    Bits z = Bits::from_index(8, i);
    // inner: bit b of the outer input is 1 iff cell b holds a 0 bit
    Bits outer(4);
    for (int b = 0; b < 4; ++b) outer.set(b, !(z.get(2 * b) && z.get(2 * b + 1)));
    CHECK(f.evaluate(z) == oracle_block_ksum(outer, 2, 1, 2, 2));
  }
}

TEST_CASE("dj promise function") {
  for (int n : {2, 4, 6}) {
    auto f = make_dj(n);
    REQUIRE(f.arity() == n);
    std::uint64_t dom = 0, ones = 0;
    for (std::uint64_t i = 0; i < (1ull << n); ++i) {
      int w = __builtin_popcountll(i);
      bool in = (w == 0 || 2 * w == n);
      CHECK(f.in_domain_index(i) == in);
      if (in) {
        ++dom;
        ones += f.evaluate_index(i);
        CHECK(f.evaluate_index(i) == (i != 0 ? 1 : 0));
      }
    }
    CHECK(dom == 1 + binomial(n, n / 2));
    CHECK(ones == binomial(n, n / 2));
  }
  CHECK_THROWS_AS(make_dj(3), ArityMismatch);
}

TEST_CASE("forrelation transform value matches the double-sum definition") {
  for (int n = 1; n <= 5; ++n) {
    int arity = 2 * (1 << n);
    Rng rng = rng_stream(23, n);
    for (int t = 0; t < 40; ++t) {
      Bits x(arity);
      for (int i = 0; i < arity; ++i) x.set(i, rng_bool(rng));
      double got = forrelation_value(x, n);
      double want = oracle_forrelation(x, n);
      CHECK(std::abs(got - want) <= 1e-12);
      CHECK(std::abs(got) <= 1.0 + 1e-12);
    }
  }
  // split-table entry point
  Bits xt(4), yt(4);
  xt.set(3, 1);
  yt.set(2, 1);
  Bits joined(8);
  joined.set(3, 1);
  joined.set(6, 1);
  CHECK(forrelation_value_tables(xt, yt) == forrelation_value(joined, 2));
}

TEST_CASE("forrelation promise classification is exact") {
  auto f1 = make_forrelation(1);
  REQUIRE(f1.arity() == 4);
  REQUIRE(f1.is_table());
  // identity tables: Phi = 1/sqrt(2), a 1-instance
  CHECK(f1.in_domain_index(0));
  CHECK(f1.evaluate_index(0) == 1);
  CHECK(forrelation_value(Bits::zeros(4), 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  std::uint64_t dom = 0, zeros = 0;
  for (std::uint64_t i = 0; i < 16; ++i) {
    double phi = forrelation_value(Bits::from_index(4, i), 1);
    CHECK(std::abs(std::abs(phi) - 1.0 / std::sqrt(2.0)) <= 1e-12);
    bool in = phi >= 0.6;
    CHECK(f1.in_domain_index(i) == in);
    if (in) {
      ++dom;
      zeros += f1.evaluate_index(i) == 0;
    }
  }
  CHECK(dom == 8);
  CHECK(zeros == 0);  // the smallest size admits no 0-instances

  auto f2 = make_forrelation(2);
  REQUIRE(f2.arity() == 8);
  std::uint64_t zero_count = 0, one_count = 0;
  for (std::uint64_t i = 0; i < 256; ++i) {
    double phi = forrelation_value(Bits::from_index(8, i), 2);
    bool is1 = phi >= 0.6 - 1e-12;
    bool is0 = std::abs(phi) <= 0.01 + 1e-12;
    CHECK(f2.in_domain_index(i) == (is1 || is0));
    if (f2.in_domain_index(i)) {
      CHECK(f2.evaluate_index(i) == (is1 ? 1 : 0));
      ++(is1 ? one_count : zero_count);
    }
  }
  CHECK(zero_count > 0);
  CHECK(one_count > 0);
  CHECK(f2.in_domain_index(72));
  CHECK(f2.evaluate_index(72) == 0);
}

TEST_CASE("pointer chase evaluation and exact subcube oracle") {
  auto f = make_pointer(4, 2);
  REQUIRE(f.arity() == 8);
  for (std::uint64_t i = 0; i < 256; ++i)
    CHECK(f.evaluate_index(i) == oracle_pointer(Bits::from_index(8, i), 2, 2));
  CHECK(f.evaluate_index(50) == 1);  // cell0=2, cell2=3: 0 -> 2 -> 3, low bit 1

  auto g = make_pointer(8, 3);
  Rng rng = rng_stream(31, 0);
  for (int t = 0; t < 300; ++t) {
    Bits x(24);
    for (int i = 0; i < 24; ++i) x.set(i, rng_bool(rng));
    CHECK(g.evaluate(x) == oracle_pointer(x, 3, 3));
  }

  // subcube oracle vs brute-force enumeration over completions
  Rng prng = rng_stream(31, 1);
  for (int t = 0; t < 200; ++t) {
    PartialInput pa{Bits(8), Bits(8)};
    for (int i = 0; i < 8; ++i) {
      if (rng_below(prng, 3) == 0) continue;  // leave free
      pa.mask.set(i, 1);
      pa.value.set(i, rng_bool(prng));
    }
    CubeValues got = f.cube_values(pa);
    CubeValues want;
    for (std::uint64_t i = 0; i < 256; ++i) {
      Bits x = Bits::from_index(8, i);
      bool match = true;
      for (int b = 0; b < 8 && match; ++b)
        if (pa.mask.get(b) && x.get(b) != pa.value.get(b)) match = false;
      if (!match) continue;
      (f.evaluate(x) ? want.sees1 : want.sees0) = true;
    }
    CHECK(got.sees0 == want.sees0);
    CHECK(got.sees1 == want.sees1);
  }

  // fixing cells 0 and 1 to label 1 pins the whole two-hop chain
  PartialInput pin{Bits(8), Bits(8)};
  pin.mask.set(0, 1);
  pin.mask.set(1, 1);
  pin.mask.set(2, 1);
  pin.mask.set(3, 1);
  pin.value.set(0, 1);
  pin.value.set(2, 1);
  CubeValues cv = f.cube_values(pin);
  CHECK(cv.determined());
  CHECK(cv.sees1);

  CHECK_THROWS_AS(make_pointer(6, 2), ArityMismatch);
}

TEST_CASE("correlated-pair domain glues equal outputs") {
  auto f = make_cor(make_and(2), make_or(2));
  REQUIRE(f.arity() == 4);
  REQUIRE(f.is_table());
  std::uint64_t dom = 0;
  for (std::uint64_t i = 0; i < 16; ++i) {
    std::uint64_t x = i & 3, y = i >> 2;
    int fx = (x == 3) ? 1 : 0;
    int gy = (y != 0) ? 1 : 0;
    CHECK(f.in_domain_index(i) == (fx == gy));
    if (fx == gy) {
      ++dom;
      CHECK(f.evaluate_index(i) == fx);
    }
  }
  CHECK(dom == 6);

  // partial inner sides restrict the glued domain too
  auto h = make_cor(make_dj(2), make_dj(2));
  for (std::uint64_t i = 0; i < 16; ++i) {
    std::uint64_t x = i & 3, y = i >> 2;
    auto w = [](std::uint64_t v) { return __builtin_popcountll(v); };
    bool in = (w(x) <= 1) && (w(y) <= 1) && ((x != 0) == (y != 0));
    CHECK(h.in_domain_index(i) == in);
  }
}

TEST_CASE("address-vs-aggregate pairs stay consistent with their parts") {
  auto f = make_ana_dj(4, 2, 2, 2);
  REQUIRE(f.arity() == 12);
  REQUIRE(f.is_table());
  auto ptr = make_pointer(4, 2);
  auto dj = make_dj(2);
  std::uint64_t dom = 0;
  for (std::uint64_t i = 0; i < (1ull << 12); ++i) {
    std::uint64_t p = i & 0xff, u0 = (i >> 8) & 3, u1 = (i >> 10) & 3;
    bool in_inner = dj.in_domain_index(u0) && dj.in_domain_index(u1);
    int pv = ptr.evaluate_index(p);
    bool in = in_inner && pv == (in_inner ? (dj.evaluate_index(u0) ^ dj.evaluate_index(u1)) : 0);
    CHECK(f.in_domain_index(i) == in);
    if (in) {
      ++dom;
      CHECK(f.evaluate_index(i) == pv);
    }
  }
  CHECK(dom > 0);

  auto g = make_ana_for(4, 1, 1, 2);
  REQUIRE(g.arity() == 16);
  auto ptr1 = make_pointer(4, 1);
  auto forr = make_forrelation(2);
  Rng rng = rng_stream(47, 0);
  int seen = 0;
  for (int t = 0; t < 20000; ++t) {
    std::uint64_t i = rng_below(rng, 1ull << 16);
    std::uint64_t p = i & 0xff, u = i >> 8;
    bool in = forr.in_domain_index(u) && ptr1.evaluate_index(p) == forr.evaluate_index(u);
    CHECK(g.in_domain_index(i) == in);
    if (in) {
      ++seen;
      CHECK(g.evaluate_index(i) == ptr1.evaluate_index(p));
    }
  }
  CHECK(seen > 0);
}

TEST_CASE("generator descriptors round-trip byte-exactly") {
  ensure_generators();
  std::vector<BooleanFunction> fns = {
      make_and_or(5, 5),
      make_ksum(3, 2, 2, 4),
      make_block_ksum(3, 2, 2, 2),
      make_bkk(2, 1, 2, 2, 2, 1, 1, 2),
      make_dj(26),
      make_forrelation(4),
      make_pointer(8, 3),
      make_ana_dj(8, 2, 2, 2),
      make_ana_for(4, 1, 2, 2),
  };
  for (const auto& f : fns) {
    std::string d = f.descriptor();
    BooleanFunction g = BooleanFunction::parse_descriptor(d);
    CHECK(g.descriptor() == d);
    CHECK(g.arity() == f.arity());
    Rng rng = rng_stream(59, std::hash<std::string>{}(d) & 0xffff);
    for (int t = 0; t < 100; ++t) {
      Bits x(f.arity());
      for (int i = 0; i < f.arity(); ++i) x.set(i, rng_bool(rng));
      REQUIRE(f.in_domain(x) == g.in_domain(x));
      if (f.in_domain(x)) CHECK(f.evaluate(x) == g.evaluate(x));
    }
  }
}

TEST_CASE("generator params are validated") {
  ensure_generators();
  CHECK_THROWS_AS(BooleanFunction::build_generator("ksum", {{"blocks", 3}}), ParseError);
  CHECK_THROWS_AS(
      BooleanFunction::build_generator("dj", {{"n", 4}, {"stray", 1}}), ParseError);
  CHECK_THROWS_AS(BooleanFunction::build_generator("no-such-gen", {}), ParseError);
}
