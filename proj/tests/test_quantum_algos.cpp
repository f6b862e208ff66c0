#include <cmath>
#include <vector>

#include "doctest.h"
#include "qpar/cheatsheet.hpp"
#include "qpar/classical.hpp"
#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"
#include "qpar/quantum.hpp"
#include "qpar/rng.hpp"
#include "qpar/two_adaptive.hpp"

using namespace qpar;

namespace {

// in-domain inputs of a small partial function, indexed by value
std::array<std::vector<Bits>, 2> fibers(const BooleanFunction& f) {
  std::array<std::vector<Bits>, 2> out;
  for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << f.arity()); ++idx)
    if (f.in_domain_index(idx))
      out[f.evaluate_index(idx)].push_back(Bits::from_index(f.arity(), idx));
  return out;
}

}  // namespace

TEST_CASE("one-round correlation estimation never touches the pointer half") {
  const AnaQuantumParams ap;
  const auto prog = ana_quantum_program(ap);
  CHECK(prog.oracle_rounds() == 1);
  CHECK(prog.qubits == 90);
  CHECK(prog.oracle_parallelism() == ap.copies * ap.repetitions);

  // every oracle register reads table bits only (the first 8 input bits are
  // the pointer component)
  const int table_base = 8;
  for (const auto& step : prog.steps) {
    if (!step.oracle) continue;
    for (const auto& reg : step.oracle->regs) CHECK(reg.base >= table_base);
  }

  const auto inner = make_forrelation(ap.inner_n);
  const auto fib = fibers(inner);
  REQUIRE(fib[0].size() == 48);
  REQUIRE(fib[1].size() == 8);

  const auto f = make_ana_for(ap.blocks, ap.hops, ap.copies, ap.inner_n);
  Rng rng = rng_stream(23, 0xa7a);
  double worst_yes = 1.0, worst_no = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int b0 = rng_bool(rng) ? 1 : 0;
    const int b1 = rng_bool(rng) ? 1 : 0;
    const int value = b0 ^ b1;
    Bits z(f.arity());
    z.set_slice(0, 2, value);  // pointer chain resolves to `value`
    const Bits& c0 = fib[b0][rng_below(rng, fib[b0].size())];
    const Bits& c1 = fib[b1][rng_below(rng, fib[b1].size())];
    for (int k = 0; k < 8; ++k) {
      z.set(8 + k, c0.get(k));
      z.set(16 + k, c1.get(k));
    }
    REQUIRE(f.evaluate(z) == value);
    const auto out = run_program(prog, z);
    REQUIRE(out.has_answer);
    if (value == 1)
      worst_yes = std::min(worst_yes, out.answer[1]);
    else
      worst_no = std::max(worst_no, out.answer[1]);
  }
  CHECK(worst_yes >= 2.0 / 3.0);
  CHECK(worst_no <= 1.0 / 3.0);

  AnaQuantumParams tight = ap;
  tight.parallelism = ap.copies * ap.repetitions - 1;
  CHECK_THROWS_AS(ana_quantum_program(tight), ParallelismTooSmall);
}

TEST_CASE("three-round cheat-sheet evaluation is exact on the toy family") {
  const auto fp = compose(make_dj(2), {make_and_or(1, 1), make_and_or(1, 1)});
  std::vector<Bits> dom;
  for (int idx = 0; idx < 4; ++idx)
    if (fp.in_domain_index(idx)) dom.push_back(Bits::from_index(2, idx));
  REQUIRE(dom.size() == 3);

  for (int c = 1; c <= 2; ++c) {
    CAPTURE(c);
    const auto lay = cheatsheet_quantum_layout(c);
    const auto fcs = cheatsheet_quantum_function(c);
    REQUIRE(fcs.arity() == lay.arity());

    int tuples = 1;
    for (int i = 0; i < c; ++i) tuples *= int(dom.size());
    for (int mask = 0; mask < tuples; ++mask) {
      int m = mask;
      std::vector<Bits> copies;
      for (int i = 0; i < c; ++i) {
        copies.push_back(dom[m % dom.size()]);
        m /= int(dom.size());
      }
      for (int valid = 0; valid <= 1; ++valid) {
        const Bits z = build_cheatsheet_input(fp, lay, copies, valid == 1);
        const int want = fcs.evaluate(z);
        if (valid == 0) REQUIRE(want == 0);  // zeroed cell certifies nothing
        for (unsigned seed = 0; seed < 10; ++seed) {
          const auto out = cheatsheet_quantum_3round({c, 0, 0}, z, seed);
          CHECK(out.answer == want);
          CHECK(out.rounds == 3);
          REQUIRE(out.round_widths.size() == 3);
        }
      }
    }
  }
}

TEST_CASE("corrupting any stored certificate bit never yields a wrong accept") {
  const auto fp = compose(make_dj(2), {make_and_or(1, 1), make_and_or(1, 1)});
  const int c = 1;
  const auto lay = cheatsheet_quantum_layout(c);
  const auto fcs = cheatsheet_quantum_function(c);

  std::vector<Bits> dom;
  for (int idx = 0; idx < 4; ++idx)
    if (fp.in_domain_index(idx)) dom.push_back(Bits::from_index(2, idx));

  int rejected = 0;
  for (const Bits& copy : dom) {
    const Bits z0 = build_cheatsheet_input(fp, lay, {copy}, true);
    const int cell_base = lay.cell_offset(fp.evaluate(copy));
    for (int b = 0; b < lay.cell_size; ++b) {
      Bits z = z0;
      z.set(cell_base + b, 1 - z.get(cell_base + b));
      const int want = fcs.evaluate(z);
      for (unsigned seed = 0; seed < 5; ++seed) {
        const auto out = cheatsheet_quantum_3round({c, 0, 0}, z, seed);
        CHECK(out.answer == want);
      }
      rejected += want == 0 ? 1 : 0;
    }
  }
  CHECK(rejected > 0);  // the sweep really exercised broken certificates

  const Bits z = build_cheatsheet_input(fp, lay, {dom[0]}, true);
  CHECK_THROWS_AS(cheatsheet_quantum_3round({c, 0, 0}, Bits(lay.arity() - 1), 0), ArityMismatch);
  // repetitions below the certificate width cannot fit in one batch
  CHECK_THROWS_AS(cheatsheet_quantum_3round({c, 1, 1}, z, 0), ParallelismTooSmall);
}

TEST_CASE("sign-balanced table toy is total with even split") {
  const auto f = two_adaptive_quantum_inner();
  CHECK(f.total());
  CHECK(f.arity() == 4);
  int ones = 0;
  for (int idx = 0; idx < 16; ++idx) {
    const Bits t = Bits::from_index(4, idx);
    const double phi = forrelation_value(t, 1);
    CHECK(std::abs(phi) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(f.evaluate(t) == (phi > 0 ? 1 : 0));
    ones += f.evaluate(t);
  }
  CHECK(ones == 8);
}

TEST_CASE("two-round hybrid beats the success threshold on the hard family") {
  const auto f = two_adaptive_quantum_inner();
  const int s = 2;
  const TwoAdaptiveLayout lay{4, s};
  const auto h = make_two_adaptive(f, s);
  REQUIRE(h.arity() == lay.arity());

  Rng rng = rng_stream(31, 0x2ad0);
  const int kTrials = 2000;
  int ok = 0;
  for (int t = 0; t < kTrials; ++t) {
    const Bits z = sample_two_adaptive_hard(f, lay, rng);
    const int want = h.evaluate(z);
    const auto out = two_adaptive_quantum({s, 0, 48}, z, unsigned(t));
    CHECK(out.rounds == 2);
    REQUIRE(out.round_widths.size() == 2);
    CHECK(out.round_widths[0] == 352);
    CHECK(out.round_widths[1] == 121);
    ok += out.answer == want ? 1 : 0;
  }
  CHECK(double(ok) / kTrials >= 0.6);
}

TEST_CASE("promise violations are answered zero") {
  const auto f = two_adaptive_quantum_inner();
  const int s = 2;
  const TwoAdaptiveLayout lay{4, s};
  Rng rng = rng_stream(37, 0x2ad1);

  for (int t = 0; t < 50; ++t) {
    Bits z = sample_two_adaptive_hard(f, lay, rng);

    // flip a forced address bit away from the intersection point
    const auto bc = decode_bicertificate(z.slice_bits(lay.bc_offset(0, 0), lay.bc_cell()), lay);
    REQUIRE(bc.has_value());
    const int w = bc->intersection() == 0 ? 1 : 0;
    Bits bad = z;
    bad.set(lay.add_offset(0, 0) + w, 1 - bad.get(lay.add_offset(0, 0) + w));
    auto out = two_adaptive_quantum({s, 0, 48}, bad, unsigned(t));
    CHECK(out.answer == 0);
    CHECK(out.rounds == 2);

    // wreck a bicertificate cell so it no longer decodes
    Bits garbled = z;
    garbled.set_slice(lay.bc_offset(0, 1), lay.bc_cell(), ~std::uint64_t(0));
    out = two_adaptive_quantum({s, 0, 48}, garbled, unsigned(t));
    CHECK(out.answer == 0);
    CHECK(out.round_widths[1] == 0);  // rejected before any second-round query
  }

  const Bits z = sample_two_adaptive_hard(f, lay, rng);
  CHECK_THROWS_AS(two_adaptive_quantum({s, 351, 48}, z, 0), ParallelismTooSmall);
  CHECK_THROWS_AS(two_adaptive_quantum({s, 0, 48}, Bits(lay.arity() + 1), 0), ArityMismatch);
}

TEST_CASE("parity embeds into pointer chasing") {
  // frozen examples: X = 00 and 11 are even, 10 is odd
  for (const auto& [a, b, want] : {std::tuple{0, 0, 0}, {1, 1, 0}, {1, 0, 1}}) {
    Bits X(2);
    X.set(0, a);
    X.set(1, b);
    const auto inst = parity_reduction_instance(X);
    const auto f = make_pointer(inst.blocks, inst.hops);
    CHECK(f.evaluate(inst.input) == want);
  }

  for (int len = 1; len <= 4; ++len)
    for (std::uint64_t idx = 0; idx < (std::uint64_t(1) << len); ++idx) {
      const Bits X = Bits::from_index(len, idx);
      const auto inst = parity_reduction_instance(X);
      CHECK(inst.hops == len);
      CHECK(inst.blocks == (1 << ceil_log2(std::uint64_t(2 * len + 2))));
      const auto f = make_pointer(inst.blocks, inst.hops);
      CAPTURE(len);
      CAPTURE(idx);
      CHECK(f.evaluate(inst.input) == (__builtin_popcountll(idx) & 1));
    }

  Rng rng = rng_stream(43, 0x9a11);
  for (int len = 5; len <= 6; ++len)
    for (int t = 0; t < 8; ++t) {
      Bits X(len);
      int parity = 0;
      for (int k = 0; k < len; ++k) {
        X.set(k, rng_bool(rng));
        parity ^= X.get(k);
      }
      const auto inst = parity_reduction_instance(X);
      const auto f = make_pointer(inst.blocks, inst.hops);
      CHECK(f.evaluate(inst.input) == parity);
    }

  CHECK_THROWS_AS(parity_reduction_instance(Bits(0)), ArityMismatch);
}
