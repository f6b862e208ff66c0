#include <algorithm>
#include <set>

#include "doctest.h"
#include "qpar/cheatsheet.hpp"
#include "qpar/constructions.hpp"
#include "qpar/rng.hpp"
#include "test_helpers.hpp"

using namespace qpar;

TEST_CASE("certificate cells encode and decode bit-exactly") {
  CertificateFormat fmt = CertificateFormat::for_arity(8);
  CHECK(fmt.index_bits == 3);
  CHECK(fmt.count_bits == 16);

  std::vector<Certificate> certs(2);
  certs[0].entries = {{0, 1}, {5, 0}, {7, 1}};
  certs[1].entries = {{2, 0}};
  Bits cell = encode_certificates(certs, fmt, 64);
  auto back = decode_certificates(cell, fmt, 2, 8);
  REQUIRE(back.has_value());
  CHECK((*back)[0].entries == certs[0].entries);
  CHECK((*back)[1].entries == certs[1].entries);

  // nonzero padding
  Bits bad = cell;
  bad.set(63, 1);
  CHECK(!decode_certificates(bad, fmt, 2, 8).has_value());
  // entry count larger than the certified arity
  Bits overflow(64);
  overflow.set_slice(0, 16, 9);
  CHECK(!decode_certificates(overflow, fmt, 2, 8).has_value());
  // count that runs past the cell
  Bits trunc(20);
  trunc.set_slice(0, 16, 2);
  CHECK(!decode_certificates(trunc, fmt, 1, 8).has_value());
  // duplicate index
  std::vector<Certificate> dup(1);
  dup[0].entries = {{3, 1}, {3, 1}};
  Bits dcell = encode_certificates(dup, fmt, 32);
  CHECK(!decode_certificates(dcell, fmt, 1, 8).has_value());

  CHECK_THROWS_AS(encode_certificates(certs, fmt, 16), TooLarge);
  std::vector<Certificate> oor(1);
  oor[0].entries = {{8, 1}};
  CHECK_THROWS_AS(encode_certificates(oor, fmt, 64), IndexOutOfRange);
}

TEST_CASE("forcing requires every completion in-domain with the claimed value") {
  auto and2 = make_and(2);
  CHECK(certificate_forces(and2, Certificate{{{0, 1}, {1, 1}}}, 1));
  CHECK(certificate_forces(and2, Certificate{{{0, 0}}}, 0));
  CHECK(!certificate_forces(and2, Certificate{{{0, 1}}}, 1));
  CHECK(!certificate_forces(and2, Certificate{{}}, 0));

  // a single asserted 1 pins the promise value but not total-domain membership
  auto dj = make_dj(2);
  CHECK(!certificate_forces(dj, Certificate{{{0, 1}}}, 1));
  CHECK(certificate_forces(dj, Certificate{{{0, 1}, {1, 0}}}, 1));
  CHECK(certificate_forces(dj, Certificate{{{0, 0}, {1, 0}}}, 0));
}

namespace {

// toy lift: DJ_2 over 2x2 AND-of-ORs, one copy
struct Toy {
  BooleanFunction fcs = make_ccs_dj(2, 2, 2, 1);
  CheatSheetLayout layout = canonical_cheatsheet_layout(2, 2, 2, 1);
  BooleanFunction fprime = compose(make_dj(2), {make_and_or(2, 2), make_and_or(2, 2)});
};

}  // namespace

TEST_CASE("cheat sheet lift evaluates its defining conditions on the toy instance") {
  Toy t;
  REQUIRE(t.layout.inner_arity == 8);
  REQUIRE(t.layout.cell_size == 48);
  REQUIRE(t.fcs.arity() == 8 + 2 * 48);
  REQUIRE(t.fcs.total());

  // address copy: first AND-OR input all zero, second with one 1 per block
  Bits copy(8);
  copy.set(4, 1);
  copy.set(6, 1);
  REQUIRE(t.fprime.in_domain(copy));
  REQUIRE(t.fprime.evaluate(copy) == 1);

  Bits yes = build_cheatsheet_input(t.fprime, t.layout, {copy});
  CHECK(t.fcs.evaluate(yes) == 1);

  SUBCASE("every single-bit corruption of the indexed cell kills the output") {
    int cell_at = t.layout.cell_offset(1);
    for (int b = 0; b < t.layout.cell_size; ++b) {
      Bits z = yes;
      z.flip(cell_at + b);
      CHECK(t.fcs.evaluate(z) == 0);
    }
  }
  SUBCASE("the un-indexed cell is never read") {
    int cell_at = t.layout.cell_offset(0);
    Rng rng = rng_stream(71, 0);
    for (int trial = 0; trial < 50; ++trial) {
      Bits z = yes;
      for (int b = 0; b < t.layout.cell_size; ++b)
        if (rng_bool(rng)) z.flip(cell_at + b);
      CHECK(t.fcs.evaluate(z) == 1);
    }
  }
  SUBCASE("flipping any certified address bit kills the output") {
    for (int b = 0; b < t.layout.inner_arity; ++b) {
      Bits z = yes;
      z.flip(t.layout.copy_offset(0) + b);
      CHECK(t.fcs.evaluate(z) == 0);
    }
  }
  SUBCASE("an all-zero indexed cell forces 0") {
    Bits z = build_cheatsheet_input(t.fprime, t.layout, {copy}, false);
    CHECK(t.fcs.evaluate(z) == 0);
  }
  SUBCASE("out-of-domain addresses force 0 whatever the cells hold") {
    Bits z = yes;
    for (int b = 0; b < 8; ++b) z.set(b, 1);  // both AND-OR values 1: outside DJ's domain
    CHECK(t.fcs.evaluate(z) == 0);
    Bits bad(8);
    for (int b = 0; b < 8; ++b) bad.set(b, 1);
    CHECK_THROWS_AS(build_cheatsheet_input(t.fprime, t.layout, {bad}), ConstructionFailed);
  }
}

TEST_CASE("two-copy lift indexes cells by the copy outputs") {
  auto dj = make_dj(2);
  std::vector<BooleanFunction> hs = {make_and_or(2, 2), make_and_or(2, 2)};
  auto fprime = compose(dj, hs);
  int cell = default_cell_size(8, 2);
  CheatSheetLayout layout{8, 2, cell};
  auto fcs = make_cheatsheet(fprime, 2, cell);
  REQUIRE(fcs.arity() == layout.arity());

  Bits zero_copy(8);  // both AND-OR blocks zero: DJ value 0
  Bits one_copy(8);
  one_copy.set(4, 1);
  one_copy.set(6, 1);
  Bits z = build_cheatsheet_input(fprime, layout, {one_copy, zero_copy});
  CHECK(fcs.evaluate(z) == 1);
  // the populated cell is the one indexed by (1, 0)
  CHECK(layout.cell_bits(z, 1).popcount() > 0);
  CHECK(layout.cell_bits(z, 0).popcount() == 0);
  CHECK(layout.cell_bits(z, 2).popcount() == 0);
  CHECK(layout.cell_bits(z, 3).popcount() == 0);
}

TEST_CASE("block-sensitivity witness flips on every listed block") {
  // outer DJ_2 at z = (1,0): one flip leaves the domain, the other flips the value
  Bits z(2);
  z.set(0, 1);
  BsWitness w = build_block_sensitivity_witness(make_dj(2), make_and_or(2, 2), 1, {z});
  REQUIRE(w.fcs.evaluate(w.input) == 1);
  CHECK((int)w.blocks.size() >= 4);  // bs_0 and bs_1 of the inner layer are both 2

  std::set<int> cases(w.cases.begin(), w.cases.end());
  CHECK(cases == std::set<int>{0, 1});

  for (std::size_t i = 0; i < w.blocks.size(); ++i) {
    Bits flipped = w.input;
    flipped.xor_mask(w.blocks[i]);
    CHECK(w.fcs.evaluate(flipped) == 0);
    for (std::size_t j = i + 1; j < w.blocks.size(); ++j) {
      bool overlap = false;
      for (std::size_t k = 0; k < w.blocks[i].w.size(); ++k)
        overlap = overlap || (w.blocks[i].w[k] & w.blocks[j].w[k]);
      CHECK(!overlap);
    }
  }
}

TEST_CASE("witness over the correlation-promise outer exercises the matching-output case") {
  // all-plus tables: one sign flip can keep both membership and value intact
  BsWitness w = build_block_sensitivity_witness(make_forrelation(1), make_and_or(2, 2), 1);
  REQUIRE(w.fcs.evaluate(w.input) == 1);
  CHECK((int)w.blocks.size() >= 8);

  std::set<int> cases(w.cases.begin(), w.cases.end());
  CHECK(cases.count(2) == 1);

  for (const auto& blk : w.blocks) {
    Bits flipped = w.input;
    flipped.xor_mask(blk);
    CHECK(w.fcs.evaluate(flipped) == 0);
  }
}

TEST_CASE("lift generators round-trip through descriptors") {
  register_cheatsheet_generators();
  auto f = make_ccs_dj(2, 2, 2, 1);
  std::string d = f.descriptor();
  auto g = BooleanFunction::parse_descriptor(d);
  CHECK(g.descriptor() == d);
  REQUIRE(g.arity() == f.arity());

  Toy t;
  Bits copy(8);
  copy.set(4, 1);
  copy.set(6, 1);
  Bits yes = build_cheatsheet_input(t.fprime, t.layout, {copy});
  CHECK(g.evaluate(yes) == 1);
  Rng rng = rng_stream(83, 0);
  for (int trial = 0; trial < 30; ++trial) {
    Bits x(f.arity());
    for (int i = 0; i < f.arity(); ++i) x.set(i, rng_bool(rng));
    CHECK(f.evaluate(x) == g.evaluate(x));
  }
}
