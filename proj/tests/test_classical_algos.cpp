#include <doctest.h>

#include <algorithm>
#include <set>

#include "qpar/cheatsheet.hpp"
#include "qpar/classical.hpp"
#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"
#include "qpar/rng.hpp"
#include "qpar/two_adaptive.hpp"
#include "test_helpers.hpp"

using namespace qpar;

namespace {

int worst_rounds(const QueryStrategy& s, const BooleanFunction& f,
                 const std::vector<Bits>& inputs) {
  int worst = 0;
  for (const Bits& x : inputs) {
    Transcript t = run_strategy(s, x, f);
    REQUIRE(t.answered);
    CHECK(t.correct());
    worst = std::max(worst, t.round_count());
  }
  return worst;
}

std::vector<Bits> domain_inputs(const BooleanFunction& f) {
  std::vector<Bits> v;
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << f.arity()); ++i) {
    Bits x = Bits::from_index(f.arity(), i);
    if (f.in_domain(x)) v.push_back(x);
  }
  return v;
}

std::vector<Bits> random_inputs(int arity, int count, std::uint64_t seed) {
  Rng rng = rng_stream(seed, 0x1a5f);
  std::vector<Bits> v;
  for (int i = 0; i < count; ++i) {
    Bits x(arity);
    for (int b = 0; b < arity; ++b) x.set(b, int(rng() & 1));
    v.push_back(x);
  }
  return v;
}

// drives an answerer by hand and remembers everything it said
struct AdvLog {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> rounds;
  std::vector<int> ask(AdaptiveAnswerer& adv, std::vector<int> idx) {
    auto ans = adv.answer(idx);
    rounds.push_back({idx, ans});
    return ans;
  }
  bool consistent(const Bits& x) const {
    for (auto& [idx, ans] : rounds)
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (x.get(idx[i]) != ans[i]) return false;
    return true;
  }
};

}  // namespace

TEST_CASE("pointer strategies finish in min(hops, blocks/parallelism) rounds") {
  struct Case {
    int blocks, hops, p, rounds;
  };
  for (Case c : {Case{4, 2, 1, 2}, Case{4, 8, 2, 2}, Case{4, 1, 4, 1}, Case{4, 4, 1, 4},
                 Case{8, 4, 2, 4}, Case{8, 2, 4, 2}}) {
    BooleanFunction ptr = make_pointer(c.blocks, c.hops);
    QueryStrategy s = pointer_det_algorithm(c.blocks, c.hops, c.p);
    auto inputs = c.blocks == 4 ? domain_inputs(ptr) : random_inputs(ptr.arity(), 300, c.hops);
    CHECK(worst_rounds(s, ptr, inputs) == c.rounds);
  }
  CHECK_THROWS_AS(pointer_det_algorithm(4, 2, 0), ArityMismatch);
}

TEST_CASE("pointer adversary: nothing jumps ahead in the chain") {
  const int blocks = 16, hops = 4, w = 4;
  BooleanFunction ptr = make_pointer(blocks, hops);

  // the honest chain follower, stopped one round short
  auto adv = pointer_adversary(blocks, hops, 1, hops - 1);
  QueryStrategy chase = pointer_det_algorithm(blocks, hops, 1);
  Transcript t;
  AdvLog log;
  for (int r = 0; r < hops - 1; ++r) {
    StrategyStep step = chase.next(t);
    REQUIRE(!step.answer);
    TranscriptRound round;
    round.indices = step.query;
    round.answers = log.ask(adv, step.query);
    t.rounds.push_back(round);
  }
  auto x0 = adv.complete(0), x1 = adv.complete(1);
  REQUIRE(x0);
  REQUIRE(x1);
  CHECK(log.consistent(*x0));
  CHECK(log.consistent(*x1));
  CHECK(ptr.evaluate(*x0) == 0);
  CHECK(ptr.evaluate(*x1) == 1);
  CHECK_THROWS_AS(adv.answer({0}), BudgetExceeded);

  // random block strategies never split the completions either
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng = rng_stream(seed, 0xadb1);
    auto a = pointer_adversary(blocks, hops, 1, hops - 1);
    AdvLog l;
    std::vector<int> labels(blocks, -1);
    std::set<int> queried_cells;
    for (int r = 0; r < hops - 1; ++r) {
      int cell = (int)rng_below(rng, blocks);
      queried_cells.insert(cell);
      std::vector<int> idx;
      for (int b = 0; b < w; ++b) idx.push_back(cell * w + b);
      auto ans = l.ask(a, idx);
      int label = 0;
      for (int b = 0; b < w; ++b) label |= ans[b] << b;
      labels[cell] = label;
      if (r == 0) CHECK(queried_cells.count(label) == 0);  // cannot point at itself
      CHECK(revealed_chain_length(labels, blocks) <= r + 1);
    }
    auto c0 = a.complete(0), c1 = a.complete(1);
    REQUIRE(c0);
    REQUIRE(c1);
    CHECK(l.consistent(*c0));
    CHECK(l.consistent(*c1));
    CHECK(ptr.evaluate(*c0) == 0);
    CHECK(ptr.evaluate(*c1) == 1);
  }
}

TEST_CASE("balancing adversary keeps simple functions undecided to the end") {
  for (BooleanFunction f : {make_and(4), make_parity(4)}) {
    auto adv = balancing_adversary(f, 3);
    AdvLog log;
    for (int i = 0; i < 3; ++i) log.ask(adv, {i});
    auto x0 = adv.complete(0), x1 = adv.complete(1);
    REQUIRE(x0);
    REQUIRE(x1);
    CHECK(log.consistent(*x0));
    CHECK(log.consistent(*x1));
    CHECK(f.evaluate(*x0) == 0);
    CHECK(f.evaluate(*x1) == 1);
    CHECK_THROWS_AS(adv.answer({3}), BudgetExceeded);
  }

  // partial functions: completions, when they exist, respect the promise
  BooleanFunction g = qpar_test::random_partial(5, 11);
  auto adv = balancing_adversary(g, 10);
  AdvLog log;
  log.ask(adv, {0, 3});
  for (int v : {0, 1}) {
    auto x = adv.complete(v);
    if (!x) continue;
    CHECK(log.consistent(*x));
    CHECK(g.in_domain(*x));
    CHECK(g.evaluate(*x) == v);
  }
}

TEST_CASE("cor adversary routes each side to its own answerer") {
  BooleanFunction dj2 = make_dj(2), and2 = make_and(2);
  BooleanFunction cor = make_cor(dj2, and2);
  auto adv = cor_det_adversary(dj2, and2, balancing_adversary(dj2, 99),
                               balancing_adversary(and2, 99), 1);
  AdvLog log;
  log.ask(adv, {2, 0});  // interleaved components keep their positions
  auto x0 = adv.complete(0), x1 = adv.complete(1);
  REQUIRE(x0);
  REQUIRE(x1);
  CHECK(log.consistent(*x0));
  CHECK(log.consistent(*x1));
  CHECK(cor.in_domain(*x0));
  CHECK(cor.in_domain(*x1));
  CHECK(cor.evaluate(*x0) == 0);
  CHECK(cor.evaluate(*x1) == 1);
  CHECK_THROWS_AS(adv.answer({1}), BudgetExceeded);

  // exact solver agrees with the sandwich the adversary witnesses
  int dcor = exact_parallel_D(cor, 1);
  int lo = std::min(exact_parallel_D(dj2, 1), exact_parallel_D(and2, 1));
  CHECK(dcor >= lo);
  CHECK(dcor <= 2 * lo);
}

TEST_CASE("cheat-sheet adversary zeroes the cells and still completes both ways") {
  BooleanFunction dj2 = make_dj(2);
  BooleanFunction ao = make_and_or(2, 2);
  BooleanFunction fp = compose(dj2, {ao, ao});
  CheatSheetLayout lay = canonical_cheatsheet_layout(2, 2, 2, 1);
  BooleanFunction fcs = make_canonical_cheatsheet(dj2, 2, 2, 1);

  {
    auto adv = cheatsheet_det_adversary(fp, lay, 1);
    AdvLog log;
    auto ans = log.ask(adv, {0, 5, 11});  // two address bits and one cell bit
    CHECK(ans[2] == 0);                   // cell answers are always 0
    auto z0 = adv.complete(0), z1 = adv.complete(1);
    REQUIRE(z0);
    REQUIRE(z1);
    CHECK(log.consistent(*z0));
    CHECK(log.consistent(*z1));
    CHECK(fcs.evaluate(*z0) == 0);
    CHECK(fcs.evaluate(*z1) == 1);
    for (int l = 0; l < lay.cells(); ++l)
      CHECK(z0->slice_bits(lay.cell_offset(l), lay.cell_size).popcount() == 0);
    CHECK_THROWS_AS(adv.answer({1}), BudgetExceeded);
  }

  // random strategies under budget: both completions always exist
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng = rng_stream(seed, 0xc5ad);
    auto adv = cheatsheet_det_adversary(fp, lay, 1);
    AdvLog log;
    std::set<int> pick;
    while ((int)pick.size() < 3) pick.insert((int)rng_below(rng, (std::uint64_t)lay.arity()));
    log.ask(adv, std::vector<int>(pick.begin(), pick.end()));
    auto z0 = adv.complete(0), z1 = adv.complete(1);
    REQUIRE(z0);
    REQUIRE(z1);
    CHECK(log.consistent(*z0));
    CHECK(log.consistent(*z1));
    CHECK(fcs.evaluate(*z0) == 0);
    CHECK(fcs.evaluate(*z1) == 1);
  }

  // once every cell bit is pinned to 0, no certificate survives and only the
  // 0-completion is left
  auto adv = cheatsheet_det_adversary(fp, lay, 2);
  AdvLog log;
  std::vector<int> all_cells;
  for (int l = 0; l < lay.cells(); ++l)
    for (int b = 0; b < lay.cell_size; ++b) all_cells.push_back(lay.cell_offset(l) + b);
  log.ask(adv, all_cells);
  CHECK(adv.complete(1) == std::nullopt);
  CHECK(adv.complete(0) != std::nullopt);
}

TEST_CASE("deterministic cheat-sheet algorithm matches the function everywhere") {
  BooleanFunction dj2 = make_dj(2);
  BooleanFunction ao = make_and_or(2, 2);
  BooleanFunction fp = compose(dj2, {ao, ao});
  CheatSheetLayout lay = canonical_cheatsheet_layout(2, 2, 2, 1);
  BooleanFunction fcs = make_canonical_cheatsheet(dj2, 2, 2, 1);
  QueryStrategy det = cheatsheet_parallel_algorithm(AlgModel::det, dj2, 2, 2, 1, 0,
                                                    lay.cell_size, 2, 0);

  std::vector<Bits> suite;
  for (const Bits& x : domain_inputs(fp)) {
    suite.push_back(build_cheatsheet_input(fp, lay, {x}, true));
    suite.push_back(build_cheatsheet_input(fp, lay, {x}, false));
    Bits corrupt = suite[suite.size() - 2];
    corrupt.flip(lay.cell_offset((int)fp.evaluate(x)) + 0);  // bend the count field
    suite.push_back(corrupt);
  }
  for (const Bits& z : random_inputs(lay.arity(), 50, 3)) suite.push_back(z);

  for (const Bits& z : suite) {
    Transcript t = run_strategy(det, z, fcs);
    CHECK(t.correct());
    if (t.round_count() == 3) {
      auto& cell_round = t.rounds[1].indices;  // the middle round reads exactly one cell
      CHECK((int)cell_round.size() == lay.cell_size);
      int base = cell_round[0];
      CHECK((base - lay.copy_offset(lay.copies)) % lay.cell_size == 0);
      for (std::size_t i = 0; i < cell_round.size(); ++i)
        CHECK(cell_round[i] == base + (int)i);
    }
  }

  CHECK_THROWS_AS(
      cheatsheet_parallel_algorithm(AlgModel::det, dj2, 2, 2, 1, 0, lay.cell_size - 1, 2, 0),
      ParallelismTooSmall);
}

TEST_CASE("sampling cheat-sheet algorithm wins at least two thirds of the time") {
  BooleanFunction dj2 = make_dj(2);
  BooleanFunction ao = make_and_or(2, 2);
  BooleanFunction fp = compose(dj2, {ao, ao});
  CheatSheetLayout lay = canonical_cheatsheet_layout(2, 2, 2, 1);
  BooleanFunction fcs = make_canonical_cheatsheet(dj2, 2, 2, 1);

  const int seeds = 400;
  std::vector<QueryStrategy> strat;
  for (int s = 0; s < seeds; ++s)
    strat.push_back(cheatsheet_parallel_algorithm(AlgModel::rand, dj2, 2, 2, 1, 0,
                                                  lay.cell_size, 3, std::uint64_t(s)));

  double worst = 1.0;
  for (const Bits& x : domain_inputs(fp)) {
    Bits z = build_cheatsheet_input(fp, lay, {x}, true);
    int truth = fcs.evaluate(z);
    int good = 0;
    for (auto& s : strat) {
      Transcript t = run_strategy(s, z, fcs);
      if (t.final_answer == truth) ++good;
      CHECK(t.round_count() <= 3);
    }
    worst = std::min(worst, double(good) / seeds);
  }
  CHECK(worst >= 2.0 / 3);

  // a broken certificate is never accepted, whatever the seed
  for (const Bits& x : domain_inputs(fp)) {
    Bits z = build_cheatsheet_input(fp, lay, {x}, true);
    z.flip(lay.cell_offset((int)fp.evaluate(x)) + 0);
    for (int s = 0; s < 50; ++s) {
      Transcript t = run_strategy(strat[s], z, fcs);
      CHECK(t.final_answer == 0);
    }
  }

  CHECK_THROWS_AS(cheatsheet_parallel_algorithm(AlgModel::rand, dj2, 2, 2, 1, 0, 12, 3, 0),
                  ParallelismTooSmall);
}

TEST_CASE("two-round strategy beats the verification game with room to spare") {
  BooleanFunction dj2 = make_dj(2);
  TwoAdaptiveLayout lay{2, 5};
  BooleanFunction fta = make_two_adaptive(dj2, 5, "dj");

  Rng rng = rng_stream(9, 0x2222);
  int good = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    Bits z = sample_two_adaptive_hard(dj2, lay, rng);
    QueryStrategy s = two_adaptive_rand_algorithm(dj2, lay, 3, std::uint64_t(i));
    Transcript t = run_strategy(s, z, fta);
    CHECK(t.round_count() == 2);
    if (t.correct()) ++good;
  }
  CHECK(double(good) / trials >= 0.6);
}

TEST_CASE("two-round strategy answers 0 with certainty on broken instances") {
  BooleanFunction dj2 = make_dj(2);
  TwoAdaptiveLayout lay{2, 5};
  BooleanFunction fta = make_two_adaptive(dj2, 5, "dj");

  std::vector<Bits> vals(5, Bits::from_index(2, 1));  // every target bit is 1
  Bits dt(lay.dt_size());
  dt.set(31, 1);  // DT[11111] = 1
  Bits z = build_two_adaptive_instance(dj2, lay, vals, dt, 42);
  REQUIRE(fta.evaluate(z) == 1);

  // break the certified half of one sub-segment
  Bits cell = z.slice_bits(lay.bc_offset(0, 0), lay.bc_cell());
  auto bc = decode_bicertificate(cell, lay);
  REQUIRE(bc);
  int other = 1 - bc->zero_block;
  Bits broken_add = z;
  broken_add.flip(lay.add_offset(0, 0) + bc->one_part[other]);
  REQUIRE(fta.evaluate(broken_add) == 0);

  // scramble the cell padding so decoding fails
  Bits broken_bc = z;
  broken_bc.flip(lay.bc_offset(0, 0) + lay.bc_cell() - 1);
  REQUIRE(fta.evaluate(broken_bc) == 0);

  for (int s = 0; s < 100; ++s) {
    QueryStrategy strat = two_adaptive_rand_algorithm(dj2, lay, 3, std::uint64_t(s));
    for (const Bits* bad : {&broken_add, &broken_bc}) {
      Transcript t = run_strategy(strat, *bad, fta);
      CHECK(t.final_answer == 0);
      CHECK(t.round_count() == 2);
    }
  }
}

TEST_CASE("hard distribution balances the target bits") {
  BooleanFunction dj2 = make_dj(2);
  TwoAdaptiveLayout lay{2, 3};
  BooleanFunction fta = make_two_adaptive(dj2, 3, "dj");
  Rng rng = rng_stream(4, 0x3333);
  int ones = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    Bits z = sample_two_adaptive_hard(dj2, lay, rng);
    ones += fta.evaluate(z);
  }
  double frac = double(ones) / trials;  // DT is uniform, so the output is a fair coin
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);

  BooleanFunction never = BooleanFunction::from_predicate(
      2, [](std::uint64_t) { return false; }, nullptr);
  Rng r2 = rng_stream(1, 0x3434);
  CHECK_THROWS_AS(sample_two_adaptive_hard(never, lay, r2), ConstructionFailed);
}

TEST_CASE("one query per round cannot beat the verification game") {
  // The best two probes spend the first on a data bit (posterior on the
  // target bit moves to 3/5 or 6/11) and the second on the table entry of
  // the likeliest target, worth exactly 1/2 + 9/2^(segments+4).  Probing two
  // table entries is weaker: equal answers cancel half the time.
  BooleanFunction dj2 = make_dj(2);
  double v5 = two_adaptive_two_round_optimum(dj2, TwoAdaptiveLayout{2, 5}, 1);
  CHECK(v5 == doctest::Approx(0.5 + 9.0 / 512).epsilon(1e-12));
  CHECK(v5 <= 0.55);
  double v4 = two_adaptive_two_round_optimum(dj2, TwoAdaptiveLayout{2, 4}, 1);
  CHECK(v4 == doctest::Approx(0.5 + 9.0 / 256).epsilon(1e-12));
  CHECK(v4 > v5);  // the advantage halves with every extra segment
  CHECK(v4 <= 0.55);
  CHECK_THROWS_AS(two_adaptive_two_round_optimum(dj2, TwoAdaptiveLayout{2, 5}, 2), TooLarge);
}

TEST_CASE("lifted strings evaluate back to the bits they encode") {
  const int sub_blocks = 4, k = 2, block_bits = 2, modulus = 3;
  BooleanFunction ks = make_ksum(sub_blocks, k, block_bits, modulus);
  for (int len = 1; len <= 6; ++len)
    for (std::uint64_t xv = 0; xv < (std::uint64_t(1) << len); ++xv) {
      Bits x = Bits::from_index(len, xv);
      for (std::uint64_t seed = 0; seed < (len == 6 ? 100u : 10u); ++seed) {
        Bits y = build_ksum_lift(x, sub_blocks, k, block_bits, modulus, seed);
        REQUIRE(y.n == len * sub_blocks * block_bits);
        for (int i = 0; i < len; ++i)
          CHECK(ks.evaluate(y.slice_bits(i * sub_blocks * block_bits, sub_blocks * block_bits)) ==
                x.get(i));
      }
    }

  // the hidden sub-block index is uniform across seeds
  Bits one = Bits::ones(1);
  std::vector<int> count(sub_blocks, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Bits y = build_ksum_lift(one, sub_blocks, k, block_bits, modulus, seed);
    for (int j = k - 1; j < sub_blocks; ++j)
      if (y.slice(j * block_bits, block_bits) == 0) ++count[j];
  }
  double chi2 = 0, expect = 1000.0 / (sub_blocks - (k - 1));
  for (int j = k - 1; j < sub_blocks; ++j)
    chi2 += (count[j] - expect) * (count[j] - expect) / expect;
  CHECK(chi2 < 20.0);  // df = 2

  CHECK_THROWS_AS(build_ksum_lift(one, 2, 2, 2, 3, 0), ConstructionFailed);
  CHECK_THROWS_AS(build_ksum_lift(one, 4, 2, 2, 2, 0), ConstructionFailed);
  CHECK_THROWS_AS(build_ksum_lift(one, 4, 2, 2, 5, 0), ConstructionFailed);
}

TEST_CASE("star positions are hit about as often as the expectation says") {
  CHECK(star_query_count({}, 8, 8, 17) == 0);

  // scanner over the first two blocks: both stars are found every time,
  // far below the 20l/m threshold
  std::vector<int> scan;
  for (int i = 0; i < 16; ++i) scan.push_back(i);
  StarStats s = star_hit_stats(scan, 8, 8, 20.0 * 16 / 8, 10000, 5);
  CHECK(s.exceed_prob <= 0.1);
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.mean <= 2.0 * 16 / 8);

  // a single huge block makes the bound bite: hits happen but stay rare
  std::vector<int> probe;
  for (int i = 0; i < 8; ++i) probe.push_back(i);
  StarStats t = star_hit_stats(probe, 1, 256, 20.0 * 8 / 256, 10000, 6);
  CHECK(t.exceed_prob > 0.0);
  CHECK(t.exceed_prob <= 0.1);
  CHECK(t.mean <= 2.0 * 8 / 256);

  CHECK_THROWS_AS(star_query_count({64}, 8, 8, 0), IndexOutOfRange);
}
