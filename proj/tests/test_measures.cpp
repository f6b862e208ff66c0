#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qpar/measures.hpp"
#include "test_helpers.hpp"

using namespace qpar;
using qpar_test::make_ao22;
using qpar_test::make_dj4;
using qpar_test::random_partial;
using qpar_test::random_total;

namespace {

// Independent oracle: per-input minimum certificate by subset sweep with a
// direct all-completions check.
int oracle_certificate(const BooleanFunction& f, int side) {
  int n = f.arity();
  std::uint64_t size = std::uint64_t(1) << n;
  int worst = -1;
  for (std::uint64_t x = 0; x < size; ++x) {
    if (!f.in_domain_index(x) || f.evaluate_index(x) != side) continue;
    int best = n;
    for (std::uint64_t s = 0; s < size; ++s) {
      if (__builtin_popcountll(s) >= best) continue;
      bool ok = true;
      for (std::uint64_t y = 0; y < size && ok; ++y) {
        if (!f.in_domain_index(y)) continue;
        if ((y & s) == (x & s) && f.evaluate_index(y) != side) ok = false;
      }
      if (ok) best = __builtin_popcountll(s);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// Independent oracle: max disjoint sensitive blocks by recursion over all
// sensitive blocks (no minimality reduction).
int oracle_bs_at(const BooleanFunction& f, std::uint64_t x) {
  int n = f.arity();
  std::uint64_t size = std::uint64_t(1) << n;
  int fx = f.evaluate_index(x);
  std::vector<std::uint64_t> sens;
  for (std::uint64_t b = 1; b < size; ++b) {
    std::uint64_t y = x ^ b;
    if (f.in_domain_index(y) && f.evaluate_index(y) != fx) sens.push_back(b);
  }
  std::function<int(std::size_t, std::uint64_t)> rec = [&](std::size_t i,
                                                           std::uint64_t used) -> int {
    int best = 0;
    for (std::size_t j = i; j < sens.size(); ++j)
      if (!(sens[j] & used)) best = std::max(best, 1 + rec(j + 1, used | sens[j]));
    return best;
  };
  return rec(0, 0);
}

int oracle_bs(const BooleanFunction& f, int side = -1) {
  int n = f.arity();
  std::uint64_t size = std::uint64_t(1) << n;
  int best = 0;
  for (std::uint64_t x = 0; x < size; ++x) {
    if (!f.in_domain_index(x)) continue;
    if (side != -1 && f.evaluate_index(x) != side) continue;
    best = std::max(best, oracle_bs_at(f, x));
  }
  return best;
}

// Independent oracle: dense adjacency + Eigen eigendecomposition.
double oracle_lambda(const BooleanFunction& f) {
  int n = f.arity();
  std::uint64_t size = std::uint64_t(1) << n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (std::uint64_t x = 0; x < size; ++x) {
    if (!f.in_domain_index(x)) continue;
    for (int b = 0; b < n; ++b) {
      std::uint64_t y = x ^ (std::uint64_t(1) << b);
      if (!f.in_domain_index(y)) continue;
      if (f.evaluate_index(x) != f.evaluate_index(y)) a(x, y) = 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return std::max(std::abs(es.eigenvalues().minCoeff()),
                  std::abs(es.eigenvalues().maxCoeff()));
}

std::vector<BooleanFunction> small_corpus() {
  std::vector<BooleanFunction> fs = {
      make_and(2),  make_or(2),       make_parity(2), make_and(4),       make_or(4),
      make_parity(3), make_majority(3), make_dj4(),     make_ao22(),
      make_threshold(5, 2), make_majority(5),
  };
  for (std::uint64_t s = 0; s < 8; ++s) fs.push_back(random_total(4, s));
  for (std::uint64_t s = 0; s < 4; ++s) fs.push_back(random_total(5, 100 + s));
  for (std::uint64_t s = 0; s < 4; ++s) fs.push_back(random_partial(4, 200 + s));
  return fs;
}

}  // namespace

TEST_CASE("certificate complexity matches oracle on corpus") {
  for (const auto& f : small_corpus()) {
    CHECK(certificate_complexity(f, 0) == oracle_certificate(f, 0));
    CHECK(certificate_complexity(f, 1) == oracle_certificate(f, 1));
  }
}

TEST_CASE("certificate complexity frozen values") {
  CHECK(certificate_stats(make_and(4)).c0 == 1);
  CHECK(certificate_stats(make_and(4)).c1 == 4);
  CHECK(certificate_stats(make_parity(5)).c() == 5);
  auto ao = certificate_stats(make_ao22());
  CHECK(ao.c0 == 2);  // one all-zero OR block
  CHECK(ao.c1 == 2);  // one satisfied literal per block
  auto dj = certificate_stats(make_dj4());
  CHECK(dj.c0 == 3);  // three fixed zeros exclude every balanced completion
  CHECK(dj.c1 == 1);  // a single 1 already excludes the all-zeros branch
  CHECK(certificate_stats(make_majority(3)).c() == 2);
  // one-sided constants have an empty side
  auto ones = BooleanFunction::total_from_bits(2, {1, 1, 1, 1});
  CHECK(certificate_complexity(ones, 0) == -1);
  CHECK(certificate_complexity(ones, 1) == 0);
}

TEST_CASE("find_certificate returns a verified minimal set") {
  for (const auto& f : small_corpus()) {
    std::uint64_t size = std::uint64_t(1) << f.arity();
    for (std::uint64_t x = 0; x < size; ++x) {
      if (!f.in_domain_index(x)) continue;
      auto cert = find_certificate(f, Bits::from_index(f.arity(), x));
      int fx = f.evaluate_index(x);
      std::uint64_t mask = 0;
      for (int i : cert) mask |= std::uint64_t(1) << i;
      for (std::uint64_t y = 0; y < size; ++y) {
        if (!f.in_domain_index(y) || (y & mask) != (x & mask)) continue;
        CHECK(f.evaluate_index(y) == fx);
      }
    }
  }
}

TEST_CASE("block sensitivity matches oracle on corpus") {
  for (const auto& f : small_corpus()) {
    CHECK(block_sensitivity(f).value == oracle_bs(f));
    CHECK(block_sensitivity(f, 0).value == oracle_bs(f, 0));
    CHECK(block_sensitivity(f, 1).value == oracle_bs(f, 1));
  }
}

TEST_CASE("block sensitivity frozen values and witnesses") {
  auto r = block_sensitivity(make_and(4));
  CHECK(r.value == 4);
  CHECK(r.witness.index() == 15);
  auto ao = block_sensitivity(make_ao22());
  CHECK(ao.value == 2);
  CHECK(block_sensitivity(make_ao22(), 0).value == 2);
  CHECK(block_sensitivity(make_ao22(), 1).value == 2);
  CHECK(block_sensitivity(make_parity(3)).value == 3);
  CHECK(block_sensitivity(make_majority(3)).value == 2);

  // witness blocks are disjoint and each flip changes the value
  for (const auto& f : small_corpus()) {
    auto w = block_sensitivity(f);
    if (w.value == 0) continue;
    std::uint64_t used = 0;
    int fx = f.evaluate(w.witness);
    for (const auto& blk : w.blocks) {
      Bits y = w.witness;
      std::uint64_t bm = 0;
      for (int i : blk) {
        y.flip(i);
        bm |= std::uint64_t(1) << i;
      }
      CHECK((used & bm) == 0);
      used |= bm;
      CHECK(f.in_domain(y));
      CHECK(f.evaluate(y) != fx);
    }
    CHECK((int)w.blocks.size() == w.value);
  }
}

TEST_CASE("block sensitivity needs domain witness") {
  auto dj = make_dj4();
  CHECK_THROWS_AS(block_sensitivity_at(dj, Bits::from_index(4, 1)), OutOfDomain);
  // dj at 0000: any weight-2 flip lands in the 1-side
  CHECK(block_sensitivity_at(dj, Bits::from_index(4, 0)).value == 2);
}

TEST_CASE("spectral sensitivity matches dense oracle") {
  for (const auto& f : small_corpus()) {
    double got = spectral_sensitivity(f);
    double want = oracle_lambda(f);
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, want));
  }
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto f = random_total(6, 300 + s);
    CHECK(std::abs(spectral_sensitivity(f) - oracle_lambda(f)) <= 1e-9 * 6);
  }
  auto f8 = random_total(8, 777);
  CHECK(std::abs(spectral_sensitivity(f8) - oracle_lambda(f8)) <= 1e-9 * 8);
}

TEST_CASE("spectral sensitivity frozen values") {
  CHECK(spectral_sensitivity(make_or(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(spectral_sensitivity(make_and(4)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(spectral_sensitivity(make_parity(3)) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(spectral_sensitivity(make_parity(5)) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(spectral_sensitivity(make_majority(3)) == doctest::Approx(2.0).epsilon(1e-9));
  // the promise graph of dj4 has no distance-1 domain pairs
  CHECK(spectral_sensitivity(make_dj4()) == doctest::Approx(0.0));
}

TEST_CASE("measure relations on total functions") {
  for (const auto& f : small_corpus()) {
    if (!f.total()) continue;
    int bs = block_sensitivity(f).value;
    int c = certificate_stats(f).c();
    CHECK(bs <= c);
    double lam = spectral_sensitivity(f);
    CHECK(lam <= f.arity() + 1e-9);
    bool constant = certificate_complexity(f, 0) == -1 || certificate_complexity(f, 1) == -1;
    if (!constant) CHECK(lam >= 1.0 - 1e-9);
  }
}

TEST_CASE("measure caps raise TooLarge") {
  BooleanFunction::GeneratorSpec spec;
  spec.name = "wide";
  spec.arity = 30;
  spec.eval = [](const Bits& x) { return x.get(0); };
  auto wide = BooleanFunction::from_generator(std::move(spec));
  CHECK_THROWS_AS(certificate_complexity(wide, 0), TooLarge);
  CHECK_THROWS_AS(block_sensitivity(wide), TooLarge);
  CHECK_THROWS_AS(spectral_sensitivity(wide), TooLarge);
}
