#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/spectral.hpp"

namespace qpar {

// Symmetric-form adversary matrix over the full 2^arity index space: weight
// only on in-domain pairs with differing outputs (so the diagonal and any
// agreeing pair is zero by construction). Sparse; one entry per unordered
// pair.
struct AdversaryMatrix {
  int arity = 0;
  BooleanFunction f;
  SparseSym gamma;
};

// Validates the adversary predicate entrywise; dimensions capped at 2^14.
AdversaryMatrix make_adversary(const BooleanFunction& f, SparseSym gamma);

// Adjacency of the Hamming-distance-1 disagreement graph: the standard
// spectral-sensitivity witness.
AdversaryMatrix adjacency_adversary(const BooleanFunction& f);

// Every nonzero entry sits on a pair at Hamming distance exactly 1.
bool is_nearest_neighbor(const AdversaryMatrix& m);

// Keeps entries with x_S != y_S, zeroes the rest. S empty -> zero matrix.
AdversaryMatrix gamma_s(const AdversaryMatrix& m, const std::vector<int>& s);

double adversary_norm(const AdversaryMatrix& m, const SpectralOptions& opt = {});

// S-maximization policy: exact enumeration while C(N,p) stays within
// max_exact, otherwise `samples` seeded random subsets (flagged in the
// result — a sampled denominator only upper-bounds the true ratio).
struct SEnumeration {
  std::int64_t max_exact = 100000;
  int samples = 2000;
  std::uint64_t seed = 0;
};

struct RatioResult {
  double ratio = 0.0;
  double norm = 0.0;       // ||Gamma||
  double denom = 0.0;      // max over examined S of ||Gamma_S||
  std::vector<int> best_s; // first maximizer in enumeration order
  bool sampled = false;
  std::int64_t sets_examined = 0;
};

RatioResult parallel_adv_ratio(const AdversaryMatrix& m, int p, const SEnumeration& en = {},
                               const SpectralOptions& opt = {});

// lambda(f) / max over p-restrictions g of lambda(g), with the maximizing
// restriction reported. Constant f has lambda 0 and bound 0.
struct NNBoundResult {
  double bound = 0.0;
  double lambda_f = 0.0;
  double max_restricted = 0.0;
  Restriction best;
};

NNBoundResult nn_lower_bound(const BooleanFunction& f, int p, const SpectralOptions& opt = {});

// One diagonal block of Gamma_S after grouping rows by the assignment of the
// complement of S: a 2^p matrix indexed by S-assignments (little-endian in
// ascending S order), together with the restriction it is an adversary for.
struct AdversaryBlock {
  Bits assignment;   // complement positions in ascending order
  SparseSym m;       // dim 2^p
  BooleanFunction g; // restriction of f fixing the complement to `assignment`
};

// Splits Gamma_S into its 2^(N-p) blocks and checks each one against the
// adversary predicate for its restriction. Requires a nearest-neighbor
// matrix.
std::vector<AdversaryBlock> block_decompose(const AdversaryMatrix& m, const std::vector<int>& s);

// 0/1 relation between two output sides, with the weight sums of the
// combinatorial method derived from it.
struct RelationWeights {
  int arity = 0;
  std::vector<std::uint64_t> xs; // row side
  std::vector<std::uint64_t> ys; // column side
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
};

// R = f^{-1}(0) x f^{-1}(1) over the domain.
RelationWeights maximal_relation(const BooleanFunction& f);
// R = {(0^n, e_i)}: the OR witness.
RelationWeights or_star_relation(int n);
// Hamming-distance-1 disagreeing pairs, 0-side rows; for OR this is the star.
RelationWeights adjacency_relation(const BooleanFunction& f);

struct CombBound {
  double bound = 0.0;
  std::int64_t m = 0, m_prime = 0;
  std::int64_t ell = 0, ell_prime = 0;
};

// sqrt(m m' / (l l')) with l, l' maximized over |S| <= p (attained at
// |S| = min(p, arity) by monotonicity; exact subset enumeration).
CombBound comb_adv_bound(const RelationWeights& rw, int p);

// sqrt(ceil(C0/p) * ceil(C1/p)): no 0/1 relation can beat this.
double barrier_bound(const BooleanFunction& f, int p);

// Kronecker product in bipartite orientation: 0-side x 0-side rows against
// 1-side x 1-side columns, an adversary matrix for the correlated promise
// pairing of the two functions. Combined index = f-index | g-index << Nf
// (f component in the low bits, matching the composite input layout).
AdversaryMatrix tensor_adversary(const AdversaryMatrix& gf, const AdversaryMatrix& gg);

// Weight-1 pairs between the consecutive Hamming levels (a, a+1) where a
// symmetric function switches value, t chosen closest to N/2 among switch
// points; the complement side is used when only it switches (low_weight
// records the actual lower level used).
struct SymmetricAdversary {
  int t = 0;
  int low_weight = 0;
  AdversaryMatrix m;
};

SymmetricAdversary symmetric_adversary(const BooleanFunction& f);

// ---- read-once formulas ----

struct ReadOnceFormula {
  enum class Node { constant, leaf, conj, disj };
  Node node = Node::constant;
  int value = 0;       // constant payload
  int var = -1;        // leaf payload
  bool negated = false;
  std::vector<ReadOnceFormula> children;

  int evaluate(const Bits& x) const;
  void collect_vars(std::vector<int>& out) const;
  bool variables_distinct() const;
  // total function of the given arity (unused variables irrelevant)
  BooleanFunction to_function(int arity) const;
};

ReadOnceFormula ro_const(int value);
ReadOnceFormula ro_var(int var, bool negated = false);
ReadOnceFormula ro_and(std::vector<ReadOnceFormula> children);
ReadOnceFormula ro_or(std::vector<ReadOnceFormula> children);

// Fixes every variable outside `s` to its value in `a` and eliminates it:
// satisfied disjunctions collapse to 1, falsified literals drop out, and
// dually for conjunctions. The result mentions only variables in `s` and
// evaluates identically to the restriction.
ReadOnceFormula read_once_restrict(const ReadOnceFormula& fm, const std::vector<int>& s,
                                   const Bits& a);

// rows: row-input-hex,col-input-hex,weight (one line per stored pair)
std::string adversary_csv(const AdversaryMatrix& m);

}  // namespace qpar
