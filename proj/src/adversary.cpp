#include "qpar/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"
#include "qpar/measures.hpp"
#include "qpar/rng.hpp"

namespace qpar {

namespace {

constexpr int kDimCap = 14;  // matrices live over 2^arity indices

void check_arity(const BooleanFunction& f) {
  if (!f.valid()) throw ConstructionFailed("adversary matrix needs a function");
  if (f.arity() > kDimCap)
    throw TooLarge("adversary matrices capped at arity " + std::to_string(kDimCap));
}

std::uint64_t subset_mask(const std::vector<int>& s, int arity) {
  std::uint64_t mask = 0;
  for (int pos : s) {
    if (pos < 0 || pos >= arity) throw IndexOutOfRange("subset position outside the input");
    mask |= std::uint64_t(1) << pos;
  }
  return mask;
}

// positions of set bits, ascending
std::vector<int> mask_positions(std::uint64_t mask) {
  std::vector<int> pos;
  for (int b = 0; mask >> b; ++b)
    if (mask >> b & 1) pos.push_back(b);
  return pos;
}

std::uint64_t gather_bits(std::uint64_t v, const std::vector<int>& pos) {
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < pos.size(); ++k) out |= (v >> pos[k] & 1) << k;
  return out;
}

bool advance_combination(std::vector<int>& c, int n) {
  const int p = (int)c.size();
  for (int i = p - 1; i >= 0; --i) {
    if (c[i] < n - (p - i)) {
      ++c[i];
      for (int j = i + 1; j < p; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// ||Gamma_S|| for a nearest-neighbor matrix via its diagonal blocks: group
// the surviving entries by the complement assignment and take the largest
// dense block norm. Only worth it while the blocks stay tiny.
double nn_gamma_s_norm(const AdversaryMatrix& m, std::uint64_t mask,
                       const std::vector<int>& s_pos) {
  std::map<std::uint64_t, SparseSym> blocks;
  const std::int64_t block_dim = std::int64_t(1) << s_pos.size();
  for (const auto& e : m.gamma.entries) {
    const std::uint64_t diff = std::uint64_t(e.i) ^ std::uint64_t(e.j);
    if (!(diff & mask)) continue;
    const std::uint64_t key = std::uint64_t(e.i) & ~mask;
    auto [it, fresh] = blocks.try_emplace(key, block_dim);
    it->second.add((std::int64_t)gather_bits(std::uint64_t(e.i), s_pos),
                   (std::int64_t)gather_bits(std::uint64_t(e.j), s_pos), e.w);
  }
  double best = 0.0;
  for (const auto& [key, b] : blocks) best = std::max(best, spectral_norm_dense(b));
  return best;
}

double gamma_s_norm(const AdversaryMatrix& m, std::uint64_t mask, const SpectralOptions& opt,
                    bool nn_path, const std::vector<int>& s_pos) {
  if (nn_path) return nn_gamma_s_norm(m, mask, s_pos);
  SparseSym filtered(m.gamma.dim);
  for (const auto& e : m.gamma.entries)
    if ((std::uint64_t(e.i) ^ std::uint64_t(e.j)) & mask) filtered.entries.push_back(e);
  return spectral_norm(filtered, opt);
}

}  // namespace

AdversaryMatrix make_adversary(const BooleanFunction& f, SparseSym gamma) {
  check_arity(f);
  const std::int64_t dim = std::int64_t(1) << f.arity();
  if (gamma.dim != dim) throw ArityMismatch("matrix dimension is not 2^arity");
  SparseSym kept(gamma.dim);
  for (const auto& e : gamma.entries) {
    if (e.w == 0) continue;  // explicit zeros would pollute restrictions and dumps
    if (e.w < 0) throw ConstructionFailed("adversary weights must be nonnegative");
    if (e.i == e.j) throw ConstructionFailed("adversary weight on the diagonal");
    if (!f.in_domain_index(e.i) || !f.in_domain_index(e.j))
      throw ConstructionFailed("adversary weight on an out-of-domain input");
    if (f.evaluate_index(e.i) == f.evaluate_index(e.j))
      throw ConstructionFailed("adversary weight on an agreeing pair");
    kept.add(e.i, e.j, e.w);
  }
  return {f.arity(), f, std::move(kept)};
}

AdversaryMatrix adjacency_adversary(const BooleanFunction& f) {
  check_arity(f);
  return {f.arity(), f, sensitivity_adjacency(f)};
}

bool is_nearest_neighbor(const AdversaryMatrix& m) {
  for (const auto& e : m.gamma.entries)
    if (e.w != 0 && __builtin_popcountll(std::uint64_t(e.i) ^ std::uint64_t(e.j)) != 1)
      return false;
  return true;
}

AdversaryMatrix gamma_s(const AdversaryMatrix& m, const std::vector<int>& s) {
  const std::uint64_t mask = subset_mask(s, m.arity);
  SparseSym kept(m.gamma.dim);
  for (const auto& e : m.gamma.entries)
    if ((std::uint64_t(e.i) ^ std::uint64_t(e.j)) & mask) kept.entries.push_back(e);
  return {m.arity, m.f, std::move(kept)};
}

double adversary_norm(const AdversaryMatrix& m, const SpectralOptions& opt) {
  return spectral_norm(m.gamma, opt);
}

RatioResult parallel_adv_ratio(const AdversaryMatrix& m, int p, const SEnumeration& en,
                               const SpectralOptions& opt) {
  const int n = m.arity;
  if (p < 1 || p > n) throw IndexOutOfRange("parallelism outside [1, arity]");

  RatioResult out;
  out.norm = spectral_norm(m.gamma, opt);
  if (m.gamma.entries.empty()) return out;  // zero matrix: ratio left at 0

  const bool nn_path = is_nearest_neighbor(m) && p <= 6;
  const std::uint64_t total = binomial(n, p);

  auto consider = [&](const std::vector<int>& s) {
    const double nrm = gamma_s_norm(m, subset_mask(s, n), opt, nn_path, s);
    ++out.sets_examined;
    if (nrm > out.denom) {
      out.denom = nrm;
      out.best_s = s;
    }
  };

  if (total <= std::uint64_t(en.max_exact)) {
    std::vector<int> s(p);
    for (int i = 0; i < p; ++i) s[i] = i;
    do {
      consider(s);
    } while (advance_combination(s, n));
  } else {
    out.sampled = true;
    Rng rng = rng_stream(en.seed, 0xadf5);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int t = 0; t < en.samples; ++t) {
      for (int i = 0; i < p; ++i) std::swap(idx[i], idx[i + rng_below(rng, n - i)]);
      std::vector<int> s(idx.begin(), idx.begin() + p);
      std::sort(s.begin(), s.end());
      consider(s);
    }
  }

  out.ratio = out.denom > 0 ? out.norm / out.denom : 0.0;
  return out;
}

NNBoundResult nn_lower_bound(const BooleanFunction& f, int p, const SpectralOptions& opt) {
  check_arity(f);
  const int n = f.arity();
  if (p < 1 || p > n) throw IndexOutOfRange("parallelism outside [1, arity]");

  NNBoundResult out;
  out.lambda_f = spectral_sensitivity(f, opt);
  if (out.lambda_f == 0) return out;  // constant on its domain

  std::vector<int> s(p);
  for (int i = 0; i < p; ++i) s[i] = i;
  do {
    std::uint64_t free_mask = subset_mask(s, n);
    std::vector<int> fixed = mask_positions(~free_mask & ((std::uint64_t(1) << n) - 1));
    for (std::uint64_t b = 0; b < (std::uint64_t(1) << fixed.size()); ++b) {
      Restriction rho;
      rho.reserve(fixed.size());
      for (std::size_t k = 0; k < fixed.size(); ++k)
        rho.emplace_back(fixed[k], int(b >> k & 1));
      const BooleanFunction g = restrict_function(f, rho);
      const double lg = spectral_sensitivity(g, opt);
      if (lg > out.max_restricted) {
        out.max_restricted = lg;
        out.best = rho;
      }
    }
  } while (advance_combination(s, n));

  out.bound = out.max_restricted > 0 ? out.lambda_f / out.max_restricted : 0.0;
  return out;
}

std::vector<AdversaryBlock> block_decompose(const AdversaryMatrix& m, const std::vector<int>& s) {
  if (!is_nearest_neighbor(m))
    throw NotNearestNeighbor("block decomposition needs distance-1 support");
  const int n = m.arity;
  const int p = (int)s.size();
  const std::uint64_t mask = subset_mask(s, n);
  if ((int)mask_positions(mask).size() != p) throw IndexOutOfRange("duplicate subset positions");
  const std::vector<int> s_pos = mask_positions(mask);
  const std::vector<int> fixed = mask_positions(~mask & ((std::uint64_t(1) << n) - 1));

  // bucket the surviving entries of Gamma_S by complement assignment
  std::map<std::uint64_t, SparseSym> buckets;
  for (const auto& e : m.gamma.entries) {
    const std::uint64_t diff = std::uint64_t(e.i) ^ std::uint64_t(e.j);
    if (!(diff & mask)) continue;
    const std::uint64_t key = gather_bits(std::uint64_t(e.i) & ~mask, fixed);
    auto [it, fresh] = buckets.try_emplace(key, std::int64_t(1) << p);
    it->second.add((std::int64_t)gather_bits(std::uint64_t(e.i), s_pos),
                   (std::int64_t)gather_bits(std::uint64_t(e.j), s_pos), e.w);
  }

  std::vector<AdversaryBlock> out;
  out.reserve(std::size_t(1) << (n - p));
  for (std::uint64_t b = 0; b < (std::uint64_t(1) << fixed.size()); ++b) {
    Restriction rho;
    for (std::size_t k = 0; k < fixed.size(); ++k) rho.emplace_back(fixed[k], int(b >> k & 1));
    BooleanFunction g = restrict_function(m.f, rho);
    auto it = buckets.find(b);
    SparseSym block = it == buckets.end() ? SparseSym(std::int64_t(1) << p) : it->second;
    // adversary predicate for the restriction, checked entrywise
    AdversaryBlock ab{Bits::from_index((int)fixed.size(), b),
                      make_adversary(g, std::move(block)).gamma, std::move(g)};
    out.push_back(std::move(ab));
  }
  return out;
}

RelationWeights maximal_relation(const BooleanFunction& f) {
  check_arity(f);
  RelationWeights rw;
  rw.arity = f.arity();
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << f.arity()); ++i) {
    if (!f.in_domain_index(i)) continue;
    (f.evaluate_index(i) == 0 ? rw.xs : rw.ys).push_back(i);
  }
  if (rw.xs.size() * rw.ys.size() > (std::uint64_t(1) << 20))
    throw TooLarge("maximal relation would exceed 2^20 pairs");
  for (std::uint64_t x : rw.xs)
    for (std::uint64_t y : rw.ys) rw.pairs.emplace_back(x, y);
  return rw;
}

RelationWeights or_star_relation(int n) {
  if (n < 1 || n > kDimCap) throw IndexOutOfRange("star relation arity outside [1,14]");
  RelationWeights rw;
  rw.arity = n;
  rw.xs = {0};
  for (int i = 0; i < n; ++i) {
    rw.ys.push_back(std::uint64_t(1) << i);
    rw.pairs.emplace_back(0, std::uint64_t(1) << i);
  }
  return rw;
}

RelationWeights adjacency_relation(const BooleanFunction& f) {
  check_arity(f);
  const int n = f.arity();
  RelationWeights rw;
  rw.arity = n;
  std::vector<char> seen_x(std::size_t(1) << n, 0), seen_y(std::size_t(1) << n, 0);
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << n); ++i) {
    if (!f.in_domain_index(i) || f.evaluate_index(i) != 0) continue;
    for (int b = 0; b < n; ++b) {
      std::uint64_t j = i ^ (std::uint64_t(1) << b);
      if (!f.in_domain_index(j) || f.evaluate_index(j) != 1) continue;
      rw.pairs.emplace_back(i, j);
      if (!seen_x[i]) rw.xs.push_back(i);
      if (!seen_y[j]) rw.ys.push_back(j);
      seen_x[i] = seen_y[j] = 1;
    }
  }
  std::sort(rw.ys.begin(), rw.ys.end());
  return rw;
}

CombBound comb_adv_bound(const RelationWeights& rw, int p) {
  if (rw.pairs.empty()) throw EmptyRelation("the relation holds no pairs");
  if (p < 1) throw IndexOutOfRange("parallelism must be positive");
  const int n = rw.arity;
  const int s_size = std::min(p, n);

  std::map<std::uint64_t, std::vector<std::uint64_t>> by_x, by_y;
  for (std::uint64_t x : rw.xs) by_x[x];
  for (std::uint64_t y : rw.ys) by_y[y];
  for (const auto& [x, y] : rw.pairs) {
    if (!by_x.count(x) || !by_y.count(y))
      throw ConstructionFailed("relation pair outside the declared sides");
    by_x[x].push_back(y);
    by_y[y].push_back(x);
  }

  CombBound out;
  out.m = out.m_prime = std::int64_t(1) << 62;
  for (const auto& [x, partners] : by_x) out.m = std::min(out.m, (std::int64_t)partners.size());
  for (const auto& [y, partners] : by_y)
    out.m_prime = std::min(out.m_prime, (std::int64_t)partners.size());

  // w_{x,S} only grows with S, so the max lives at |S| = min(p, n)
  std::vector<int> s(s_size);
  for (int i = 0; i < s_size; ++i) s[i] = i;
  do {
    const std::uint64_t mask = subset_mask(s, n);
    for (const auto& [x, partners] : by_x) {
      std::int64_t cnt = 0;
      for (std::uint64_t y : partners) cnt += (x ^ y) & mask ? 1 : 0;
      out.ell = std::max(out.ell, cnt);
    }
    for (const auto& [y, partners] : by_y) {
      std::int64_t cnt = 0;
      for (std::uint64_t x : partners) cnt += (x ^ y) & mask ? 1 : 0;
      out.ell_prime = std::max(out.ell_prime, cnt);
    }
  } while (advance_combination(s, n));

  out.bound = out.ell > 0 && out.ell_prime > 0
                  ? std::sqrt(double(out.m) * double(out.m_prime) /
                              (double(out.ell) * double(out.ell_prime)))
                  : 0.0;
  return out;
}

double barrier_bound(const BooleanFunction& f, int p) {
  if (p < 1) throw IndexOutOfRange("parallelism must be positive");
  const int c0 = certificate_complexity(f, 0);
  const int c1 = certificate_complexity(f, 1);
  if (c0 < 0 || c1 < 0) throw ConstantFunction("barrier needs both output sides populated");
  const auto ceil_div = [](int a, int b) { return (a + b - 1) / b; };
  return std::sqrt(double(ceil_div(c0, p)) * double(ceil_div(c1, p)));
}

AdversaryMatrix tensor_adversary(const AdversaryMatrix& gf, const AdversaryMatrix& gg) {
  const int na = gf.arity, nb = gg.arity;
  if (na + nb > kDimCap) throw TooLarge("tensor adversary exceeds the arity cap");

  SparseSym gamma(std::int64_t(1) << (na + nb));
  for (const auto& ef : gf.gamma.entries) {
    if (ef.w == 0) continue;
    const bool fzero_first = gf.f.evaluate_index(ef.i) == 0;
    const std::uint64_t fz = fzero_first ? ef.i : ef.j;
    const std::uint64_t fo = fzero_first ? ef.j : ef.i;
    for (const auto& eg : gg.gamma.entries) {
      if (eg.w == 0) continue;
      const bool gzero_first = gg.f.evaluate_index(eg.i) == 0;
      const std::uint64_t gz = gzero_first ? eg.i : eg.j;
      const std::uint64_t go = gzero_first ? eg.j : eg.i;
      gamma.add(std::int64_t(fz | gz << na), std::int64_t(fo | go << na), ef.w * eg.w);
    }
  }
  return make_adversary(make_cor(gf.f, gg.f), std::move(gamma));
}

SymmetricAdversary symmetric_adversary(const BooleanFunction& f) {
  check_arity(f);
  if (!f.total()) throw ConstructionFailed("symmetric adversary needs a total function");
  const int n = f.arity();

  std::vector<int> level(n + 1, -1);
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << n); ++i) {
    const int w = __builtin_popcountll(i);
    const int v = f.evaluate_index(i);
    if (level[w] == -1)
      level[w] = v;
    else if (level[w] != v)
      throw ConstructionFailed("function value varies within a Hamming level");
  }

  int t = -1;
  for (int cand = n / 2; cand >= 0; --cand) {
    if (level[cand] != level[cand + 1] || level[n - cand] != level[n - cand - 1]) {
      t = cand;  // largest feasible switch point minimizes |N/2 - t|
      break;
    }
  }
  if (t < 0) throw ConstantFunction("no Hamming level switches value");

  const int a = level[t] != level[t + 1] ? t : n - t - 1;
  SparseSym gamma(std::int64_t(1) << n);
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << n); ++i) {
    if (__builtin_popcountll(i) != a) continue;
    for (int b = 0; b < n; ++b)
      if (!(i >> b & 1)) gamma.add((std::int64_t)i, std::int64_t(i | std::uint64_t(1) << b), 1.0);
  }
  return {t, a, make_adversary(f, std::move(gamma))};
}

// ---- read-once formulas ----

int ReadOnceFormula::evaluate(const Bits& x) const {
  switch (node) {
    case Node::constant:
      return value;
    case Node::leaf: {
      const int v = x.get(var);
      return negated ? 1 - v : v;
    }
    case Node::conj:
      for (const auto& c : children)
        if (c.evaluate(x) == 0) return 0;
      return 1;
    case Node::disj:
      for (const auto& c : children)
        if (c.evaluate(x) == 1) return 1;
      return 0;
  }
  return 0;
}

void ReadOnceFormula::collect_vars(std::vector<int>& out) const {
  if (node == Node::leaf) out.push_back(var);
  for (const auto& c : children) c.collect_vars(out);
}

bool ReadOnceFormula::variables_distinct() const {
  std::vector<int> vars;
  collect_vars(vars);
  std::sort(vars.begin(), vars.end());
  return std::adjacent_find(vars.begin(), vars.end()) == vars.end();
}

BooleanFunction ReadOnceFormula::to_function(int arity) const {
  std::vector<int> vars;
  collect_vars(vars);
  for (int v : vars)
    if (v >= arity) throw ArityMismatch("formula mentions a variable past the arity");
  const ReadOnceFormula self = *this;
  return BooleanFunction::from_predicate(
      arity, [self, arity](std::uint64_t i) { return self.evaluate(Bits::from_index(arity, i)); },
      nullptr);
}

ReadOnceFormula ro_const(int value) {
  ReadOnceFormula f;
  f.node = ReadOnceFormula::Node::constant;
  f.value = value ? 1 : 0;
  return f;
}

ReadOnceFormula ro_var(int var, bool negated) {
  if (var < 0) throw IndexOutOfRange("negative variable index");
  ReadOnceFormula f;
  f.node = ReadOnceFormula::Node::leaf;
  f.var = var;
  f.negated = negated;
  return f;
}

ReadOnceFormula ro_and(std::vector<ReadOnceFormula> children) {
  if (children.empty()) return ro_const(1);
  if (children.size() == 1) return children[0];
  ReadOnceFormula f;
  f.node = ReadOnceFormula::Node::conj;
  f.children = std::move(children);
  return f;
}

ReadOnceFormula ro_or(std::vector<ReadOnceFormula> children) {
  if (children.empty()) return ro_const(0);
  if (children.size() == 1) return children[0];
  ReadOnceFormula f;
  f.node = ReadOnceFormula::Node::disj;
  f.children = std::move(children);
  return f;
}

ReadOnceFormula read_once_restrict(const ReadOnceFormula& fm, const std::vector<int>& s,
                                   const Bits& a) {
  switch (fm.node) {
    case ReadOnceFormula::Node::constant:
      return fm;
    case ReadOnceFormula::Node::leaf: {
      if (std::find(s.begin(), s.end(), fm.var) != s.end()) return fm;
      const int v = a.get(fm.var);
      return ro_const(fm.negated ? 1 - v : v);
    }
    case ReadOnceFormula::Node::conj: {
      std::vector<ReadOnceFormula> kept;
      for (const auto& c : fm.children) {
        ReadOnceFormula r = read_once_restrict(c, s, a);
        if (r.node == ReadOnceFormula::Node::constant) {
          if (r.value == 0) return ro_const(0);
          continue;  // satisfied conjunct drops out
        }
        kept.push_back(std::move(r));
      }
      return ro_and(std::move(kept));
    }
    case ReadOnceFormula::Node::disj: {
      std::vector<ReadOnceFormula> kept;
      for (const auto& c : fm.children) {
        ReadOnceFormula r = read_once_restrict(c, s, a);
        if (r.node == ReadOnceFormula::Node::constant) {
          if (r.value == 1) return ro_const(1);
          continue;  // falsified literal drops out
        }
        kept.push_back(std::move(r));
      }
      return ro_or(std::move(kept));
    }
  }
  return ro_const(0);
}

std::string adversary_csv(const AdversaryMatrix& m) {
  std::vector<SparseSym::Entry> ordered = m.gamma.entries;
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::string out = "row,col,weight\n";
  char line[96];
  for (const auto& e : ordered) {
    std::snprintf(line, sizeof line, "0x%llx,0x%llx,%.17g\n", (unsigned long long)e.i,
                  (unsigned long long)e.j, e.w);
    out += line;
  }
  return out;
}

}  // namespace qpar
