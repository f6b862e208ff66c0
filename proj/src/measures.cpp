#include "qpar/measures.hpp"

#include <algorithm>

namespace qpar {

namespace {

constexpr int kCertArityCap = 16;
constexpr int kBsArityCap = 14;

struct TableView {
  int n;
  std::uint64_t size;
  std::vector<char> dom;  // 0/1
  std::vector<char> out;  // valid where dom
  explicit TableView(const BooleanFunction& f) : n(f.arity()), size(std::uint64_t(1) << n) {
    dom.resize(size);
    out.resize(size);
    BooleanFunction t = f.is_table() ? f : f.to_table();
    for (std::uint64_t i = 0; i < size; ++i) {
      dom[i] = t.in_domain_index(i) ? 1 : 0;
      out[i] = dom[i] ? (char)t.evaluate_index(i) : 0;
    }
  }
};

std::uint64_t extract_bits(std::uint64_t x, const std::vector<int>& pos) {
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) k |= ((x >> pos[j]) & 1) << j;
  return k;
}

}  // namespace

int certificate_complexity(const BooleanFunction& f, int side) {
  if (f.arity() > kCertArityCap)
    throw TooLarge("certificate complexity capped at arity " + std::to_string(kCertArityCap));
  TableView t(f);
  std::vector<char> open(t.size, 0);  // side inputs still lacking a certificate
  std::uint64_t remaining = 0;
  for (std::uint64_t i = 0; i < t.size; ++i)
    if (t.dom[i] && t.out[i] == side) {
      open[i] = 1;
      ++remaining;
    }
  if (remaining == 0) return -1;

  // group state per S-assignment: 0 unseen, 1 only-zeros, 2 only-ones, 3 mixed
  std::vector<char> group;
  for (int s = 0; s <= t.n; ++s) {
    for_each_subset_of_size(t.n, s, [&](std::uint64_t mask) {
      if (remaining == 0) return;
      std::vector<int> pos;
      for (int b = 0; b < t.n; ++b)
        if ((mask >> b) & 1) pos.push_back(b);
      group.assign(std::uint64_t(1) << s, 0);
      for (std::uint64_t i = 0; i < t.size; ++i) {
        if (!t.dom[i]) continue;
        std::uint64_t k = extract_bits(i, pos);
        char v = t.out[i] ? 2 : 1;
        group[k] = char(group[k] == 0 ? v : (group[k] == v ? v : 3));
      }
      for (std::uint64_t i = 0; i < t.size; ++i) {
        if (!open[i]) continue;
        char g = group[extract_bits(i, pos)];
        if (g == 1 || g == 2) {
          open[i] = 0;
          --remaining;
        }
      }
    });
    if (remaining == 0) return s;
  }
  return t.n;  // every input certifies itself with all coordinates fixed
}

CertificateStats certificate_stats(const BooleanFunction& f) {
  CertificateStats cs;
  cs.c0 = certificate_complexity(f, 0);
  cs.c1 = certificate_complexity(f, 1);
  return cs;
}

std::vector<int> find_certificate(const BooleanFunction& f, const Bits& x) {
  if (f.arity() > kCertArityCap) throw TooLarge("certificate search capped at arity 16");
  int n = f.arity();
  int fx = f.evaluate(x);
  TableView t(f);
  std::uint64_t xi = x.index();
  for (int s = 0; s <= n; ++s) {
    std::vector<int> found;
    bool hit = false;
    for_each_subset_of_size(n, s, [&](std::uint64_t mask) {
      if (hit) return;
      std::vector<int> pos;
      for (int b = 0; b < n; ++b)
        if ((mask >> b) & 1) pos.push_back(b);
      std::uint64_t key = extract_bits(xi, pos);
      for (std::uint64_t i = 0; i < t.size; ++i) {
        if (!t.dom[i] || extract_bits(i, pos) != key) continue;
        if (t.out[i] != fx) return;  // some consistent completion disagrees
      }
      hit = true;
      found = pos;
    });
    if (hit) return found;
  }
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  return all;
}

namespace {

struct Packer {
  const std::vector<std::uint64_t>& blocks;  // minimal sensitive blocks, popcount ascending
  int best = 0;
  std::vector<int> chosen_best;
  std::vector<int> chosen;

  // blocks[idx..] all have popcount >= popcount(blocks[idx]), so free_bits /
  // that size bounds how many more can still fit.
  void dfs(std::size_t idx, std::uint64_t used, int count, int free_bits) {
    if (count > best) {
      best = count;
      chosen_best = chosen;
    }
    for (std::size_t i = idx; i < blocks.size(); ++i) {
      std::uint64_t b = blocks[i];
      int sz = __builtin_popcountll(b);
      if (count + free_bits / sz <= best) return;  // even optimally packed, no improvement
      if (b & used) continue;
      chosen.push_back((int)i);
      dfs(i + 1, used | b, count + 1, free_bits - sz);
      chosen.pop_back();
    }
  }
};

BlockSensitivityResult bs_at_index(const TableView& t, std::uint64_t xi) {
  BlockSensitivityResult r;
  r.witness = Bits::from_index(t.n, xi);
  if (!t.dom[xi]) return r;
  char fx = t.out[xi];
  std::uint64_t m = std::uint64_t(1) << t.n;
  std::vector<char> sens(m, 0), hss(m, 0);  // hss: has a strict sensitive subset
  std::vector<std::uint64_t> minimal;
  for (std::uint64_t b = 1; b < m; ++b) {
    std::uint64_t y = xi ^ b;
    sens[b] = (t.dom[y] && t.out[y] != fx) ? 1 : 0;
    for (int i = 0; i < t.n && !hss[b]; ++i)
      if ((b >> i) & 1) {
        std::uint64_t c = b ^ (std::uint64_t(1) << i);
        if (sens[c] || hss[c]) hss[b] = 1;
      }
    // disjoint packings over minimal sensitive blocks reach the same maximum:
    // every sensitive block contains a minimal one
    if (sens[b] && !hss[b]) minimal.push_back(b);
  }
  std::sort(minimal.begin(), minimal.end(), [](std::uint64_t a, std::uint64_t b) {
    int pa = __builtin_popcountll(a), pb = __builtin_popcountll(b);
    return pa != pb ? pa < pb : a < b;
  });
  Packer p{minimal, 0, {}, {}};
  p.dfs(0, 0, 0, t.n);
  r.value = p.best;
  for (int i : p.chosen_best) {
    std::vector<int> blk;
    for (int b = 0; b < t.n; ++b)
      if ((minimal[i] >> b) & 1) blk.push_back(b);
    r.blocks.push_back(blk);
  }
  return r;
}

}  // namespace

BlockSensitivityResult block_sensitivity(const BooleanFunction& f, int side) {
  if (f.arity() > kBsArityCap)
    throw TooLarge("block sensitivity capped at arity " + std::to_string(kBsArityCap));
  TableView t(f);
  BlockSensitivityResult best;
  bool found = false;
  for (std::uint64_t i = 0; i < t.size; ++i) {
    if (!t.dom[i]) continue;
    if (side != -1 && t.out[i] != side) continue;
    BlockSensitivityResult r = bs_at_index(t, i);
    if (!found || r.value > best.value) {
      best = r;
      found = true;
    }
  }
  if (!found) best.witness = Bits(f.arity());
  return best;
}

BlockSensitivityResult block_sensitivity_at(const BooleanFunction& f, const Bits& x) {
  if (f.arity() > kBsArityCap) throw TooLarge("block sensitivity capped at arity 14");
  if (!f.in_domain(x)) throw OutOfDomain("block sensitivity needs a domain input");
  TableView t(f);
  return bs_at_index(t, x.index());
}

SparseSym sensitivity_adjacency(const BooleanFunction& f) {
  if (f.arity() > kBsArityCap)
    throw TooLarge("sensitivity graph capped at arity " + std::to_string(kBsArityCap));
  TableView t(f);
  SparseSym a(std::int64_t(t.size));
  for (std::uint64_t i = 0; i < t.size; ++i) {
    if (!t.dom[i]) continue;
    for (int b = 0; b < t.n; ++b) {
      std::uint64_t j = i ^ (std::uint64_t(1) << b);
      if (j < i || !t.dom[j]) continue;
      if (t.out[i] != t.out[j]) a.add((std::int64_t)i, (std::int64_t)j, 1.0);
    }
  }
  return a;
}

double spectral_sensitivity(const BooleanFunction& f, const SpectralOptions& opt) {
  return spectral_norm(sensitivity_adjacency(f), opt);
}

}  // namespace qpar
