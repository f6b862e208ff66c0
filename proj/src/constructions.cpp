#include "qpar/constructions.hpp"

#include <algorithm>
#include <cmath>

namespace qpar {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ArityMismatch(msg);
}

std::int64_t block_number(const Bits& x, int block, int block_bits, std::int64_t modulus) {
  std::int64_t v = (std::int64_t)x.slice(block * block_bits, block_bits);
  return ((v % modulus) + modulus) % modulus;
}

// Is 0 (mod modulus) reachable as a sum over exactly k of the given residues?
bool ksum_hit(const std::vector<std::int64_t>& vals, int k, std::int64_t modulus) {
  std::vector<std::vector<char>> dp(k + 1, std::vector<char>(modulus, 0));
  dp[0][0] = 1;
  for (std::int64_t v : vals)
    for (int c = k - 1; c >= 0; --c)
      for (std::int64_t r = 0; r < modulus; ++r)
        if (dp[c][r]) dp[c + 1][(r + v) % modulus] = 1;
  return dp[k][0] != 0;
}

}  // namespace

BooleanFunction make_and_or(int blocks, int block_size) {
  require(blocks >= 1 && block_size >= 1, "and-or needs positive block counts");
  int arity = blocks * block_size;
  auto eval = [blocks, block_size](const Bits& x) {
    for (int b = 0; b < blocks; ++b) {
      bool any = false;
      for (int i = 0; i < block_size && !any; ++i) any = x.get(b * block_size + i);
      if (!any) return 0;
    }
    return 1;
  };
  if (arity <= BooleanFunction::kTableArityCap) {
    auto f = BooleanFunction::from_predicate(
        arity,
        [&](std::uint64_t i) { return eval(Bits::from_index(arity, i)); },
        nullptr);
    return f.with_block_meta({block_size, blocks});
  }
  BooleanFunction::GeneratorSpec spec;
  spec.name = "and-or";
  spec.params = {{"blocks", blocks}, {"block-size", block_size}};
  spec.arity = arity;
  spec.eval = eval;
  spec.blocks = BlockMeta{block_size, blocks};
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_ksum(int blocks, int k, int block_bits, std::int64_t modulus) {
  require(blocks >= 1 && block_bits >= 1 && block_bits <= 62, "bad ksum block shape");
  require(k >= 1 && k <= blocks, "ksum needs 1 <= k <= blocks");
  require(modulus >= 2, "ksum needs modulus >= 2");
  BooleanFunction::GeneratorSpec spec;
  spec.name = "ksum";
  spec.params = {{"blocks", blocks}, {"k", k}, {"block-bits", block_bits}, {"modulus", modulus}};
  spec.arity = blocks * block_bits;
  spec.eval = [blocks, k, block_bits, modulus](const Bits& x) {
    std::vector<std::int64_t> vals(blocks);
    for (int b = 0; b < blocks; ++b) vals[b] = block_number(x, b, block_bits, modulus);
    return ksum_hit(vals, k, modulus) ? 1 : 0;
  };
  spec.blocks = BlockMeta{block_bits, blocks};
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_block_ksum(int blocks, int k, int block_bits, std::int64_t modulus) {
  require(blocks >= 1 && block_bits >= 2 && block_bits % 2 == 0 && block_bits <= 62,
          "block-ksum needs even block_bits");
  require(k >= 1 && k <= blocks, "block-ksum needs 1 <= k <= blocks");
  require(modulus >= 2, "block-ksum needs modulus >= 2");
  BooleanFunction::GeneratorSpec spec;
  spec.name = "block-ksum";
  spec.params = {{"blocks", blocks}, {"k", k}, {"block-bits", block_bits}, {"modulus", modulus}};
  spec.arity = blocks * block_bits;
  spec.eval = [blocks, k, block_bits, modulus](const Bits& x) {
    std::vector<std::int64_t> balanced;
    for (int b = 0; b < blocks; ++b) {
      int ones = 0;
      for (int i = 0; i < block_bits; ++i) ones += x.get(b * block_bits + i);
      if (2 * ones == block_bits) {
        balanced.push_back(block_number(x, b, block_bits, modulus));
      } else if (2 * ones < block_bits) {
        return 0;  // unbalanced block with a 0-majority
      }
    }
    if ((int)balanced.size() < k) return 0;
    return ksum_hit(balanced, k, modulus) ? 1 : 0;
  };
  spec.blocks = BlockMeta{block_bits, blocks};
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_bkk(int blocks, int k, int block_bits, std::int64_t modulus,
                         int inner_blocks, int inner_k, int inner_block_bits,
                         std::int64_t inner_modulus) {
  BooleanFunction outer = make_block_ksum(blocks, k, block_bits, modulus);
  BooleanFunction inner = make_ksum(inner_blocks, inner_k, inner_block_bits, inner_modulus);
  std::vector<BooleanFunction> inners(outer.arity(), inner);
  BooleanFunction f = compose(outer, inners);
  BooleanFunction::GeneratorSpec spec;
  spec.name = "bkk";
  spec.params = {{"blocks", blocks},
                 {"k", k},
                 {"block-bits", block_bits},
                 {"modulus", modulus},
                 {"inner-blocks", inner_blocks},
                 {"inner-k", inner_k},
                 {"inner-block-bits", inner_block_bits},
                 {"inner-modulus", inner_modulus}};
  spec.arity = f.arity();
  spec.eval = [f](const Bits& x) { return f.evaluate(x); };
  spec.blocks = BlockMeta{inner.arity(), outer.arity()};
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_dj(int n) {
  require(n >= 2 && n % 2 == 0, "dj needs even arity >= 2");
  auto in_dom = [n](const Bits& x) {
    int w = x.popcount();
    return w == 0 || 2 * w == n;
  };
  if (n <= BooleanFunction::kTableArityCap) {
    return BooleanFunction::from_predicate(
        n, [](std::uint64_t i) { return i != 0; },
        [n](std::uint64_t i) {
          int w = __builtin_popcountll(i);
          return w == 0 || 2 * w == n;
        });
  }
  BooleanFunction::GeneratorSpec spec;
  spec.name = "dj";
  spec.params = {{"n", n}};
  spec.arity = n;
  spec.in_domain = in_dom;
  spec.eval = [](const Bits& x) { return x.popcount() > 0 ? 1 : 0; };
  return BooleanFunction::from_generator(std::move(spec));
}

namespace {

// Integer correlation sum S with Phi = S / 2^{3n/2}.
std::int64_t forrelation_sum(const Bits& input, int n) {
  int m = 1 << n;
  std::vector<std::int64_t> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = input.get(i) ? -1 : 1;
    ys[i] = input.get(m + i) ? -1 : 1;
  }
  // in-place fast Walsh-Hadamard transform of xs
  for (int len = 1; len < m; len <<= 1)
    for (int i = 0; i < m; i += len << 1)
      for (int j = i; j < i + len; ++j) {
        std::int64_t a = xs[j], b = xs[j + len];
        xs[j] = a + b;
        xs[j + len] = a - b;
      }
  std::int64_t s = 0;
  for (int i = 0; i < m; ++i) s += xs[i] * ys[i];
  return s;
}

}  // namespace

double forrelation_value(const Bits& input, int n) {
  require(n >= 1 && n <= 12, "forrelation needs 1 <= n <= 12");
  require(input.n == 2 * (1 << n), "forrelation input packs two 2^n tables");
  return double(forrelation_sum(input, n)) * std::pow(2.0, -1.5 * n);
}

double forrelation_value_tables(const Bits& x_table, const Bits& y_table) {
  require(x_table.n == y_table.n, "tables must have equal size");
  int n = ceil_log2(x_table.n);
  require((1 << n) == x_table.n, "table size must be a power of two");
  Bits joined(2 * x_table.n);
  for (int i = 0; i < x_table.n; ++i) joined.set(i, x_table.get(i));
  for (int i = 0; i < y_table.n; ++i) joined.set(x_table.n + i, y_table.get(i));
  return forrelation_value(joined, n);
}

BooleanFunction make_forrelation(int n) {
  require(n >= 1 && n <= 12, "forrelation needs 1 <= n <= 12");
  int arity = 2 * (1 << n);
  // exact promise tests on the integer sum: Phi >= 3/5 or |Phi| <= 1/100
  auto classify = [n](const Bits& x) -> int {
    std::int64_t s = forrelation_sum(x, n);
    std::int64_t cube = std::int64_t(1) << (3 * n);  // 8^n = (2^{3n/2})^2
    if (s > 0 && 25 * s * s >= 9 * cube) return 1;
    if (10000 * s * s <= cube) return 0;
    return -1;
  };
  auto in_dom = [classify](const Bits& x) { return classify(x) != -1; };
  auto eval = [classify](const Bits& x) { return classify(x); };
  if (arity <= BooleanFunction::kTableArityCap) {
    return BooleanFunction::from_predicate(
        arity,
        [&](std::uint64_t i) { return eval(Bits::from_index(arity, i)); },
        [&](std::uint64_t i) { return in_dom(Bits::from_index(arity, i)); });
  }
  BooleanFunction::GeneratorSpec spec;
  spec.name = "forrelation";
  spec.params = {{"n", n}};
  spec.arity = arity;
  spec.in_domain = in_dom;
  spec.eval = eval;
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_pointer(int blocks, int hops) {
  require(blocks >= 2 && (blocks & (blocks - 1)) == 0, "pointer needs power-of-two blocks");
  require(hops >= 1, "pointer needs hops >= 1");
  int w = ceil_log2((std::uint64_t)blocks);
  BooleanFunction::GeneratorSpec spec;
  spec.name = "pointer";
  spec.params = {{"blocks", blocks}, {"hops", hops}};
  spec.arity = blocks * w;
  spec.eval = [blocks, hops, w](const Bits& x) {
    std::uint64_t v = 0;
    for (int h = 0; h < hops; ++h) v = x.slice((int)v * w, w);
    (void)blocks;
    return int(v & 1);
  };
  spec.blocks = BlockMeta{w, blocks};
  // Exact subcube oracle: depth-first over chain walks. Each step pins the
  // current cell's label (consistent with fixed bits), so revisits stay
  // self-consistent; branching only happens at fresh cells.
  spec.cube = [blocks, hops, w](const PartialInput& pa) {
    std::vector<int> pinned(blocks, -1);
    CubeValues cv;
    auto dfs = [&](auto&& self, int h, int v) -> void {
      if (cv.sees0 && cv.sees1) return;
      if (h == hops) {
        (v & 1 ? cv.sees1 : cv.sees0) = true;
        return;
      }
      if (pinned[v] != -1) {
        self(self, h + 1, pinned[v]);
        return;
      }
      for (int u = 0; u < blocks; ++u) {
        bool ok = true;
        for (int b = 0; b < w && ok; ++b) {
          int pos = v * w + b;
          if (pa.mask.get(pos) && pa.value.get(pos) != ((u >> b) & 1)) ok = false;
        }
        if (!ok) continue;
        pinned[v] = u;
        self(self, h + 1, u);
        pinned[v] = -1;
        if (cv.sees0 && cv.sees1) return;
      }
    };
    dfs(dfs, 0, 0);
    return cv;
  };
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_cor(const BooleanFunction& f, const BooleanFunction& g) {
  int m = f.arity(), n = g.arity();
  auto split = [m, n](const Bits& z, Bits& x, Bits& y) {
    x = Bits(m);
    y = Bits(n);
    for (int i = 0; i < m; ++i) x.set(i, z.get(i));
    for (int i = 0; i < n; ++i) y.set(i, z.get(m + i));
  };
  auto in_dom = [f, g, split](const Bits& z) {
    Bits x, y;
    split(z, x, y);
    return f.in_domain(x) && g.in_domain(y) && f.evaluate(x) == g.evaluate(y);
  };
  auto eval = [f, split](const Bits& z) {
    Bits x, y;
    split(z, x, y);
    return f.evaluate(x);
  };
  if (m + n <= 16) {
    return BooleanFunction::from_predicate(
        m + n,
        [&](std::uint64_t i) { return eval(Bits::from_index(m + n, i)); },
        [&](std::uint64_t i) { return in_dom(Bits::from_index(m + n, i)); });
  }
  BooleanFunction::GeneratorSpec spec;
  spec.name = "cor:" + f.kind() + ":" + g.kind();
  spec.arity = m + n;
  spec.in_domain = in_dom;
  spec.eval = eval;
  return BooleanFunction::from_generator(std::move(spec));
}

namespace {

BooleanFunction make_ana(const char* name, int blocks, int hops, int copies, int inner_n,
                         const BooleanFunction& inner) {
  BooleanFunction pointer = make_pointer(blocks, hops);
  std::vector<BooleanFunction> inners(copies, inner);
  BooleanFunction g = compose(make_parity(copies), inners);
  BooleanFunction f = make_cor(pointer, g);
  if (f.is_table()) return f;
  BooleanFunction::GeneratorSpec spec;
  spec.name = name;
  spec.params = {{"blocks", blocks}, {"hops", hops}, {"copies", copies}, {"inner-n", inner_n}};
  spec.arity = f.arity();
  spec.in_domain = [f](const Bits& x) { return f.in_domain(x); };
  spec.eval = [f](const Bits& x) { return f.evaluate(x); };
  return BooleanFunction::from_generator(std::move(spec));
}

}  // namespace

BooleanFunction make_ana_dj(int blocks, int hops, int copies, int inner_n) {
  return make_ana("ana-dj", blocks, hops, copies, inner_n, make_dj(inner_n));
}

BooleanFunction make_ana_for(int blocks, int hops, int copies, int inner_n) {
  return make_ana("ana-for", blocks, hops, copies, inner_n, make_forrelation(inner_n));
}

namespace {

std::int64_t need_param(const GenParams& ps, const char* key) {
  for (auto& [k, v] : ps)
    if (k == key) return v;
  throw ParseError(std::string("missing generator param: ") + key);
}

void check_params(const GenParams& ps, std::initializer_list<const char*> keys) {
  for (auto& [k, v] : ps) {
    (void)v;
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ParseError("unknown generator param: " + k);
  }
}

}  // namespace

void register_construction_generators() {
  BooleanFunction::register_generator("and-or", [](const GenParams& ps) {
    check_params(ps, {"blocks", "block-size"});
    return make_and_or((int)need_param(ps, "blocks"), (int)need_param(ps, "block-size"));
  });
  BooleanFunction::register_generator("ksum", [](const GenParams& ps) {
    check_params(ps, {"blocks", "k", "block-bits", "modulus"});
    return make_ksum((int)need_param(ps, "blocks"), (int)need_param(ps, "k"),
                     (int)need_param(ps, "block-bits"), need_param(ps, "modulus"));
  });
  BooleanFunction::register_generator("block-ksum", [](const GenParams& ps) {
    check_params(ps, {"blocks", "k", "block-bits", "modulus"});
    return make_block_ksum((int)need_param(ps, "blocks"), (int)need_param(ps, "k"),
                           (int)need_param(ps, "block-bits"), need_param(ps, "modulus"));
  });
  BooleanFunction::register_generator("bkk", [](const GenParams& ps) {
    check_params(ps, {"blocks", "k", "block-bits", "modulus", "inner-blocks", "inner-k",
                      "inner-block-bits", "inner-modulus"});
    return make_bkk((int)need_param(ps, "blocks"), (int)need_param(ps, "k"),
                    (int)need_param(ps, "block-bits"), need_param(ps, "modulus"),
                    (int)need_param(ps, "inner-blocks"), (int)need_param(ps, "inner-k"),
                    (int)need_param(ps, "inner-block-bits"), need_param(ps, "inner-modulus"));
  });
  BooleanFunction::register_generator("dj", [](const GenParams& ps) {
    check_params(ps, {"n"});
    return make_dj((int)need_param(ps, "n"));
  });
  BooleanFunction::register_generator("forrelation", [](const GenParams& ps) {
    check_params(ps, {"n"});
    return make_forrelation((int)need_param(ps, "n"));
  });
  BooleanFunction::register_generator("pointer", [](const GenParams& ps) {
    check_params(ps, {"blocks", "hops"});
    return make_pointer((int)need_param(ps, "blocks"), (int)need_param(ps, "hops"));
  });
  BooleanFunction::register_generator("ana-dj", [](const GenParams& ps) {
    check_params(ps, {"blocks", "hops", "copies", "inner-n"});
    return make_ana_dj((int)need_param(ps, "blocks"), (int)need_param(ps, "hops"),
                       (int)need_param(ps, "copies"), (int)need_param(ps, "inner-n"));
  });
  BooleanFunction::register_generator("ana-for", [](const GenParams& ps) {
    check_params(ps, {"blocks", "hops", "copies", "inner-n"});
    return make_ana_for((int)need_param(ps, "blocks"), (int)need_param(ps, "hops"),
                        (int)need_param(ps, "copies"), (int)need_param(ps, "inner-n"));
  });
}

}  // namespace qpar
