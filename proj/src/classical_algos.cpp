#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "qpar/classical.hpp"
#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"

namespace qpar {

namespace {

// labels known so far, keyed by cell; -1 = unknown
std::vector<int> known_labels(const Transcript& t, int blocks, int w) {
  std::vector<int> val(blocks * w, 0);
  std::vector<char> known(blocks * w, 0);
  for (auto& r : t.rounds)
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
      known[r.indices[i]] = 1;
      val[r.indices[i]] = r.answers[i];
    }
  std::vector<int> label(blocks, -1);
  for (int c = 0; c < blocks; ++c) {
    bool whole = true;
    int v = 0;
    for (int b = 0; b < w; ++b) {
      if (!known[c * w + b]) whole = false;
      v |= val[c * w + b] << b;
    }
    if (whole) label[c] = v;
  }
  return label;
}

std::vector<int> block_bits_of(int cell, int w) {
  std::vector<int> q;
  for (int b = 0; b < w; ++b) q.push_back(cell * w + b);
  return q;
}

}  // namespace

int revealed_chain_length(const std::vector<int>& cell_labels, int blocks) {
  int v = 0, len = 0;
  while (len <= blocks && v >= 0 && v < blocks && cell_labels[v] >= 0) {
    v = cell_labels[v];
    ++len;
  }
  return len;
}

QueryStrategy pointer_det_algorithm(int blocks, int hops, int p) {
  int w = ceil_log2((std::uint64_t)blocks);
  if (p < 1 || p > blocks) throw ArityMismatch("parallelism out of range");
  bool chain = hops <= (int)ceil_div(blocks, p);
  QueryStrategy s;
  s.parallelism = p * w;
  s.name = chain ? "pointer-chain" : "pointer-read-all";
  s.next = [blocks, hops, p, w, chain](const Transcript& t) {
    auto label = known_labels(t, blocks, w);
    if (chain) {
      int v = 0, steps = 0;
      while (steps < hops && label[v] >= 0) {
        v = label[v];
        ++steps;
      }
      if (steps == hops) return StrategyStep::decide(v & 1);
      return StrategyStep::ask(block_bits_of(v, w));
    }
    int have = 0;
    while (have < blocks && label[have] >= 0) ++have;
    if (have < blocks) {
      std::vector<int> q;
      for (int c = have; c < blocks && (int)q.size() < p * w; ++c) {
        auto bb = block_bits_of(c, w);
        q.insert(q.end(), bb.begin(), bb.end());
      }
      return StrategyStep::ask(std::move(q));
    }
    int v = 0;
    for (int h = 0; h < hops; ++h) v = label[v];
    return StrategyStep::decide(v & 1);
  };
  return s;
}

AdaptiveAnswerer pointer_adversary(int blocks, int hops, int p, int round_budget) {
  int w = ceil_log2((std::uint64_t)blocks);
  struct State {
    int blocks, hops, w, p, budget, rounds = 0;
    std::vector<int> label;
    std::vector<char> queried, targeted;
  };
  auto st = std::make_shared<State>();
  st->blocks = blocks;
  st->hops = hops;
  st->w = w;
  st->p = p;
  st->budget = round_budget;
  st->label.assign(blocks, -1);
  st->queried.assign(blocks, 0);
  st->targeted.assign(blocks, 0);

  auto fresh = [](const State& s, const std::vector<char>& extra_tgt) -> int {
    for (int c = 1; c < s.blocks; ++c)
      if (!s.queried[c] && !s.targeted[c] && !extra_tgt[c] && s.label[c] < 0) return c;
    return -1;
  };

  AdaptiveAnswerer a;
  a.name = "pointer-fresh-cell";
  a.answer = [st, fresh](const std::vector<int>& idx) {
    State& s = *st;
    if (++s.rounds > s.budget) throw BudgetExceeded("pointer adversary round budget spent");
    std::set<int> cells;
    for (int i : idx) cells.insert(i / s.w);
    std::vector<char> none(s.blocks, 0);
    for (int c : cells) {
      s.queried[c] = 1;
      if (s.label[c] < 0) {
        int t = fresh(s, none);
        if (t < 0) throw BudgetExceeded("pointer adversary ran out of fresh cells");
        s.label[c] = t;
        s.targeted[t] = 1;
      }
    }
    std::vector<int> ans(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      ans[i] = (s.label[idx[i] / s.w] >> (idx[i] % s.w)) & 1;
    return ans;
  };
  a.complete = [st, fresh](int value) -> std::optional<Bits> {
    const State& s = *st;
    std::vector<int> label = s.label;
    std::vector<char> extra(s.blocks, 0);
    int v = 0;
    for (int step = 0; step < s.hops; ++step) {
      if (label[v] >= 0) {
        v = label[v];
        continue;
      }
      if (step == s.hops - 1) {
        int t = value < 0 ? 0 : value;  // only the low bit of the last label matters
        label[v] = t;
        v = t;
        break;
      }
      int t = fresh(s, extra);
      if (t < 0) return std::nullopt;
      label[v] = t;
      extra[t] = 1;
      v = t;
    }
    if (value >= 0 && (v & 1) != value) return std::nullopt;  // chain already pinned
    Bits x(s.blocks * s.w);
    for (int c = 0; c < s.blocks; ++c) {
      if (label[c] < 0) continue;
      for (int b = 0; b < s.w; ++b) x.set(c * s.w + b, (label[c] >> b) & 1);
    }
    return x;
  };
  return a;
}

AdaptiveAnswerer balancing_adversary(const BooleanFunction& f, int round_budget) {
  struct State {
    BooleanFunction f;
    int budget, rounds = 0;
    PartialInput pa;
  };
  auto st = std::make_shared<State>();
  st->f = f;
  st->budget = round_budget;
  st->pa = {Bits(f.arity()), Bits(f.arity())};

  AdaptiveAnswerer a;
  a.name = "balancing";
  a.answer = [st](const std::vector<int>& idx) {
    State& s = *st;
    if (++s.rounds > s.budget) throw BudgetExceeded("balancing adversary round budget spent");
    std::vector<int> fresh;
    for (int i : idx)
      if (!s.pa.mask.get(i)) fresh.push_back(i);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    if (fresh.size() > 16) throw TooLarge("balancing adversary answers at most 16 fresh bits");
    int best_score = -1;
    std::uint64_t best = 0;
    for (std::uint64_t v = 0; v < (std::uint64_t(1) << fresh.size()); ++v) {
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        s.pa.mask.set(fresh[i], 1);
        s.pa.value.set(fresh[i], int(v >> i & 1));
      }
      CubeValues cv = s.f.cube_values(s.pa);
      int score = (cv.sees0 && cv.sees1) ? 2 : (cv.sees0 || cv.sees1) ? 1 : 0;
      for (int i : fresh) s.pa.mask.set(i, 0);
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      s.pa.mask.set(fresh[i], 1);
      s.pa.value.set(fresh[i], int(best >> i & 1));
    }
    std::vector<int> ans(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ans[i] = s.pa.value.get(idx[i]);
    return ans;
  };
  a.complete = [st](int value) -> std::optional<Bits> {
    State& s = *st;
    std::vector<int> free;
    for (int i = 0; i < s.f.arity(); ++i)
      if (!s.pa.mask.get(i)) free.push_back(i);
    if (free.size() > 22) throw TooLarge("completion search capped at 2^22");
    Bits x = s.pa.value;
    for (int i : free) x.set(i, 0);
    for (std::uint64_t v = 0; v < (std::uint64_t(1) << free.size()); ++v) {
      for (std::size_t i = 0; i < free.size(); ++i) x.set(free[i], int(v >> i & 1));
      if (!s.f.in_domain(x)) continue;
      if (value < 0 || s.f.evaluate(x) == value) return x;
    }
    return std::nullopt;
  };
  return a;
}

AdaptiveAnswerer cor_det_adversary(const BooleanFunction& f, const BooleanFunction& g,
                                   AdaptiveAnswerer f_adv, AdaptiveAnswerer g_adv,
                                   int round_budget) {
  struct State {
    int nf, budget, rounds = 0;
    AdaptiveAnswerer fa, ga;
  };
  auto st = std::make_shared<State>();
  st->nf = f.arity();
  st->budget = round_budget;
  st->fa = std::move(f_adv);
  st->ga = std::move(g_adv);
  (void)g;

  AdaptiveAnswerer a;
  a.name = "cor-split";
  a.answer = [st](const std::vector<int>& idx) {
    State& s = *st;
    if (++s.rounds > s.budget) throw BudgetExceeded("cor adversary round budget spent");
    std::vector<int> fq, gq, fpos, gpos;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < s.nf) {
        fq.push_back(idx[i]);
        fpos.push_back((int)i);
      } else {
        gq.push_back(idx[i] - s.nf);
        gpos.push_back((int)i);
      }
    }
    std::vector<int> ans(idx.size(), 0);
    if (!fq.empty()) {
      auto fa = s.fa.answer(fq);
      for (std::size_t i = 0; i < fq.size(); ++i) ans[fpos[i]] = fa[i];
    }
    if (!gq.empty()) {
      auto ga = s.ga.answer(gq);
      for (std::size_t i = 0; i < gq.size(); ++i) ans[gpos[i]] = ga[i];
    }
    return ans;
  };
  a.complete = [st](int value) -> std::optional<Bits> {
    State& s = *st;
    auto fx = s.fa.complete(value);
    auto gy = s.ga.complete(value);
    if (!fx || !gy) return std::nullopt;
    Bits z(fx->n + gy->n);
    z.set_range(0, *fx);
    z.set_range(fx->n, *gy);
    return z;
  };
  return a;
}

AdaptiveAnswerer cheatsheet_det_adversary(const BooleanFunction& f_inner,
                                          const CheatSheetLayout& layout, int round_budget) {
  struct State {
    BooleanFunction fp;
    CheatSheetLayout lay;
    int budget, rounds = 0;
    std::vector<AdaptiveAnswerer> inner;
    std::map<int, int> cell_answers;  // global position -> answered value (always 0)
  };
  auto st = std::make_shared<State>();
  st->fp = f_inner;
  st->lay = layout;
  st->budget = round_budget;
  for (int i = 0; i < layout.copies; ++i)
    st->inner.push_back(balancing_adversary(f_inner, 1 << 20));

  AdaptiveAnswerer a;
  a.name = "cheatsheet-zero-cells";
  a.answer = [st](const std::vector<int>& idx) {
    State& s = *st;
    if (++s.rounds > s.budget) throw BudgetExceeded("cheat-sheet adversary round budget spent");
    int addr = s.lay.copies * s.lay.inner_arity;
    std::vector<std::vector<int>> per_copy(s.lay.copies), per_pos(s.lay.copies);
    std::vector<int> ans(idx.size(), 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < addr) {
        per_copy[idx[i] / s.lay.inner_arity].push_back(idx[i] % s.lay.inner_arity);
        per_pos[idx[i] / s.lay.inner_arity].push_back((int)i);
      } else {
        s.cell_answers[idx[i]] = 0;
      }
    }
    for (int c = 0; c < s.lay.copies; ++c) {
      if (per_copy[c].empty()) continue;
      auto sub = s.inner[c].answer(per_copy[c]);
      for (std::size_t i = 0; i < sub.size(); ++i) ans[per_pos[c][i]] = sub[i];
    }
    return ans;
  };
  a.complete = [st](int value) -> std::optional<Bits> {
    State& s = *st;
    auto fmt = CertificateFormat::for_arity(s.lay.inner_arity);
    if (value <= 0) {
      Bits z(s.lay.arity());
      for (int i = 0; i < s.lay.copies; ++i) {
        auto xi = s.inner[i].complete(-1);
        if (!xi) return std::nullopt;
        z.set_range(s.lay.copy_offset(i), *xi);
      }
      return z;  // all cells zero, consistent with every 0 answered
    }
    if (s.lay.inner_arity > 16) throw TooLarge("certificate search capped at 16 inner bits");
    for (int l = 0; l < s.lay.cells(); ++l) {
      std::vector<Bits> copies;
      bool ok = true;
      for (int i = 0; i < s.lay.copies && ok; ++i) {
        auto xi = s.inner[i].complete((l >> i) & 1);
        if (!xi)
          ok = false;
        else
          copies.push_back(*xi);
      }
      if (!ok) continue;
      int base = s.lay.cell_offset(l);
      std::vector<std::pair<int, int>> pinned;  // (bit inside cell l, answered value)
      for (auto& [pos, val] : s.cell_answers)
        if (pos >= base && pos < base + s.lay.cell_size) pinned.push_back({pos - base, val});
      // candidate certificates per copy: forcing subsets of its completion,
      // sparsest first so the encoding stays consistent with the answered zeros
      std::vector<std::vector<Certificate>> cand(s.lay.copies);
      for (int i = 0; i < s.lay.copies; ++i) {
        std::vector<std::uint32_t> subsets;
        for (std::uint32_t m = 1; m < (1u << s.lay.inner_arity); ++m) subsets.push_back(m);
        std::sort(subsets.begin(), subsets.end(), [](std::uint32_t a, std::uint32_t b) {
          int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
          return pa != pb ? pa < pb : a < b;
        });
        for (std::uint32_t m : subsets) {
          Certificate cert;
          for (int b = 0; b < s.lay.inner_arity; ++b)
            if (m >> b & 1) cert.entries.push_back({b, copies[i].get(b)});
          if (certificate_forces(s.fp, cert, (l >> i) & 1)) cand[i].push_back(cert);
          if (cand[i].size() >= 64) break;  // plenty of shapes to thread past the pins
        }
        if (cand[i].empty()) ok = false;
      }
      if (!ok) continue;
      std::vector<Certificate> chosen(s.lay.copies);
      std::optional<Bits> found;
      auto search = [&](auto&& self, int depth) -> bool {
        if (depth == s.lay.copies) {
          Bits cell = encode_certificates(chosen, fmt, s.lay.cell_size);
          for (auto& [b, v] : pinned)
            if (cell.get(b) != v) return false;
          Bits z(s.lay.arity());
          for (int i = 0; i < s.lay.copies; ++i) z.set_range(s.lay.copy_offset(i), copies[i]);
          z.set_range(base, cell);
          found = z;
          return true;
        }
        for (const Certificate& c : cand[depth]) {
          chosen[depth] = c;
          if (self(self, depth + 1)) return true;
        }
        return false;
      };
      if (search(search, 0)) return found;
    }
    return std::nullopt;
  };
  return a;
}

// ---- cheat-sheet decision strategy ----

QueryStrategy cheatsheet_parallel_algorithm(AlgModel model, const BooleanFunction& f_base,
                                            int ao_blocks, int ao_block_size, int c,
                                            int cell_size, int p, int samples,
                                            std::uint64_t seed) {
  int n_f = f_base.arity();
  int ao_arity = ao_blocks * ao_block_size;
  CheatSheetLayout lay = canonical_cheatsheet_layout(n_f, ao_blocks, ao_block_size, c, cell_size);
  BooleanFunction ao = make_and_or(ao_blocks, ao_block_size);
  BooleanFunction fp = compose(f_base, std::vector<BooleanFunction>(n_f, ao));
  CertChecker checker = default_cert_checker(fp, lay);
  int addr = lay.copies * lay.inner_arity;
  if (p < lay.cell_size) throw ParallelismTooSmall("one round must cover a whole cell");
  if (model == AlgModel::rand && p < addr)
    throw ParallelismTooSmall("verification round must cover the certified positions");
  if (samples < 1) throw ArityMismatch("need at least one probe per block");

  // fixed probe plan: rows sampled per (copy, f input); only used by rand
  std::vector<std::vector<std::vector<int>>> probe(c);
  Rng rng = rng_stream(seed, 0xc5a1);
  for (int i = 0; i < c; ++i) {
    probe[i].resize(n_f);
    for (int b = 0; b < n_f; ++b)
      for (int s = 0; s < samples; ++s)
        probe[i][b].push_back((int)rng_below(rng, (std::uint64_t)ao_blocks));
  }

  QueryStrategy s;
  s.parallelism = p;
  s.name = model == AlgModel::det ? "cheatsheet-det" : "cheatsheet-rand";
  s.next = [=](const Transcript& t) -> StrategyStep {
    std::vector<int> val(lay.arity(), 0);
    std::vector<char> known(lay.arity(), 0);
    for (auto& r : t.rounds)
      for (std::size_t i = 0; i < r.indices.size(); ++i) {
        known[r.indices[i]] = 1;
        val[r.indices[i]] = r.answers[i];
      }
    int phase1_rounds;
    std::vector<int> phase1;  // address bits still to read in phase 1
    if (model == AlgModel::det) {
      for (int i = 0; i < addr; ++i) phase1.push_back(i);
      phase1_rounds = (int)ceil_div(addr, p);
    } else {
      std::set<int> want;
      for (int i = 0; i < c; ++i)
        for (int b = 0; b < n_f; ++b)
          for (int row : probe[i][b])
            for (int k = 0; k < ao_block_size; ++k)
              want.insert(lay.copy_offset(i) + b * ao_arity + row * ao_block_size + k);
      phase1.assign(want.begin(), want.end());
      phase1_rounds = 1;
    }
    int r = t.round_count();
    if (r < phase1_rounds) {
      std::vector<int> q;
      for (std::size_t i = std::size_t(r) * p; i < phase1.size() && (int)q.size() < p; ++i)
        q.push_back(phase1[i]);
      return StrategyStep::ask(std::move(q));
    }
    // cell index from what phase 1 read
    Bits ell(c);
    for (int i = 0; i < c; ++i) {
      if (model == AlgModel::det) {
        Bits xi(lay.inner_arity);
        for (int b = 0; b < lay.inner_arity; ++b) xi.set(b, val[lay.copy_offset(i) + b]);
        if (!fp.in_domain(xi)) return StrategyStep::decide(0);
        ell.set(i, fp.evaluate(xi));
      } else {
        Bits est(n_f);
        for (int b = 0; b < n_f; ++b) {
          int guess = 1;
          for (int row : probe[i][b]) {
            int any = 0;
            for (int k = 0; k < ao_block_size; ++k)
              any |= val[lay.copy_offset(i) + b * ao_arity + row * ao_block_size + k];
            if (!any) guess = 0;
          }
          est.set(b, guess);
        }
        if (!f_base.in_domain(est)) return StrategyStep::decide(0);
        ell.set(i, f_base.evaluate(est));
      }
    }
    int cell_base = lay.cell_offset((int)ell.index());
    if (r == phase1_rounds) {
      std::vector<int> q;
      for (int b = 0; b < lay.cell_size; ++b) q.push_back(cell_base + b);
      return StrategyStep::ask(std::move(q));
    }
    Bits cell(lay.cell_size);
    for (int b = 0; b < lay.cell_size; ++b) cell.set(b, val[cell_base + b]);
    auto fmt = CertificateFormat::for_arity(lay.inner_arity);
    auto certs = cell.popcount() == 0
                     ? std::nullopt
                     : decode_certificates(cell, fmt, lay.copies, lay.inner_arity);
    if (r == phase1_rounds + 1) {
      std::vector<int> q;
      if (certs) {
        std::set<int> want;
        for (int i = 0; i < lay.copies; ++i)
          for (auto& [bit, v] : (*certs)[i].entries) want.insert(lay.copy_offset(i) + bit);
        for (int pos : want)
          if (!known[pos]) q.push_back(pos);
      }
      return StrategyStep::ask(std::move(q));  // may be empty; the round keeps the shape
    }
    if (!certs) return StrategyStep::decide(0);
    std::vector<Bits> copies;
    for (int i = 0; i < lay.copies; ++i) {
      Bits xi(lay.inner_arity);
      for (int b = 0; b < lay.inner_arity; ++b) xi.set(b, val[lay.copy_offset(i) + b]);
      copies.push_back(xi);
    }
    return StrategyStep::decide(checker(cell, copies, ell) ? 1 : 0);
  };
  return s;
}

// ---- two-round strategy for the two-adaptive lift ----

QueryStrategy two_adaptive_rand_algorithm(const BooleanFunction& f,
                                          const TwoAdaptiveLayout& layout, int repetitions,
                                          std::uint64_t seed) {
  if (repetitions < 1) throw ArityMismatch("need at least one probe per segment");
  std::vector<std::vector<int>> pick(layout.segments);
  Rng rng = rng_stream(seed, 0x7ada);
  for (int i = 0; i < layout.segments; ++i)
    for (int r = 0; r < repetitions; ++r)
      pick[i].push_back((int)rng_below(rng, (std::uint64_t)layout.n));

  QueryStrategy s;
  int round1 = layout.bc_size() + layout.segments * repetitions * layout.n * layout.n;
  int round2 = layout.segments * layout.n * 2 * layout.n + 1;
  s.parallelism = std::max(round1, round2);
  s.name = "two-adaptive-rand";
  s.next = [f, layout, pick](const Transcript& t) -> StrategyStep {
    int n = layout.n;
    std::vector<int> val(layout.arity(), 0);
    std::vector<char> known(layout.arity(), 0);
    for (auto& r : t.rounds)
      for (std::size_t i = 0; i < r.indices.size(); ++i) {
        known[r.indices[i]] = 1;
        val[r.indices[i]] = r.answers[i];
      }
    if (t.round_count() == 0) {
      std::set<int> q;
      for (int b = layout.add_size(); b < layout.add_size() + layout.bc_size(); ++b) q.insert(b);
      for (int i = 0; i < layout.segments; ++i)
        for (int j : pick[i])
          for (int b = 0; b < n * n; ++b) q.insert(layout.add_offset(i, j) + b);
      return StrategyStep::ask(std::vector<int>(q.begin(), q.end()));
    }
    // decode every bicertificate from round 1
    std::vector<std::vector<std::optional<Bicertificate>>> bc(layout.segments);
    bool all_valid = true;
    for (int i = 0; i < layout.segments; ++i) {
      bc[i].resize(n);
      for (int j = 0; j < n; ++j) {
        Bits cell(layout.bc_cell());
        for (int b = 0; b < layout.bc_cell(); ++b) cell.set(b, val[layout.bc_offset(i, j) + b]);
        bc[i][j] = decode_bicertificate(cell, layout);
        if (!bc[i][j]) all_valid = false;
      }
    }
    Bits tg_hat(layout.segments);
    if (all_valid)
      for (int i = 0; i < layout.segments; ++i) {
        int est = 0;
        for (int j : pick[i])
          est |= val[layout.add_offset(i, j) + bc[i][j]->intersection()];
        tg_hat.set(i, est);
      }
    if (t.round_count() == 1) {
      if (!all_valid) return StrategyStep::ask({});  // settled, keep the two-round shape
      std::set<int> q;
      for (int i = 0; i < layout.segments; ++i)
        for (int j = 0; j < n; ++j) {
          for (int b = 0; b < n; ++b) {
            q.insert(layout.add_offset(i, j, bc[i][j]->zero_block) + b);
            q.insert(layout.add_offset(i, j) + bc[i][j]->one_part[b]);
          }
        }
      q.insert(layout.dt_offset() + (int)tg_hat.index());
      std::vector<int> out;
      for (int pos : q)
        if (!known[pos]) out.push_back(pos);
      return StrategyStep::ask(std::move(out));
    }
    if (!all_valid) return StrategyStep::decide(0);
    Bits tg(layout.segments);
    for (int i = 0; i < layout.segments; ++i) {
      Bits in(n);
      for (int j = 0; j < n; ++j) {
        bool zero_ok = true, one_ok = true;
        for (int b = 0; b < n; ++b) {
          if (val[layout.add_offset(i, j, bc[i][j]->zero_block) + b]) zero_ok = false;
          if (!val[layout.add_offset(i, j) + bc[i][j]->one_part[b]]) one_ok = false;
        }
        if (zero_ok == one_ok) return StrategyStep::decide(0);  // neither half certifies
        in.set(j, one_ok);
      }
      if (!f.in_domain(in)) return StrategyStep::decide(0);
      tg.set(i, f.evaluate(in));
    }
    if (tg != tg_hat) return StrategyStep::decide(0);  // probed the wrong data bit
    return StrategyStep::decide(val[layout.dt_offset() + (int)tg.index()]);
  };
  return s;
}

QueryStrategy compose_parallel_strategy(const QueryStrategy& outer, const BooleanFunction& inner,
                                        int copies, int p) {
  int m = inner.arity();
  if (outer.parallelism > copies) throw ArityMismatch("outer strategy too wide");
  QueryStrategy s;
  s.parallelism = p;
  s.name = "composed:" + outer.name;
  s.next = [outer, inner, m, p](const Transcript& t) -> StrategyStep {
    Transcript outer_t;
    int r = 0;
    while (true) {
      StrategyStep step = outer.next(outer_t);
      if (step.answer) return StrategyStep::decide(*step.answer);
      std::vector<int> positions;
      for (int ci : step.query)
        for (int b = 0; b < m; ++b) positions.push_back(ci * m + b);
      int chunks = (int)ceil_div(positions.size(), p);
      if (r + chunks > t.round_count()) {
        int done = t.round_count() - r;
        std::vector<int> q;
        for (std::size_t i = std::size_t(done) * p; i < positions.size() && (int)q.size() < p;
             ++i)
          q.push_back(positions[i]);
        return StrategyStep::ask(std::move(q));
      }
      std::vector<int> val(positions.size(), 0);
      std::map<int, int> got;
      for (int k = 0; k < chunks; ++k)
        for (std::size_t i = 0; i < t.rounds[r + k].indices.size(); ++i)
          got[t.rounds[r + k].indices[i]] = t.rounds[r + k].answers[i];
      TranscriptRound oround;
      oround.indices = step.query;
      for (int ci : step.query) {
        Bits xi(m);
        for (int b = 0; b < m; ++b) xi.set(b, got[ci * m + b]);
        oround.answers.push_back(inner.in_domain(xi) ? inner.evaluate(xi) : 0);
      }
      outer_t.rounds.push_back(std::move(oround));
      r += chunks;
    }
  };
  return s;
}

// ---- reduction machinery ----

Bits build_ksum_lift(const Bits& x, int sub_blocks, int k, int block_bits, int modulus,
                     std::uint64_t seed) {
  if (k < 1 || sub_blocks < k + 1) throw ConstructionFailed("need at least k+1 sub-blocks");
  if (modulus <= k) throw ConstructionFailed("lift needs modulus > k");
  if (modulus > (std::int64_t(1) << block_bits))
    throw ConstructionFailed("modulus exceeds the block range");
  Rng rng = rng_stream(seed, 0x5e1f);
  Bits y((std::int64_t)x.n * sub_blocks * block_bits);
  for (int i = 0; i < x.n; ++i) {
    int special = k - 1 + (int)rng_below(rng, (std::uint64_t)(sub_blocks - (k - 1)));
    for (int j = 0; j < sub_blocks; ++j) {
      std::uint64_t v;
      if (j < k - 1)
        v = 0;
      else if (j == special)
        v = x.get(i) ? 0 : 1;
      else
        v = 1;
      y.set_slice((i * sub_blocks + j) * block_bits, block_bits, v);
    }
  }
  return y;
}

int star_query_count(const std::vector<int>& queries, int n_blocks, int m, std::uint64_t seed) {
  Rng rng = rng_stream(seed, 0x57a7);
  std::vector<int> star(n_blocks);
  for (int b = 0; b < n_blocks; ++b) star[b] = b * m + (int)rng_below(rng, (std::uint64_t)m);
  std::set<int> hit;
  for (int q : queries) {
    if (q < 0 || q >= n_blocks * m) throw IndexOutOfRange("query outside the string");
    if (star[q / m] == q) hit.insert(q);
  }
  return (int)hit.size();
}

StarStats star_hit_stats(const std::vector<int>& queries, int n_blocks, int m, double threshold,
                         int trials, std::uint64_t seed) {
  StarStats st;
  for (int t = 0; t < trials; ++t) {
    int c = star_query_count(queries, n_blocks, m, seed + std::uint64_t(t));
    st.mean += c;
    if (c > threshold) st.exceed_prob += 1;
  }
  st.mean /= trials;
  st.exceed_prob /= trials;
  return st;
}

// ---- hard distribution and its exact two-round optimum ----

namespace {

std::vector<std::vector<Bits>> fibers(const BooleanFunction& f) {
  if (f.arity() > 16) throw TooLarge("fiber enumeration capped at 16 bits");
  std::vector<std::vector<Bits>> fib(2);
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << f.arity()); ++i) {
    Bits x = Bits::from_index(f.arity(), i);
    if (!f.in_domain(x)) continue;
    fib[f.evaluate(x)].push_back(x);
  }
  if (fib[0].empty() || fib[1].empty())
    throw ConstructionFailed("hard distribution needs both output values attainable");
  return fib;
}

}  // namespace

Bits sample_two_adaptive_hard(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                              Rng& rng) {
  auto fib = fibers(f);
  std::vector<Bits> vals;
  for (int i = 0; i < layout.segments; ++i) {
    int tg = (int)rng_below(rng, 2);
    vals.push_back(fib[tg][rng_below(rng, fib[tg].size())]);
  }
  Bits dt(layout.dt_size());
  for (int b = 0; b < layout.dt_size(); ++b) dt.set(b, (int)rng_below(rng, 2));
  return build_two_adaptive_instance(f, layout, vals, dt, rng());
}

namespace {

struct HardModel {
  const BooleanFunction& f;
  const TwoAdaptiveLayout& lay;
  std::vector<std::vector<Bits>> fib;

  // P[observed segment bits AND TG_i = tg] for observations local to segment i
  double seg_weight(int i, int tg, const std::vector<std::pair<int, int>>& obs) const {
    int n = lay.n;
    // group observations by sub-segment; bits outside segment i are a bug
    std::vector<std::vector<std::pair<int, int>>> add(n), bcb(n);
    for (auto& [pos, v] : obs) {
      if (pos < lay.add_size()) {
        int j = (pos - lay.add_offset(i, 0)) / (n * n);
        add[j].push_back({pos - lay.add_offset(i, j), v});
      } else {
        int j = (pos - lay.bc_offset(i, 0)) / lay.bc_cell();
        bcb[j].push_back({pos - lay.bc_offset(i, j), v});
      }
    }
    double bc_combos = double(n);
    for (int b = 0; b < n; ++b) bc_combos *= n;
    double total = 0;
    for (const Bits& x : fib[tg]) {
      double prod = 1;
      for (int j = 0; j < n && prod > 0; ++j) {
        if (add[j].empty() && bcb[j].empty()) continue;
        // sum over this sub-segment's bicertificates
        int match = 0;
        Bicertificate bc;
        bc.one_part.resize(n);
        for (int zb = 0; zb < n; ++zb) {
          bc.zero_block = zb;
          std::vector<int> op(n, 0);
          while (true) {
            for (int b = 0; b < n; ++b) bc.one_part[b] = b * n + op[b];
            bool ok = true;
            for (auto& [loc, v] : add[j]) {
              int forced = 0;
              for (int b = 0; b < n && !forced; ++b)
                if (bc.one_part[b] == loc) forced = 1;
              if (forced && loc == bc.intersection()) forced = x.get(j);
              if (forced != v) {
                ok = false;
                break;
              }
            }
            if (ok && !bcb[j].empty()) {
              Bits enc = encode_bicertificate(bc, lay);
              for (auto& [loc, v] : bcb[j])
                if (enc.get(loc) != v) {
                  ok = false;
                  break;
                }
            }
            if (ok) ++match;
            int b = n - 1;
            while (b >= 0 && op[b] == n - 1) op[b--] = 0;
            if (b < 0) break;
            ++op[b];
          }
        }
        prod *= match / bc_combos;
      }
      total += prod;
    }
    return 0.5 * total / double(fib[tg].size());
  }

  // {P[obs], P[f=1 and obs]} for up to a handful of position observations
  std::pair<double, double> joint(std::vector<std::pair<int, int>> obs) const {
    std::sort(obs.begin(), obs.end());
    for (std::size_t i = 1; i < obs.size(); ++i)
      if (obs[i].first == obs[i - 1].first) {
        if (obs[i].second != obs[i - 1].second) return {0, 0};
        obs.erase(obs.begin() + i--);
      }
    int s = lay.segments;
    std::vector<std::vector<std::pair<int, int>>> seg(s);
    std::vector<std::pair<int, int>> dt;
    for (auto& [pos, v] : obs) {
      if (pos >= lay.dt_offset())
        dt.push_back({pos - lay.dt_offset(), v});
      else if (pos < lay.add_size())
        seg[pos / (lay.n * lay.n * lay.n)].push_back({pos, v});
      else
        seg[(pos - lay.add_size()) / (lay.n * lay.bc_cell())].push_back({pos, v});
    }
    std::vector<double> w0(s, 0.5), w1(s, 0.5);
    for (int i = 0; i < s; ++i) {
      if (seg[i].empty()) continue;
      w0[i] = seg_weight(i, 0, seg[i]);
      w1[i] = seg_weight(i, 1, seg[i]);
    }
    double all = 1;
    for (int i = 0; i < s; ++i) all *= w0[i] + w1[i];
    double dtfac = 1;
    for (std::size_t i = 0; i < dt.size(); ++i) dtfac *= 0.5;
    double p1 = 0.5 * all;
    for (auto& [a, v] : dt) {
      double prod = 1;
      for (int i = 0; i < s; ++i) prod *= (a >> i & 1) ? w1[i] : w0[i];
      p1 += prod * (v - 0.5);
    }
    return {all * dtfac, p1 * dtfac};
  }
};

}  // namespace

double two_adaptive_two_round_optimum(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                                      int p) {
  if (p != 1) throw TooLarge("exact two-round optimum implemented for single queries only");
  HardModel model{f, layout, fibers(f)};
  int arity = layout.arity();
  double best = 0;
  for (int q1 = 0; q1 < arity; ++q1) {
    double v1 = 0;
    for (int a1 = 0; a1 < 2; ++a1) {
      double inner_best = 0;
      for (int q2 = 0; q2 < arity; ++q2) {
        double v2 = 0;
        for (int a2 = 0; a2 < 2; ++a2) {
          auto [pobs, p1] = model.joint({{q1, a1}, {q2, a2}});
          v2 += std::max(p1, pobs - p1);
        }
        inner_best = std::max(inner_best, v2);
      }
      v1 += inner_best;
    }
    best = std::max(best, v1);
  }
  return best;
}

}  // namespace qpar
