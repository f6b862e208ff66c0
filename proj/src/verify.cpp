#include "qpar/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "qpar/adversary.hpp"
#include "qpar/boolfn.hpp"
#include "qpar/cheatsheet.hpp"
#include "qpar/classical.hpp"
#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"
#include "qpar/measures.hpp"
#include "qpar/quantum.hpp"
#include "qpar/rng.hpp"
#include "qpar/spectral.hpp"
#include "qpar/two_adaptive.hpp"

namespace qpar {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* pattern, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, ap);
  va_end(ap);
  return buf;
}

// Deterministic work distribution: case i only ever depends on (seed, i),
// so thread count and scheduling cannot change any record.
void parallel_cases(int count, int threads, const std::function<void(int)>& body) {
  int t = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  t = std::min(t, count);
  if (t <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

void sort_cases(VerifyReport& r) {
  std::sort(r.cases.begin(), r.cases.end(),
            [](const VerifyCase& a, const VerifyCase& b) { return a.key < b.key; });
}

VerifyCase fail_case(std::string key, const std::exception& e) {
  VerifyCase c;
  c.key = std::move(key);
  c.pass = false;
  c.note = std::string("exception: ") + e.what();
  return c;
}

Bits random_bits(int n, Rng& rng) {
  Bits b(n);
  for (int i = 0; i < n; ++i) b.set(i, rng_bool(rng));
  return b;
}

BooleanFunction random_nonconstant(int n, std::uint64_t seed, std::uint64_t tag) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = rng_stream(seed, tag + (attempt << 40));
    std::vector<int> out(std::uint64_t(1) << n);
    for (auto& b : out) b = int(rng() & 1);
    bool all0 = true, all1 = true;
    for (int b : out) (b ? all0 : all1) = false;
    if (!all0 && !all1) return BooleanFunction::total_from_bits(n, out);
  }
}

std::vector<Bits> domain_inputs(const BooleanFunction& f) {
  std::vector<Bits> out;
  for (std::uint64_t i = 0; i < (std::uint64_t(1) << f.arity()); ++i)
    if (f.in_domain_index(i)) out.push_back(Bits::from_index(f.arity(), i));
  return out;
}

struct NamedFn {
  std::string name;
  BooleanFunction f;
};

// ---- spectral-witness: ratio at p = 1 equals the spectral sensitivity ----

std::vector<NamedFn> witness_corpus(int max_arity, std::uint64_t seed, int randoms) {
  std::vector<NamedFn> fns;
  for (int n = 2; n <= std::min(10, max_arity); ++n) {
    fns.push_back({fmt("and n=%02d", n), make_and(n)});
    fns.push_back({fmt("or n=%02d", n), make_or(n)});
    fns.push_back({fmt("parity n=%02d", n), make_parity(n)});
  }
  for (int n : {3, 5, 7, 9})
    if (n <= max_arity) fns.push_back({fmt("majority n=%02d", n), make_majority(n)});
  for (auto [b, s] : {std::pair{2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}, {3, 3}, {2, 5}, {5, 2}})
    if (b * s <= max_arity) fns.push_back({fmt("and-or %dx%d", b, s), make_and_or(b, s)});
  for (int i = 0; i < randoms; ++i) {
    int n = 3 + i % std::max(1, std::min(8, max_arity - 2));
    fns.push_back({fmt("random i=%02d n=%02d", i, n), random_nonconstant(n, seed, 0x5bec + i)});
  }
  return fns;
}

VerifyReport suite_spectral_witness(const VerifyOptions& opt) {
  VerifyReport rep{"spectral-witness", opt.seed, {}};
  auto fns = witness_corpus(opt.max_arity.value_or(10), opt.seed, 50);
  rep.cases.resize(fns.size());
  parallel_cases(int(fns.size()), opt.threads, [&](int i) {
    VerifyCase c;
    c.key = fns[i].name;
    try {
      const BooleanFunction& f = fns[i].f;
      RatioResult r = parallel_adv_ratio(adjacency_adversary(f), 1);
      double lambda = spectral_sensitivity(f);
      c.params = {{"fn", fns[i].name}, {"arity", f.arity()}, {"p", 1}};
      c.bound = lambda;
      c.measured = r.ratio;
      c.pass = !r.sampled && std::abs(r.ratio - lambda) <= 1e-9;
      c.note = "ratio == lambda within 1e-9";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[i] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- block-diag: Gamma_S splits into 2^(N-p) restriction adversaries ----

AdversaryMatrix random_nn_adversary(int n, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    BooleanFunction f = random_nonconstant(n, seed, 0xb10c + (attempt << 32));
    Rng rng = rng_stream(seed, 0xedce + (attempt << 32));
    SparseSym g(std::uint64_t(1) << n);
    for (std::uint64_t x = 0; x < (std::uint64_t(1) << n); ++x)
      for (int b = 0; b < n; ++b) {
        std::uint64_t y = x ^ (std::uint64_t(1) << b);
        if (y < x || f.evaluate_index(x) == f.evaluate_index(y)) continue;
        g.add(x, y, 0.25 + rng_double(rng));
      }
    if (!g.entries.empty()) return make_adversary(f, std::move(g));
  }
}

VerifyReport suite_block_diag(const VerifyOptions& opt) {
  VerifyReport rep{"block-diag", opt.seed, {}};
  const int advs = 20;
  struct Job {
    int idx, n, p;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < advs; ++i)
    for (int p = 1; p <= 3; ++p) jobs.push_back({i, 4 + i % 3, p});
  rep.cases.resize(jobs.size());
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [idx, n, p] = jobs[j];
    VerifyCase c;
    c.key = fmt("adv i=%02d N=%d |S|=%d", idx, n, p);
    try {
      AdversaryMatrix m = random_nn_adversary(n, opt.seed + idx);
      double worst = 0.0;
      bool shape_ok = true;
      std::vector<int> s(p);
      for (int i = 0; i < p; ++i) s[i] = i;
      int sets = 0;
      while (true) {
        std::vector<AdversaryBlock> blocks = block_decompose(m, s);
        shape_ok = shape_ok && int(blocks.size()) == (1 << (n - p));
        double max_block = 0.0;
        for (const auto& blk : blocks) {
          shape_ok = shape_ok && blk.m.dim == (std::int64_t(1) << p) && blk.g.arity() == p;
          max_block = std::max(max_block, spectral_norm_dense(blk.m));
        }
        worst = std::max(worst, std::abs(max_block - spectral_norm(gamma_s(m, s).gamma)));
        ++sets;
        // next p-combination of [0, n)
        int k = p - 1;
        while (k >= 0 && s[k] == n - p + k) --k;
        if (k < 0) break;
        ++s[k];
        for (int t = k + 1; t < p; ++t) s[t] = s[t - 1] + 1;
      }
      c.params = {{"adversary", idx}, {"N", n}, {"set_size", p}, {"sets", sets}};
      c.bound = 1e-9;
      c.measured = worst;
      c.pass = shape_ok && worst <= 1e-9;
      c.note = "max over S of |max block norm - restricted norm|";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- barrier: combinatorial bound never beats the certificate ceiling ----

VerifyReport suite_barrier(const VerifyOptions& opt) {
  VerifyReport rep{"barrier", opt.seed, {}};
  const int cap = std::min(6, opt.max_arity.value_or(6));
  std::vector<NamedFn> fns;
  for (int n = 2; n <= cap; ++n) {
    fns.push_back({fmt("and n=%d", n), make_and(n)});
    fns.push_back({fmt("or n=%d", n), make_or(n)});
    fns.push_back({fmt("parity n=%d", n), make_parity(n)});
  }
  for (int n : {3, 5})
    if (n <= cap) fns.push_back({fmt("majority n=%d", n), make_majority(n)});
  for (auto [n, t] : {std::pair{4, 2}, {5, 2}, {6, 3}})
    if (n <= cap) fns.push_back({fmt("threshold n=%d t=%d", n, t), make_threshold(n, t)});
  for (auto [b, s] : {std::pair{2, 2}, {2, 3}, {3, 2}})
    if (b * s <= cap) fns.push_back({fmt("and-or %dx%d", b, s), make_and_or(b, s)});
  for (int i = 0; i < 20; ++i) {
    int n = 3 + i % std::max(1, cap - 2);
    fns.push_back({fmt("random i=%02d n=%d", i, n), random_nonconstant(n, opt.seed, 0xba12 + i)});
  }

  struct Job {
    std::string name;
    BooleanFunction f;
    bool distance_one;
  };
  std::vector<Job> jobs;
  for (auto& nf : fns) jobs.push_back({nf.name + " rel=maximal", nf.f, false});
  for (int n = 2; n <= cap; ++n)
    jobs.push_back({fmt("or n=%d rel=distance-1", n), make_or(n), true});
  for (auto [b, s] : {std::pair{2, 2}, {2, 3}, {3, 2}})
    if (b * s <= cap)
      jobs.push_back({fmt("and-or %dx%d rel=distance-1", b, s), make_and_or(b, s), true});

  rep.cases.resize(jobs.size() + 1);
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    VerifyCase c;
    c.key = jobs[j].name;
    try {
      const BooleanFunction& f = jobs[j].f;
      RelationWeights rw = jobs[j].distance_one ? adjacency_relation(f) : maximal_relation(f);
      double worst_slack = -1e300;  // max over p of (comb - barrier)
      int worst_p = 1;
      double comb_at_worst = 0, barrier_at_worst = 0;
      for (int p = 1; p <= f.arity(); ++p) {
        double comb = comb_adv_bound(rw, p).bound;
        double bar = barrier_bound(f, p);
        if (comb - bar > worst_slack) {
          worst_slack = comb - bar;
          worst_p = p;
          comb_at_worst = comb;
          barrier_at_worst = bar;
        }
      }
      c.params = {{"fn", jobs[j].name},
                  {"arity", f.arity()},
                  {"relation", jobs[j].distance_one ? "distance-1" : "maximal"},
                  {"worst_p", worst_p}};
      c.measured = comb_at_worst;
      c.bound = barrier_at_worst;
      c.pass = worst_slack <= 1e-9;
      c.note = "comb bound <= sqrt(ceil(C0/p) ceil(C1/p)) for all p; worst p shown";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  {
    VerifyCase c;
    c.key = "and-or 2x2 barrier value p=2";
    double bar = barrier_bound(make_and_or(2, 2), 2);
    c.params = {{"fn", "and-or 2x2"}, {"p", 2}};
    c.measured = bar;
    c.bound = 1.0;
    c.pass = std::abs(bar - 1.0) <= 1e-12;
    c.note = "batched certificates flatten the 2x2 barrier to exactly one";
    rep.cases.back() = std::move(c);
  }
  sort_cases(rep);
  return rep;
}

// ---- pointer-bounds: exact block-query round counts ----

VerifyReport suite_pointer_bounds(const VerifyOptions& opt) {
  VerifyReport rep{"pointer-bounds", opt.seed, {}};
  struct Job {
    int n, k, p;
  };
  std::vector<Job> jobs;
  for (int n : {4, 8})
    for (int k : {1, 2, 4})
      for (int p : {1, 2, 4}) {
        if (n % p) continue;
        if (opt.n && *opt.n != n) continue;
        if (opt.k && *opt.k != k) continue;
        if (opt.p && *opt.p != p) continue;
        jobs.push_back({n, k, p});
      }
  rep.cases.resize(jobs.size());
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [n, k, p] = jobs[j];
    VerifyCase c;
    c.key = fmt("N=%d k=%d p=%d", n, k, p);
    try {
      int d = exact_parallel_D(make_pointer(n, k), p, Granularity::block);
      c.params = {{"N", n}, {"k", k}, {"p", p}};
      c.measured = d;
      c.bound = std::min(k, n / p);
      c.pass = d == std::min(k, n / p);
      c.note = "exact rounds == min(k, N/p)";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- cor-sandwich: composing promise-equal components costs at most 2x ----

VerifyReport suite_cor_sandwich(const VerifyOptions& opt) {
  VerifyReport rep{"cor-sandwich", opt.seed, {}};
  std::vector<NamedFn> comp = {{"and2", make_and(2)},
                               {"or2", make_or(2)},
                               {"parity2", make_parity(2)},
                               {"dj2", make_dj(2)}};
  struct Job {
    int a, b, p;
  };
  std::vector<Job> jobs;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int p : {1, 2}) {
        if (opt.p && *opt.p != p) continue;
        jobs.push_back({a, b, p});
      }
  rep.cases.resize(jobs.size());
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [a, b, p] = jobs[j];
    VerifyCase c;
    c.key = fmt("f=%s g=%s p=%d", comp[a].name.c_str(), comp[b].name.c_str(), p);
    try {
      int lo = std::min(exact_parallel_D(comp[a].f, p), exact_parallel_D(comp[b].f, p));
      int dc = exact_parallel_D(make_cor(comp[a].f, comp[b].f), p);
      c.params = {{"f", comp[a].name}, {"g", comp[b].name}, {"p", p}, {"min_component", lo}};
      c.measured = dc;
      c.bound = 2.0 * lo;
      c.pass = lo <= dc && dc <= 2 * lo;
      c.note = "min(D(f),D(g)) <= D(cor) <= 2 min(D(f),D(g))";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- forrelation: acceptance == (1 + Phi)/2 ----

VerifyReport suite_forrelation(const VerifyOptions& opt) {
  VerifyReport rep{"forrelation", opt.seed, {}};
  const int trials = opt.trials.value_or(50);
  struct Job {
    int n, trial;
  };
  std::vector<Job> jobs;
  for (int n : {1, 2, 3}) {
    if (opt.n && *opt.n != n) continue;
    for (int t = 0; t < trials; ++t) jobs.push_back({n, t});
  }
  rep.cases.resize(jobs.size());
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [n, t] = jobs[j];
    VerifyCase c;
    c.key = fmt("n=%d trial=%02d", n, t);
    try {
      Rng rng = rng_stream(opt.seed, 0xf04e + (std::uint64_t(n) << 32) + t);
      Bits tables = random_bits(1 << (n + 1), rng);
      double phi = forrelation_value_tables(tables.slice_bits(0, 1 << n),
                                            tables.slice_bits(1 << n, 1 << n));
      double acc = forrelation_acceptance(tables, n);
      c.params = {{"n", n}, {"trial", t}, {"phi", phi}};
      c.measured = acc;
      c.bound = (1.0 + phi) / 2.0;
      c.pass = std::abs(acc - (1.0 + phi) / 2.0) <= 1e-9;
      c.note = "acceptance == (1 + Phi)/2 within 1e-9";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- grover: partitioned search matches the closed form ----

VerifyReport suite_grover(const VerifyOptions& opt) {
  VerifyReport rep{"grover", opt.seed, {}};
  struct Job {
    int n, p, r;
  };
  std::vector<Job> jobs;
  for (int n = 2; n <= 32; ++n) {
    if (opt.n && *opt.n != n) continue;
    for (int p = 1; p <= n; ++p) {
      if (n % p) continue;
      if (opt.p && *opt.p != p) continue;
      for (int r = 0; r <= 5; ++r) jobs.push_back({n, p, r});
    }
  }
  rep.cases.resize(jobs.size() + 1);
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [n, p, r] = jobs[j];
    VerifyCase c;
    c.key = fmt("N=%02d p=%02d r=%d", n, p, r);
    try {
      double got = grover_success(n, p, r, n - 1);
      double want = grover_closed_form(n, p, r);
      c.params = {{"N", n}, {"p", p}, {"rounds", r}, {"marked", n - 1}};
      c.measured = got;
      c.bound = want;
      c.pass = std::abs(got - want) <= 1e-9;
      c.note = "statevector == sin^2((2r+1) asin(sqrt(p/N)))";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  {
    VerifyCase c;
    c.key = "N=08 p=02 r=1 exact-one";
    double got = grover_success(8, 2, 1, 7);
    c.params = {{"N", 8}, {"p", 2}, {"rounds", 1}};
    c.measured = got;
    c.bound = 1.0;
    c.pass = std::abs(got - 1.0) <= 1e-9;
    c.note = "three amplitude steps finish an eighth-density search";
    rep.cases.back() = std::move(c);
  }
  sort_cases(rep);
  return rep;
}

// ---- cheatsheet-upper: deterministic exact, sampling >= 2/3, hybrid ----

VerifyReport suite_cheatsheet_upper(const VerifyOptions& opt) {
  VerifyReport rep{"cheatsheet-upper", opt.seed, {}};
  BooleanFunction dj2 = make_dj(2);
  BooleanFunction ao = make_and_or(2, 2);
  BooleanFunction fp = compose(dj2, {ao, ao});
  CheatSheetLayout lay = canonical_cheatsheet_layout(2, 2, 2, 1);
  BooleanFunction fcs = make_canonical_cheatsheet(dj2, 2, 2, 1);
  std::vector<Bits> dom = domain_inputs(fp);

  auto run_group = [&](const QueryStrategy& s, const std::vector<Bits>& zs) {
    int good = 0;
    bool rounds_ok = true;
    for (const Bits& z : zs) {
      Transcript t = run_strategy(s, z, fcs);
      if (t.correct()) ++good;
      rounds_ok = rounds_ok && t.round_count() <= 3;
    }
    return std::pair{double(good) / double(zs.size()), rounds_ok};
  };

  std::vector<Bits> valid, nocert, corrupted, randoms;
  for (const Bits& x : dom) {
    valid.push_back(build_cheatsheet_input(fp, lay, {x}, true));
    nocert.push_back(build_cheatsheet_input(fp, lay, {x}, false));
    Bits bent = valid.back();
    bent.flip(lay.cell_offset(int(fp.evaluate(x))));
    corrupted.push_back(bent);
  }
  Rng rng = rng_stream(opt.seed, 0xc5ee);
  for (int i = 0; i < 50; ++i) randoms.push_back(random_bits(lay.arity(), rng));

  QueryStrategy det =
      cheatsheet_parallel_algorithm(AlgModel::det, dj2, 2, 2, 1, 0, lay.cell_size, 2, 0);
  for (const auto& [name, zs] : std::initializer_list<std::pair<const char*, std::vector<Bits>*>>{
           {"valid", &valid}, {"no-cert", &nocert}, {"corrupted", &corrupted}, {"random", &randoms}}) {
    auto [frac, rounds_ok] = run_group(det, *zs);
    VerifyCase c;
    c.key = fmt("det %s", name);
    c.params = {{"inputs", int(zs->size())}, {"p", lay.cell_size}};
    c.measured = frac;
    c.bound = 1.0;
    c.pass = frac == 1.0 && rounds_ok;
    c.note = "deterministic three-phase strategy is exact in <= 3 rounds";
    rep.cases.push_back(std::move(c));
  }

  const int seeds = opt.trials.value_or(400);
  std::vector<QueryStrategy> strat;
  strat.reserve(seeds);
  for (int s = 0; s < seeds; ++s)
    strat.push_back(cheatsheet_parallel_algorithm(AlgModel::rand, dj2, 2, 2, 1, 0, lay.cell_size,
                                                  3, std::uint64_t(s)));
  {
    double worst = 1.0;
    bool rounds_ok = true;
    for (const Bits& z : valid) {
      int truth = fcs.evaluate(z), good = 0;
      for (auto& s : strat) {
        Transcript t = run_strategy(s, z, fcs);
        if (t.final_answer == truth) ++good;
        rounds_ok = rounds_ok && t.round_count() <= 3;
      }
      worst = std::min(worst, double(good) / seeds);
    }
    VerifyCase c;
    c.key = "rand worst-input success";
    c.params = {{"seeds", seeds}, {"inputs", int(valid.size())}, {"samples", 3}};
    c.measured = worst;
    c.bound = 2.0 / 3.0;
    c.pass = worst >= 2.0 / 3.0 && rounds_ok;
    c.note = "sampling hybrid wins >= 2/3 on every valid input, 3 rounds";
    rep.cases.push_back(std::move(c));
  }
  {
    int rejected = 0, total = 0;
    for (const Bits& z : corrupted)
      for (int s = 0; s < std::min(seeds, 50); ++s) {
        Transcript t = run_strategy(strat[s], z, fcs);
        rejected += t.final_answer == 0;
        ++total;
      }
    VerifyCase c;
    c.key = "rand corrupted rejected";
    c.params = {{"seeds", std::min(seeds, 50)}, {"inputs", int(corrupted.size())}};
    c.measured = double(rejected) / total;
    c.bound = 1.0;
    c.pass = rejected == total;
    c.note = "a bent certificate is never accepted";
    rep.cases.push_back(std::move(c));
  }

  // quantum 3-round hybrid on its own toy (exact one-query address solve)
  BooleanFunction ao11 = make_and_or(1, 1);
  BooleanFunction fpq = compose(dj2, {ao11, ao11});
  std::vector<Bits> domq = domain_inputs(fpq);
  for (int c_copies : {1, 2}) {
    CheatSheetLayout layq = cheatsheet_quantum_layout(c_copies);
    BooleanFunction fq = cheatsheet_quantum_function(c_copies);
    int good = 0, total = 0;
    bool rounds_ok = true;
    std::vector<std::vector<Bits>> tuples;
    if (c_copies == 1)
      for (const Bits& x : domq) tuples.push_back({x});
    else
      for (const Bits& x : domq)
        for (const Bits& y : domq) tuples.push_back({x, y});
    for (const auto& tup : tuples)
      for (bool ok : {true, false}) {
        Bits z = build_cheatsheet_input(fpq, layq, tup, ok);
        for (std::uint64_t s = 0; s < 10; ++s) {
          HybridOutcome out = cheatsheet_quantum_3round({c_copies, 0, 0}, z, opt.seed + s);
          good += out.answer == fq.evaluate(z);
          rounds_ok = rounds_ok && out.rounds == 3;
          ++total;
        }
      }
    VerifyCase c;
    c.key = fmt("quantum 3-round c=%d", c_copies);
    c.params = {{"copies", c_copies}, {"inputs", int(tuples.size() * 2)}, {"seeds", 10}};
    c.measured = double(good) / total;
    c.bound = 1.0;
    c.pass = good == total && rounds_ok;
    c.note = "quantum address round + cell read + verification, exact";
    rep.cases.push_back(std::move(c));
  }
  sort_cases(rep);
  return rep;
}

// ---- two-adaptive: 2-round algorithms win, starved parallelism cannot ----

VerifyReport suite_two_adaptive(const VerifyOptions& opt) {
  VerifyReport rep{"two-adaptive", opt.seed, {}};
  const int trials = opt.trials.value_or(2000);
  BooleanFunction dj2 = make_dj(2);
  TwoAdaptiveLayout lay{2, 5};
  BooleanFunction fta = make_two_adaptive(dj2, 5, "dj");
  {
    Rng rng = rng_stream(opt.seed, 0x2ada);
    int good = 0;
    bool rounds_ok = true;
    for (int i = 0; i < trials; ++i) {
      Bits z = sample_two_adaptive_hard(dj2, lay, rng);
      QueryStrategy s = two_adaptive_rand_algorithm(dj2, lay, 3, std::uint64_t(i));
      Transcript t = run_strategy(s, z, fta);
      good += t.correct();
      rounds_ok = rounds_ok && t.round_count() == 2;
    }
    VerifyCase c;
    c.key = "randomized 2-round success";
    c.params = {{"inner", "dj2"}, {"segments", 5}, {"trials", trials}, {"repetitions", 3}};
    c.measured = double(good) / trials;
    c.bound = 0.6;
    c.pass = c.measured >= 0.6 && rounds_ok;
    c.note = "hard-distribution success of the sampling strategy";
    rep.cases.push_back(std::move(c));
  }
  {
    BooleanFunction inner = two_adaptive_quantum_inner();
    TwoAdaptiveLayout layq{4, 2};
    BooleanFunction h = make_two_adaptive(inner, 2);
    Rng rng = rng_stream(opt.seed, 0x2adb);
    int good = 0;
    bool rounds_ok = true;
    for (int i = 0; i < trials; ++i) {
      Bits z = sample_two_adaptive_hard(inner, layq, rng);
      HybridOutcome out = two_adaptive_quantum({2, 0, 48}, z, std::uint64_t(i));
      good += out.answer == h.evaluate(z);
      rounds_ok = rounds_ok && out.rounds == 2;
    }
    VerifyCase c;
    c.key = "quantum 2-round success";
    c.params = {{"inner", "sign-balanced-4"}, {"segments", 2}, {"trials", trials},
                {"repetitions", 48}};
    c.measured = double(good) / trials;
    c.bound = 0.6;
    c.pass = c.measured >= 0.6 && rounds_ok;
    c.note = "phase estimation round + verification round on the hard distribution";
    rep.cases.push_back(std::move(c));
  }
  for (int segments : {4, 5}) {
    double best = two_adaptive_two_round_optimum(dj2, TwoAdaptiveLayout{2, segments}, 1);
    VerifyCase c;
    c.key = fmt("starved optimum segments=%d", segments);
    c.params = {{"inner", "dj2"}, {"segments", segments}, {"p", 1}, {"rounds", 2}};
    c.measured = best;
    c.bound = 0.55;
    c.pass = best <= 0.55;
    c.note = "exact expectimax over single-query two-round strategies";
    rep.cases.push_back(std::move(c));
  }
  sort_cases(rep);
  return rep;
}

// ---- bs-witness: constructed input carries >= B*G disjoint blocks ----

VerifyReport suite_bs_witness(const VerifyOptions& opt) {
  VerifyReport rep{"bs-witness", opt.seed, {}};
  struct Toy {
    std::string name;
    BooleanFunction g;
    std::vector<Bits> z;
  };
  Bits zdj(2);
  zdj.set(0, 1);
  std::vector<Toy> toys;
  toys.push_back({"dj2", make_dj(2), {zdj}});
  toys.push_back({"forrelation1", make_forrelation(1), {}});
  BooleanFunction h = make_and_or(2, 2);

  std::set<int> cases_seen;
  for (auto& toy : toys) {
    VerifyCase c;
    c.key = fmt("%s block count", toy.name.c_str());
    try {
      BsWitness w = build_block_sensitivity_witness(toy.g, h, 1, toy.z);
      // B = worst inner-layer block sensitivity at the witness, G = copies.
      int G = toy.g.arity();
      int B = 1 << 20;
      Bits inner0 = w.input.slice_bits(0, w.layout.inner_arity);
      for (int j = 0; j < G; ++j)
        B = std::min(B,
                     block_sensitivity_at(h, inner0.slice_bits(j * h.arity(), h.arity())).value);
      int flips = 0;
      bool disjoint = true;
      int base = w.fcs.evaluate(w.input);
      for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        Bits f = w.input;
        f.xor_mask(w.blocks[i]);
        flips += w.fcs.evaluate(f) != base;
        for (std::size_t j = i + 1; j < w.blocks.size(); ++j)
          for (std::size_t k = 0; k < w.blocks[i].w.size(); ++k)
            disjoint = disjoint && !(w.blocks[i].w[k] & w.blocks[j].w[k]);
      }
      for (int cs : w.cases) cases_seen.insert(cs);
      c.params = {{"outer", toy.name}, {"inner_bs", B}, {"copies", G},
                  {"verified_flips", flips}};
      c.measured = double(w.blocks.size());
      c.bound = double(B) * G;
      c.pass = int(w.blocks.size()) >= B * G && flips == int(w.blocks.size()) && disjoint;
      c.note = "every listed block flips the lift; blocks pairwise disjoint";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases.push_back(std::move(c));
  }
  {
    VerifyCase c;
    c.key = "proof cases covered";
    std::string got;
    for (int cs : cases_seen) got += fmt("%d", cs);
    c.params = {{"cases", got}};
    c.measured = double(cases_seen.size());
    c.bound = 3.0;
    c.pass = cases_seen == std::set<int>{0, 1, 2};
    c.note = "0 = domain exit, 1 = address moves, 2 = certificate mismatch";
    rep.cases.push_back(std::move(c));
  }
  sort_cases(rep);
  return rep;
}

// ---- ksum-lift: every lifted block evaluates back to its bit ----

VerifyReport suite_ksum_lift(const VerifyOptions& opt) {
  VerifyReport rep{"ksum-lift", opt.seed, {}};
  const int sub_blocks = 4, k = 2, block_bits = 2, modulus = 3;
  const int seeds = opt.trials.value_or(100);
  BooleanFunction ks = make_ksum(sub_blocks, k, block_bits, modulus);
  const int block_width = sub_blocks * block_bits;
  std::vector<int> lens;
  for (int len = 1; len <= 6; ++len) lens.push_back(len);
  rep.cases.resize(lens.size());
  parallel_cases(int(lens.size()), opt.threads, [&](int li) {
    int len = lens[li];
    VerifyCase c;
    c.key = fmt("len=%d", len);
    try {
      long failures = 0, checks = 0;
      for (std::uint64_t xv = 0; xv < (std::uint64_t(1) << len); ++xv) {
        Bits x = Bits::from_index(len, xv);
        for (int seed = 0; seed < seeds; ++seed) {
          Bits y = build_ksum_lift(x, sub_blocks, k, block_bits, modulus,
                                   opt.seed + std::uint64_t(seed));
          for (int i = 0; i < len; ++i) {
            failures += ks.evaluate(y.slice_bits(i * block_width, block_width)) != x.get(i);
            ++checks;
          }
        }
      }
      c.params = {{"inputs", 1 << len}, {"seeds", seeds}, {"checks", checks},
                  {"sub_blocks", sub_blocks}, {"k", k}, {"modulus", modulus}};
      c.measured = double(failures);
      c.bound = 0.0;
      c.pass = failures == 0;
      c.note = "k-subset-sum of every lifted block equals the encoded bit";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[li] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

// ---- star-lemma: query sets rarely hit many random stars ----

VerifyReport suite_star_lemma(const VerifyOptions& opt) {
  VerifyReport rep{"star-lemma", opt.seed, {}};
  const int trials = opt.trials.value_or(10000);
  {
    std::vector<int> scan;
    for (int i = 0; i < 16; ++i) scan.push_back(i);
    StarStats s = star_hit_stats(scan, 8, 8, 20.0 * 16 / 8, trials, opt.seed + 5);
    VerifyCase c;
    c.key = "scan l=16 blocks=8 m=8";
    c.params = {{"queries", 16}, {"blocks", 8}, {"m", 8}, {"threshold", 40.0},
                {"trials", trials}, {"mean", s.mean}};
    c.measured = s.exceed_prob;
    c.bound = 0.1 + 0.02;
    c.pass = s.exceed_prob <= 0.1 + 0.02 && s.mean <= 2.0 * 16 / 8;
    c.note = "threshold 20l/m exceeds the query count: exceedance vacuously rare";
    rep.cases.push_back(std::move(c));
  }
  {
    std::vector<int> probe;
    for (int i = 0; i < 8; ++i) probe.push_back(i);
    StarStats s = star_hit_stats(probe, 1, 256, 20.0 * 8 / 256, trials, opt.seed + 6);
    VerifyCase c;
    c.key = "probe l=8 blocks=1 m=256";
    c.params = {{"queries", 8}, {"blocks", 1}, {"m", 256}, {"threshold", 0.625},
                {"trials", trials}, {"mean", s.mean}};
    c.measured = s.exceed_prob;
    c.bound = 0.1 + 0.02;
    c.pass = s.exceed_prob > 0.0 && s.exceed_prob <= 0.1 + 0.02 && s.mean <= 2.0 * 8 / 256;
    c.note = "single huge block: hits happen but stay under 20l/m + slack";
    rep.cases.push_back(std::move(c));
  }
  sort_cases(rep);
  return rep;
}

// ---- symmetric: witness keeps half of sqrt(N t / (p min(p,t))) ----

VerifyReport suite_symmetric(const VerifyOptions& opt) {
  VerifyReport rep{"symmetric", opt.seed, {}};
  std::vector<NamedFn> fns;
  for (int n : {3, 5, 7, 9, 11})
    if (n <= opt.max_arity.value_or(12)) fns.push_back({fmt("majority n=%02d", n), make_majority(n)});
  for (auto [n, t] : {std::pair{4, 2}, {6, 1}, {6, 2}, {6, 3}, {8, 3}, {10, 4}, {12, 5}})
    if (n <= opt.max_arity.value_or(12))
      fns.push_back({fmt("threshold n=%02d t=%d", n, t), make_threshold(n, t)});
  struct Job {
    int fn, p;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < int(fns.size()); ++i)
    for (int p : {1, 2, 4}) {
      if (p > fns[i].f.arity()) continue;
      if (opt.p && *opt.p != p) continue;
      jobs.push_back({i, p});
    }
  rep.cases.resize(jobs.size());
  parallel_cases(int(jobs.size()), opt.threads, [&](int j) {
    auto [fi, p] = jobs[j];
    VerifyCase c;
    c.key = fmt("%s p=%d", fns[fi].name.c_str(), p);
    try {
      const BooleanFunction& f = fns[fi].f;
      SymmetricAdversary sa = symmetric_adversary(f);
      RatioResult r = parallel_adv_ratio(sa.m, p);
      int n = f.arity(), t = sa.t;
      double target =
          0.5 * std::sqrt(double(n) * std::max(t, 1) / (double(p) * std::max(1, std::min(p, t))));
      c.params = {{"fn", fns[fi].name}, {"N", n}, {"t", t}, {"low_weight", sa.low_weight},
                  {"p", p}};
      c.measured = r.ratio;
      c.bound = target;
      c.pass = !r.sampled && r.ratio >= target - 1e-9;
      c.note = "ratio >= 0.5 sqrt(N t / (p min(p,t))), degenerate t floored at 1";
    } catch (const std::exception& e) {
      c = fail_case(c.key, e);
    }
    rep.cases[j] = std::move(c);
  });
  sort_cases(rep);
  return rep;
}

using SuiteFn = VerifyReport (*)(const VerifyOptions&);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> reg = {
      {"barrier", suite_barrier},
      {"block-diag", suite_block_diag},
      {"bs-witness", suite_bs_witness},
      {"cheatsheet-upper", suite_cheatsheet_upper},
      {"cor-sandwich", suite_cor_sandwich},
      {"forrelation", suite_forrelation},
      {"grover", suite_grover},
      {"ksum-lift", suite_ksum_lift},
      {"pointer-bounds", suite_pointer_bounds},
      {"spectral-witness", suite_spectral_witness},
      {"star-lemma", suite_star_lemma},
      {"symmetric", suite_symmetric},
      {"two-adaptive", suite_two_adaptive},
  };
  return reg;
}

ordered_json case_json(const std::string& suite, const VerifyCase& c) {
  ordered_json o;
  o["suite"] = suite;
  o["case"] = c.key;
  o["params"] = c.params.is_null() ? ordered_json::object() : c.params;
  o["bound"] = c.bound;
  o["measured"] = c.measured;
  o["pass"] = c.pass;
  if (!c.note.empty()) o["note"] = c.note;
  return o;
}

}  // namespace

bool VerifyReport::all_pass() const { return failures() == 0; }

int VerifyReport::failures() const {
  int f = 0;
  for (const auto& c : cases) f += !c.pass;
  return f;
}

std::string VerifyReport::to_jsonl() const {
  std::string out;
  for (const auto& c : cases) {
    out += case_json(suite, c).dump();
    out += '\n';
  }
  ordered_json s;
  s["suite"] = suite;
  s["summary"] = true;
  s["seed"] = seed;
  s["cases"] = cases.size();
  s["failures"] = failures();
  s["pass"] = all_pass();
  out += s.dump();
  out += '\n';
  return out;
}

std::string VerifyReport::summary_table() const {
  std::ostringstream os;
  os << fmt("%-18s %6zu cases  %4d failed  %s\n", suite.c_str(), cases.size(), failures(),
            all_pass() ? "PASS" : "FAIL");
  for (const auto& c : cases)
    if (!c.pass)
      os << fmt("  FAIL %-40s measured=%.12g bound=%.12g %s\n", c.key.c_str(), c.measured,
                c.bound, c.note.c_str());
  return os.str();
}

const std::vector<std::string>& verify_suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [k, fn] : registry()) v.push_back(k);
    return v;
  }();
  return ids;
}

VerifyReport run_verify_suite(const std::string& id, const VerifyOptions& opt) {
  auto it = registry().find(id);
  if (it == registry().end()) throw IndexOutOfRange("unknown verify suite: " + id);
  return it->second(opt);
}

std::string merge_reports(const std::vector<std::string>& jsonl_blobs) {
  std::vector<ordered_json> records;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> totals;  // cases, failures
  for (const auto& blob : jsonl_blobs) {
    std::istringstream is(blob);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      ordered_json o = ordered_json::parse(line, nullptr, false);
      if (o.is_discarded()) throw ParseError("report line is not valid JSON: " + line);
      if (o.contains("summary")) continue;  // recomputed below
      if (!o.contains("suite") || !o.contains("case"))
        throw ParseError("report line lacks suite/case: " + line);
      auto& t = totals[o["suite"].get<std::string>()];
      ++t.first;
      t.second += !o.value("pass", false);
      records.push_back(std::move(o));
    }
  }
  std::sort(records.begin(), records.end(), [](const ordered_json& a, const ordered_json& b) {
    auto ka = std::pair{a["suite"].get<std::string>(), a["case"].get<std::string>()};
    auto kb = std::pair{b["suite"].get<std::string>(), b["case"].get<std::string>()};
    return ka < kb;
  });
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  for (const auto& [suite, t] : totals) {
    ordered_json s;
    s["suite"] = suite;
    s["summary"] = true;
    s["cases"] = t.first;
    s["failures"] = t.second;
    s["pass"] = t.second == 0;
    out += s.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qpar
