#include <algorithm>
#include <climits>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "qpar/classical.hpp"
#include "qpar/errors.hpp"

namespace qpar {

std::string Transcript::to_jsonl() const {
  std::ostringstream os;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    nlohmann::ordered_json j;
    j["round"] = t;
    j["indices"] = rounds[t].indices;
    j["answers"] = rounds[t].answers;
    os << j.dump() << "\n";
  }
  nlohmann::ordered_json j;
  if (answered)
    j["final"] = final_answer;
  else
    j["final"] = nullptr;
  j["rounds"] = round_count();
  j["queries"] = query_count();
  if (truth) j["correct"] = correct();
  os << j.dump() << "\n";
  return os.str();
}

namespace {

void check_query(const std::vector<int>& q, int p, int arity) {
  if ((int)q.size() > p) throw StrategyViolation("query set larger than parallelism");
  std::vector<char> seen(arity, 0);
  for (int i : q) {
    if (i < 0 || i >= arity) throw StrategyViolation("query index out of range");
    if (seen[i]) throw StrategyViolation("duplicate index in query set");
    seen[i] = 1;
  }
}

template <class Oracle>
Transcript run_loop(const QueryStrategy& s, Oracle&& oracle, int arity, int max_rounds) {
  Transcript t;
  for (int r = 0; r < max_rounds; ++r) {
    StrategyStep step = s.next(t);
    if (step.answer) {
      t.final_answer = *step.answer;
      t.answered = true;
      return t;
    }
    check_query(step.query, s.parallelism, arity);
    TranscriptRound round;
    round.indices = step.query;
    round.answers = oracle(step.query);
    t.rounds.push_back(std::move(round));
  }
  throw StrategyViolation("strategy did not terminate");
}

}  // namespace

Transcript run_strategy(const QueryStrategy& s, const Bits& x, const BooleanFunction& f) {
  if (s.parallelism > f.arity()) throw StrategyViolation("parallelism exceeds arity");
  Transcript t = run_loop(
      s,
      [&](const std::vector<int>& q) {
        std::vector<int> a(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) a[i] = x.get(q[i]);
        return a;
      },
      f.arity(), 4 * f.arity() + 16);
  t.truth = f.evaluate(x);
  return t;
}

Transcript run_strategy(const QueryStrategy& s, AdaptiveAnswerer& adv, int arity,
                        int max_rounds) {
  return run_loop(
      s, [&](const std::vector<int>& q) { return adv.answer(q); }, arity, max_rounds);
}

QueryStrategy read_all_strategy(const BooleanFunction& f, int p) {
  QueryStrategy s;
  s.parallelism = p;
  s.name = "read-all";
  s.next = [f, p](const Transcript& t) {
    int n = f.arity();
    int have = t.query_count();
    if (have < n) {
      std::vector<int> q;
      for (int i = have; i < n && (int)q.size() < p; ++i) q.push_back(i);
      return StrategyStep::ask(std::move(q));
    }
    Bits x(n);
    for (auto& r : t.rounds)
      for (std::size_t i = 0; i < r.indices.size(); ++i) x.set(r.indices[i], r.answers[i]);
    return StrategyStep::decide(f.in_domain(x) ? f.evaluate(x) : 0);
  };
  return s;
}

// ---- exact minimax over p-parallel deterministic strategies ----

namespace {

// Uniform view: the game is over `cells` cells of `cell_bits` bits each; bit
// granularity is the 1-bit special case.
struct CellModel {
  int cells = 0;
  int cell_bits = 0;
  int answers = 0;  // 1 << cell_bits
};

CellModel cell_model(const BooleanFunction& f, Granularity g) {
  CellModel m;
  if (g == Granularity::bit) {
    m.cells = f.arity();
    m.cell_bits = 1;
    if (m.cells > 12) throw TooLarge("bit-level solver capped at 12 bits");
  } else {
    auto meta = f.block_meta();
    if (!meta) throw ArityMismatch("block granularity needs block metadata");
    m.cells = meta->block_count;
    m.cell_bits = meta->block_bits;
    if (m.cells > 8) throw TooLarge("block-level solver capped at 8 blocks");
    if (m.cell_bits > 4) throw TooLarge("block-level solver capped at 16-valued blocks");
  }
  m.answers = 1 << m.cell_bits;
  return m;
}

struct Bounds {
  int false_to = -1;       // value exceeds this round count
  int true_at = INT_MAX;   // value is at most this round count
};

struct DSolver {
  BooleanFunction f;
  CellModel cm;
  int p;
  bool total;
  std::vector<int> digits;  // -1 unanswered, else cell value
  std::unordered_map<std::uint64_t, Bounds> memo;

  DSolver(const BooleanFunction& fn, int p_, Granularity g)
      : f(fn), cm(cell_model(fn, g)), p(p_), total(fn.total()), digits(cm.cells, -1) {
    if (p < 1) throw ArityMismatch("parallelism must be positive");
  }

  std::uint64_t pack() const {
    std::uint64_t key = 0, radix = cm.answers + 1;
    for (int c = cm.cells - 1; c >= 0; --c) key = key * radix + std::uint64_t(digits[c] + 1);
    return key;
  }

  PartialInput partial() const {
    PartialInput pa{Bits(f.arity()), Bits(f.arity())};
    for (int c = 0; c < cm.cells; ++c) {
      if (digits[c] < 0) continue;
      for (int b = 0; b < cm.cell_bits; ++b) {
        pa.mask.set(c * cm.cell_bits + b, 1);
        pa.value.set(c * cm.cell_bits + b, (digits[c] >> b) & 1);
      }
    }
    return pa;
  }

  // live = some consistent completion exists and the value is not yet forced
  bool live() const {
    CubeValues cv = f.cube_values(partial());
    return cv.sees0 && cv.sees1;
  }

  std::vector<int> open_cells() const {
    std::vector<int> open;
    for (int c = 0; c < cm.cells; ++c)
      if (digits[c] < 0) open.push_back(c);
    return open;
  }

  // can the value be forced within r more rounds from the current state?
  bool can(int r) {
    if (!live()) return true;
    if (r <= 0) return false;
    auto open = open_cells();
    int u = (int)open.size();
    if (r >= (int)ceil_div(u, p)) return true;
    std::uint64_t key = pack();
    {
      auto it = memo.find(key);
      if (it != memo.end()) {
        if (r >= it->second.true_at) return true;
        if (r <= it->second.false_to) return false;
      }
    }
    int q = std::min(p, u);
    std::vector<int> pick(q);
    for (int i = 0; i < q; ++i) pick[i] = i;
    bool found = false;
    while (true) {
      bool all_answers_ok = true;
      std::uint64_t tuples = 1;
      for (int i = 0; i < q; ++i) tuples *= cm.answers;
      for (std::uint64_t a = 0; a < tuples && all_answers_ok; ++a) {
        std::uint64_t v = a;
        for (int i = 0; i < q; ++i) {
          digits[open[pick[i]]] = int(v % cm.answers);
          v /= cm.answers;
        }
        bool possible = total;
        if (!possible) {
          CubeValues cv = f.cube_values(partial());
          possible = cv.sees0 || cv.sees1;
        }
        if (possible && !can(r - 1)) all_answers_ok = false;
        for (int i = 0; i < q; ++i) digits[open[pick[i]]] = -1;
      }
      if (all_answers_ok) {
        found = true;
        break;
      }
      // next lexicographic q-combination
      int i = q - 1;
      while (i >= 0 && pick[i] == u - q + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < q; ++j) pick[j] = pick[j - 1] + 1;
    }
    Bounds& b = memo[key];
    if (found)
      b.true_at = std::min(b.true_at, r);
    else
      b.false_to = std::max(b.false_to, r);
    return found;
  }

  // lexicographically first optimal move at the current state, with `rounds`
  // still available; requires can(rounds)
  std::vector<int> best_move(int rounds) {
    auto open = open_cells();
    int u = (int)open.size();
    int q = std::min(p, u);
    std::vector<int> pick(q);
    for (int i = 0; i < q; ++i) pick[i] = i;
    while (true) {
      bool all_ok = true;
      std::uint64_t tuples = 1;
      for (int i = 0; i < q; ++i) tuples *= cm.answers;
      for (std::uint64_t a = 0; a < tuples && all_ok; ++a) {
        std::uint64_t v = a;
        for (int i = 0; i < q; ++i) {
          digits[open[pick[i]]] = int(v % cm.answers);
          v /= cm.answers;
        }
        bool possible = total;
        if (!possible) {
          CubeValues cv = f.cube_values(partial());
          possible = cv.sees0 || cv.sees1;
        }
        if (possible && !can(rounds - 1)) all_ok = false;
        for (int i = 0; i < q; ++i) digits[open[pick[i]]] = -1;
      }
      if (all_ok) {
        std::vector<int> cells;
        for (int i = 0; i < q; ++i) cells.push_back(open[pick[i]]);
        return cells;
      }
      int i = q - 1;
      while (i >= 0 && pick[i] == u - q + i) --i;
      if (i < 0) throw StrategyViolation("no feasible move despite solvable state");
      ++pick[i];
      for (int j = i + 1; j < q; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
};

}  // namespace

int exact_parallel_D(const BooleanFunction& f, int p, Granularity g) {
  DSolver solver(f, p, g);
  for (int r = 0;; ++r)
    if (solver.can(r)) return r;
}

QueryStrategy make_optimal_strategy(const BooleanFunction& f, int p, Granularity g) {
  auto solver = std::make_shared<DSolver>(f, p, g);
  QueryStrategy s;
  s.parallelism = p * solver->cm.cell_bits;
  s.name = "minimax-optimal";
  s.next = [solver](const Transcript& t) {
    DSolver& ds = *solver;
    std::fill(ds.digits.begin(), ds.digits.end(), -1);
    std::vector<int> val(ds.f.arity(), 0);
    std::vector<char> known(ds.f.arity(), 0);
    for (auto& r : t.rounds)
      for (std::size_t i = 0; i < r.indices.size(); ++i) {
        known[r.indices[i]] = 1;
        val[r.indices[i]] = r.answers[i];
      }
    for (int c = 0; c < ds.cm.cells; ++c) {
      bool whole = true;
      int v = 0;
      for (int b = 0; b < ds.cm.cell_bits; ++b) {
        if (!known[c * ds.cm.cell_bits + b]) whole = false;
        v |= val[c * ds.cm.cell_bits + b] << b;
      }
      if (whole) ds.digits[c] = v;
    }
    CubeValues cv = ds.f.cube_values(ds.partial());
    if (!(cv.sees0 && cv.sees1)) return StrategyStep::decide(cv.sees1 ? 1 : 0);
    int rounds = 0;
    while (!ds.can(rounds)) ++rounds;
    std::vector<int> cells = ds.best_move(rounds);
    std::vector<int> bits;
    for (int c : cells)
      for (int b = 0; b < ds.cm.cell_bits; ++b) bits.push_back(c * ds.cm.cell_bits + b);
    return StrategyStep::ask(std::move(bits));
  };
  return s;
}

// ---- exact distributional success by expectimax ----

namespace {

struct ExpectiSolver {
  const BooleanFunction& f;
  std::vector<Bits> xs;
  std::vector<double> ws;
  std::vector<int> fv;
  int n, p;
  std::unordered_map<std::uint64_t, double> memo;

  // weight of the best final guess over inputs matching (mask, ans)
  double leaf(std::uint32_t mask, std::uint32_t ans) const {
    double w0 = 0, w1 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if ((std::uint32_t(xs[i].index()) & mask) != ans) continue;
      (fv[i] ? w1 : w0) += ws[i];
    }
    return std::max(w0, w1);
  }

  double value(std::uint32_t mask, std::uint32_t ans, int r) {
    if (r == 0) return leaf(mask, ans);
    std::uint64_t key = (std::uint64_t(r) << 40) | (std::uint64_t(mask) << 20) | ans;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<int> open;
    for (int i = 0; i < n; ++i)
      if (!(mask >> i & 1)) open.push_back(i);
    int u = (int)open.size();
    if (u == 0) {
      double v = leaf(mask, ans);
      memo[key] = v;
      return v;
    }
    int q = std::min(p, u);
    std::vector<int> pick(q);
    for (int i = 0; i < q; ++i) pick[i] = i;
    double best = 0;
    while (true) {
      std::uint32_t qmask = 0;
      for (int i = 0; i < q; ++i) qmask |= std::uint32_t(1) << open[pick[i]];
      double total = 0;
      for (std::uint32_t a = 0; a < (1u << q); ++a) {
        std::uint32_t abits = 0;
        for (int i = 0; i < q; ++i)
          if (a >> i & 1) abits |= std::uint32_t(1) << open[pick[i]];
        bool any = false;
        for (std::size_t j = 0; j < xs.size() && !any; ++j) {
          std::uint32_t xi = std::uint32_t(xs[j].index());
          any = (xi & mask) == ans && (xi & qmask) == abits;
        }
        if (any) total += value(mask | qmask, ans | abits, r - 1);
      }
      best = std::max(best, total);
      int i = q - 1;
      while (i >= 0 && pick[i] == u - q + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < q; ++j) pick[j] = pick[j - 1] + 1;
    }
    memo[key] = best;
    return best;
  }
};

}  // namespace

double distributional_success(const BooleanFunction& f, const std::vector<WeightedInput>& dist,
                              int p, int rounds) {
  if (f.arity() > 20) throw TooLarge("expectimax solver capped at 20 bits");
  if (p < 1) throw ArityMismatch("parallelism must be positive");
  ExpectiSolver s{f, {}, {}, {}, f.arity(), p, {}};
  double total = 0;
  for (auto& wi : dist) {
    if (wi.w <= 0) continue;
    s.xs.push_back(wi.x);
    s.ws.push_back(wi.w);
    s.fv.push_back(f.evaluate(wi.x));
    total += wi.w;
  }
  if (s.xs.empty()) throw ArityMismatch("distribution has no support");
  return s.value(0, 0, rounds) / total;
}

}  // namespace qpar
