#include "qpar/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlohmann/json.hpp"
#include "qpar/errors.hpp"
#include "qpar/rng.hpp"

namespace qpar {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;

void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.qubits) throw IndexOutOfRange("qubit index out of range");
}

// Scatters the low bits of `value` into the listed qubit positions.
std::uint64_t scatter(const std::vector<int>& reg, std::uint64_t value) {
  std::uint64_t z = 0;
  for (std::size_t k = 0; k < reg.size(); ++k)
    if (value >> k & 1) z |= std::uint64_t(1) << reg[k];
  return z;
}

std::uint64_t gather(const std::vector<int>& reg, std::uint64_t z) {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < reg.size(); ++k)
    if (z >> reg[k] & 1) v |= std::uint64_t(1) << k;
  return v;
}

// Iterates over all basis states with every listed qubit clear, invoking
// fn(rep); the register cosets are rep | scatter(reg, k).
template <typename Fn>
void for_each_coset(const StateVector& s, const std::vector<int>& reg, Fn&& fn) {
  std::uint64_t mask = 0;
  for (int q : reg) mask |= std::uint64_t(1) << q;
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z)
    if ((z & mask) == 0) fn(z);
}

}  // namespace

StateVector StateVector::basis(int qubits, std::uint64_t index) {
  if (qubits < 0 || qubits > kHardCap) throw CapExceeded("statevector qubit count");
  StateVector s;
  s.qubits = qubits;
  s.amp.assign(std::uint64_t(1) << qubits, 0.0);
  if (index >= s.amp.size()) throw IndexOutOfRange("basis index out of range");
  s.amp[index] = 1.0;
  return s;
}

double StateVector::norm_sq() const {
  double t = 0;
  for (const auto& a : amp) t += std::norm(a);
  return t;
}

void apply_h(StateVector& s, int q) {
  check_qubit(s, q);
  const std::uint64_t bit = std::uint64_t(1) << q;
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z) {
    if (z & bit) continue;
    const auto a = s.amp[z], b = s.amp[z | bit];
    s.amp[z] = (a + b) * kInvSqrt2;
    s.amp[z | bit] = (a - b) * kInvSqrt2;
  }
}

void apply_x(StateVector& s, int q) {
  check_qubit(s, q);
  const std::uint64_t bit = std::uint64_t(1) << q;
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z)
    if (!(z & bit)) std::swap(s.amp[z], s.amp[z | bit]);
}

void apply_z(StateVector& s, int q) {
  check_qubit(s, q);
  const std::uint64_t bit = std::uint64_t(1) << q;
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z)
    if (z & bit) s.amp[z] = -s.amp[z];
}

void apply_cz(StateVector& s, int a, int b) {
  check_qubit(s, a);
  check_qubit(s, b);
  const std::uint64_t mask = (std::uint64_t(1) << a) | (std::uint64_t(1) << b);
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z)
    if ((z & mask) == mask) s.amp[z] = -s.amp[z];
}

void apply_ch(StateVector& s, int control, int target) {
  check_qubit(s, control);
  check_qubit(s, target);
  const std::uint64_t cbit = std::uint64_t(1) << control;
  const std::uint64_t tbit = std::uint64_t(1) << target;
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z) {
    if (!(z & cbit) || (z & tbit)) continue;
    const auto a = s.amp[z], b = s.amp[z | tbit];
    s.amp[z] = (a + b) * kInvSqrt2;
    s.amp[z | tbit] = (a - b) * kInvSqrt2;
  }
}

void apply_phase_fn(StateVector& s, const std::function<bool(std::uint64_t)>& pred) {
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z)
    if (pred(z)) s.amp[z] = -s.amp[z];
}

void apply_permutation(StateVector& s, const std::function<std::uint64_t(std::uint64_t)>& pi) {
  const std::uint64_t n = s.size();
  std::vector<std::complex<double>> out(n, 0.0);
  std::vector<bool> hit(n, false);
  for (std::uint64_t z = 0; z < n; ++z) {
    const std::uint64_t w = pi(z);
    if (w >= n || hit[w]) throw LayoutMismatch("permutation is not a bijection on the basis");
    hit[w] = true;
    out[w] = s.amp[z];
  }
  s.amp = std::move(out);
}

void apply_prepare_uniform(StateVector& s, const std::vector<int>& reg, int support) {
  for (int q : reg) check_qubit(s, q);
  if (support < 1 || support > (std::int64_t(1) << reg.size()))
    throw LayoutMismatch("prepare support exceeds the register");
  const double a = 1.0 / std::sqrt(double(support));
  for_each_coset(s, reg, [&](std::uint64_t rep) {
    const auto a0 = s.amp[rep];
    for (int k = 1; k < (1 << reg.size()); ++k)
      if (std::norm(s.amp[rep | scatter(reg, k)]) > 1e-24)
        throw LayoutMismatch("prepare register is not |0..0>");
    for (int k = 0; k < (1 << reg.size()); ++k)
      s.amp[rep | scatter(reg, k)] = k < support ? a0 * a : 0.0;
  });
}

void apply_reflect_uniform(StateVector& s, const std::vector<int>& reg, int support) {
  for (int q : reg) check_qubit(s, q);
  if (support < 1 || support > (std::int64_t(1) << reg.size()))
    throw LayoutMismatch("reflect support exceeds the register");
  for_each_coset(s, reg, [&](std::uint64_t rep) {
    std::complex<double> sum = 0.0;
    for (int k = 0; k < support; ++k) sum += s.amp[rep | scatter(reg, k)];
    const auto twice_mean = 2.0 * sum / double(support);
    for (int k = 0; k < (1 << reg.size()); ++k) {
      auto& a = s.amp[rep | scatter(reg, k)];
      a = k < support ? twice_mean - a : -a;
    }
  });
}

namespace {

// Engine shared by the public oracle and program oracle steps. limit = number
// of valid local addresses; larger indices read as 0 so padded partitions act
// as the identity. strict registers instead require the whole range in x.
struct OracleReg {
  std::vector<int> index_qubits;
  int target = -1;
  std::int64_t base = 0;
  std::int64_t limit = 0;
  bool strict = false;
};

void run_oracle(StateVector& s, const Bits& x, OracleMode mode,
                const std::vector<OracleReg>& regs) {
  for (const auto& r : regs) {
    for (int q : r.index_qubits) check_qubit(s, q);
    if (r.target >= 0) check_qubit(s, r.target);
    if (mode == OracleMode::bitflip && r.target < 0)
      throw LayoutMismatch("bitflip oracle register lacks a target");
    const std::int64_t span = std::int64_t(1) << r.index_qubits.size();
    const std::int64_t lim = r.limit > 0 ? r.limit : span;
    if (r.base < 0 || r.base + lim > x.n) throw LayoutMismatch("oracle addresses leave x");
    if (r.strict && r.base + span > x.n) throw LayoutMismatch("oracle addresses leave x");
  }
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z) {
    int acc = 0;
    std::uint64_t flips = 0;
    for (const auto& r : regs) {
      const std::int64_t idx = std::int64_t(gather(r.index_qubits, z));
      const std::int64_t lim = r.limit > 0 ? r.limit : std::int64_t(1) << r.index_qubits.size();
      const int v = idx < lim ? x.get(int(r.base + idx)) : 0;
      if (mode == OracleMode::phase)
        acc ^= v;
      else
        flips |= std::uint64_t(v) << r.target;
    }
    if (mode == OracleMode::phase) {
      if (acc) s.amp[z] = -s.amp[z];
    } else if (flips) {
      // targets are untouched by the index read, so z <-> z^flips pairs up
      if ((z ^ flips) > z) std::swap(s.amp[z], s.amp[z ^ flips]);
    }
  }
}

}  // namespace

void apply_oracle(StateVector& s, const ParallelOracle& o) {
  const auto& lay = o.layout;
  if (lay.p < 1 || lay.index_bits < 0) throw LayoutMismatch("empty oracle layout");
  if (lay.qubits(o.mode) != s.qubits) throw LayoutMismatch("oracle layout does not fit the state");
  if (!lay.base.empty() && int(lay.base.size()) != lay.p)
    throw LayoutMismatch("oracle base count != p");
  std::vector<OracleReg> regs(lay.p);
  for (int j = 0; j < lay.p; ++j) {
    for (int b = 0; b < lay.index_bits; ++b)
      regs[j].index_qubits.push_back(lay.index_qubit(j, b));
    if (o.mode == OracleMode::bitflip) regs[j].target = lay.target_qubit(j);
    regs[j].base = lay.base.empty() ? 0 : lay.base[j];
    regs[j].strict = true;
  }
  run_oracle(s, o.x, o.mode, regs);
}

// --- program execution ------------------------------------------------------

namespace {

void run_gate(StateVector& s, const GateStep& g) {
  switch (g.kind) {
    case GateStep::Kind::h:
      for (int q : g.qubits) apply_h(s, q);
      break;
    case GateStep::Kind::x:
      for (int q : g.qubits) apply_x(s, q);
      break;
    case GateStep::Kind::z:
      for (int q : g.qubits) apply_z(s, q);
      break;
    case GateStep::Kind::cz:
      apply_cz(s, g.qubits.at(0), g.qubits.at(1));
      break;
    case GateStep::Kind::ch:
      apply_ch(s, g.qubits.at(0), g.qubits.at(1));
      break;
    case GateStep::Kind::phase_fn:
      apply_phase_fn(s, g.pred);
      break;
    case GateStep::Kind::permutation:
      apply_permutation(s, g.permute);
      break;
    case GateStep::Kind::prepare:
      apply_prepare_uniform(s, g.qubits, g.support);
      break;
    case GateStep::Kind::reflect:
      apply_reflect_uniform(s, g.qubits, g.support);
      break;
  }
}

void run_oracle_step(StateVector& s, const Bits& x, const OracleStep& o) {
  std::vector<OracleReg> regs;
  regs.reserve(o.regs.size());
  for (const auto& r : o.regs)
    regs.push_back({r.index_qubits, r.target, r.base, r.limit, false});
  run_oracle(s, x, o.mode, regs);
}

// Qubits a gate can touch; full-basis gates pin the whole program together.
bool full_basis_gate(const GateStep& g) {
  return g.kind == GateStep::Kind::phase_fn || g.kind == GateStep::Kind::permutation;
}

struct UnionFind {
  std::vector<int> up;
  explicit UnionFind(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  int find(int a) {
    while (up[a] != a) a = up[a] = up[up[a]];
    return a;
  }
  void join(int a, int b) { up[find(a)] = find(b); }
};

struct Block {
  std::vector<int> qubits;             // global qubits, ascending
  std::vector<int> measured_slots;     // positions into prog.measured
  std::vector<double> joint;           // over measured_slots bits
};

int local_index(const std::vector<int>& qubits, int q) {
  const auto it = std::lower_bound(qubits.begin(), qubits.end(), q);
  return int(it - qubits.begin());
}

std::vector<double> measured_joint(const StateVector& s, const std::vector<int>& measured) {
  std::vector<double> dist(std::uint64_t(1) << measured.size(), 0.0);
  const std::uint64_t n = s.size();
  for (std::uint64_t z = 0; z < n; ++z) {
    const double pz = std::norm(s.amp[z]);
    if (pz > 0.0) dist[gather(measured, z)] += pz;
  }
  return dist;
}

StateVector simulate_qubits(const QuantumRoundProgram& prog, const Bits& x,
                            const std::vector<int>& qubits) {
  StateVector s = StateVector::basis(int(qubits.size()));
  const auto remap = [&](const std::vector<int>& qs) {
    std::vector<int> out;
    out.reserve(qs.size());
    for (int q : qs) out.push_back(local_index(qubits, q));
    return out;
  };
  const auto touches = [&](const std::vector<int>& qs) {
    for (int q : qs)
      if (std::binary_search(qubits.begin(), qubits.end(), q)) return true;
    return false;
  };
  for (const auto& step : prog.steps) {
    if (step.oracle) {
      OracleStep local;
      local.mode = step.oracle->mode;
      for (const auto& r : step.oracle->regs) {
        if (!touches(r.index_qubits) && !(r.target >= 0 && touches({r.target}))) continue;
        OracleStep::Reg lr = r;
        lr.index_qubits = remap(r.index_qubits);
        if (r.target >= 0) lr.target = local_index(qubits, r.target);
        local.regs.push_back(std::move(lr));
      }
      if (!local.regs.empty()) run_oracle_step(s, x, local);
      continue;
    }
    for (const auto& g : step.gates) {
      if (full_basis_gate(g))  // the blockwise caller rejects these up front
        throw CapExceeded("full-basis gate inside a block simulation");
      if (!touches(g.qubits)) continue;
      GateStep lg = g;
      lg.qubits = remap(g.qubits);
      run_gate(s, lg);
    }
  }
  return s;
}

// Distribution of ones among independent bits with the given marginals.
std::vector<double> poisson_binomial(const std::vector<double>& marginals) {
  std::vector<double> dist(1, 1.0);
  for (double p : marginals) {
    dist.push_back(0.0);
    for (int k = int(dist.size()) - 1; k >= 0; --k) {
      const double stay = k < int(dist.size()) - 1 ? dist[k] * (1 - p) : 0.0;
      const double rise = k > 0 ? dist[k - 1] * p : 0.0;
      dist[k] = stay + rise;
    }
  }
  return dist;
}

std::uint64_t sample_dist(const std::vector<double>& dist, Rng& rng) {
  double u = rng_double(rng);
  for (std::size_t w = 0; w < dist.size(); ++w) {
    u -= dist[w];
    if (u < 0) return w;
  }
  return dist.size() - 1;
}

}  // namespace

int QuantumRoundProgram::oracle_rounds() const {
  int k = 0;
  for (const auto& s : steps) k += s.oracle ? 1 : 0;
  return k;
}

int QuantumRoundProgram::oracle_parallelism() const {
  int p = 0;
  for (const auto& s : steps)
    if (s.oracle) p = std::max(p, int(s.oracle->regs.size()));
  return p;
}

std::string QuantumRoundProgram::trace() const {
  using json = nlohmann::ordered_json;
  std::string out;
  int idx = 0;
  for (const auto& step : steps) {
    json line;
    line["step"] = idx++;
    if (step.oracle) {
      line["kind"] = "oracle";
      line["mode"] = step.oracle->mode == OracleMode::phase ? "phase" : "bitflip";
      json regs = json::array();
      for (const auto& r : step.oracle->regs) {
        json jr;
        jr["index"] = r.index_qubits;
        if (r.target >= 0) jr["target"] = r.target;
        jr["base"] = r.base;
        if (r.limit > 0) jr["limit"] = r.limit;
        regs.push_back(std::move(jr));
      }
      line["registers"] = std::move(regs);
    } else {
      line["kind"] = "unitary";
      line["label"] = step.label;
      json gates = json::array();
      for (const auto& g : step.gates) {
        static const char* names[] = {"h",        "x",           "z",       "cz", "ch",
                                      "phase_fn", "permutation", "prepare", "reflect"};
        json jg;
        jg["gate"] = names[int(g.kind)];
        jg["qubits"] = g.qubits;
        if (g.support > 0) jg["support"] = g.support;
        gates.push_back(std::move(jg));
      }
      line["gates"] = std::move(gates);
    }
    out += line.dump();
    out += '\n';
  }
  {
    json line;
    line["step"] = idx;
    line["kind"] = "measure";
    line["qubits"] = measured;
    out += line.dump();
    out += '\n';
  }
  return out;
}

RunOutcome run_program(const QuantumRoundProgram& prog, const Bits& x, int shots,
                       std::uint64_t seed) {
  RunOutcome out;
  for (int q : prog.measured)
    if (q < 0 || q >= std::max(prog.qubits, 1)) throw IndexOutOfRange("measured qubit");

  const auto decode_answer = [&](const std::vector<double>& joint,
                                 const std::function<int(std::uint64_t)>& decide) {
    out.answer = {0.0, 0.0};
    for (std::uint64_t w = 0; w < joint.size(); ++w) out.answer[decide(w) ? 1 : 0] += joint[w];
    out.has_answer = true;
  };
  const auto parity_word_decide = [&](std::uint64_t w) {
    const auto& pd = *prog.decode_parity;
    int parity = 0;
    for (int i = 0; i < pd.copies; ++i) {
      int ones = 0;
      for (int r = 0; r < pd.repetitions; ++r) ones += int(w >> (i * pd.repetitions + r) & 1);
      parity ^= ones >= pd.accept_count ? 1 : 0;
    }
    return parity;
  };

  if (prog.qubits <= prog.cap && prog.qubits <= StateVector::kHardCap) {
    if (int(prog.measured.size()) > 24) throw CapExceeded("measured register too wide");
    StateVector s = StateVector::basis(prog.qubits);
    for (const auto& step : prog.steps) {
      if (step.oracle)
        run_oracle_step(s, x, *step.oracle);
      else
        for (const auto& g : step.gates) run_gate(s, g);
    }
    out.dist = measured_joint(s, prog.measured);
    out.bit_marginals.assign(prog.measured.size(), 0.0);
    for (std::uint64_t w = 0; w < out.dist.size(); ++w)
      for (std::size_t k = 0; k < prog.measured.size(); ++k)
        if (w >> k & 1) out.bit_marginals[k] += out.dist[w];
    if (prog.decide)
      decode_answer(out.dist, prog.decide);
    else if (prog.decode_parity)
      decode_answer(out.dist, parity_word_decide);
    if (shots > 0) {
      Rng rng = rng_stream(seed, 0x54a7);
      out.shots.reserve(shots);
      for (int t = 0; t < shots; ++t) out.shots.push_back(sample_dist(out.dist, rng));
    }
    return out;
  }

  // Oversized program: split into independent qubit blocks. Full-basis gates
  // or an oversized block are genuine capacity failures.
  for (const auto& step : prog.steps)
    if (!step.oracle)
      for (const auto& g : step.gates)
        if (full_basis_gate(g)) throw CapExceeded("program exceeds the qubit cap");
  UnionFind uf(prog.qubits);
  const auto join_all = [&](const std::vector<int>& qs) {
    for (std::size_t k = 1; k < qs.size(); ++k) uf.join(qs[0], qs[k]);
  };
  for (const auto& step : prog.steps) {
    if (step.oracle) {
      for (const auto& r : step.oracle->regs) {
        auto qs = r.index_qubits;
        if (r.target >= 0) qs.push_back(r.target);
        join_all(qs);
      }
    } else {
      for (const auto& g : step.gates) join_all(g.qubits);
    }
  }
  std::vector<Block> blocks;
  std::vector<int> root_block(prog.qubits, -1);
  for (int q = 0; q < prog.qubits; ++q) {
    const int r = uf.find(q);
    if (root_block[r] < 0) {
      root_block[r] = int(blocks.size());
      blocks.emplace_back();
    }
    blocks[root_block[r]].qubits.push_back(q);
  }
  for (const auto& b : blocks)
    if (int(b.qubits.size()) > prog.cap || int(b.qubits.size()) > StateVector::kHardCap)
      throw CapExceeded("program exceeds the qubit cap");
  for (std::size_t k = 0; k < prog.measured.size(); ++k)
    blocks[root_block[uf.find(prog.measured[k])]].measured_slots.push_back(int(k));

  out.bit_marginals.assign(prog.measured.size(), 0.0);
  for (auto& b : blocks) {
    const StateVector s = simulate_qubits(prog, x, b.qubits);
    std::vector<int> local_measured;
    local_measured.reserve(b.measured_slots.size());
    for (int slot : b.measured_slots)
      local_measured.push_back(local_index(b.qubits, prog.measured[slot]));
    b.joint = measured_joint(s, local_measured);
    for (std::uint64_t w = 0; w < b.joint.size(); ++w)
      for (std::size_t k = 0; k < b.measured_slots.size(); ++k)
        if (w >> k & 1) out.bit_marginals[b.measured_slots[k]] += b.joint[w];
  }

  if (prog.decode_parity) {
    const auto& pd = *prog.decode_parity;
    // blocks hold at most one repetition of a copy each, so the vote bits of
    // a copy are independent and a Poisson-binomial gives the exact vote
    for (const auto& b : blocks) {
      std::vector<int> seen;
      for (int slot : b.measured_slots) seen.push_back(slot / pd.repetitions);
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw LayoutMismatch("parity decode needs per-repetition blocks");
    }
    double corr = 1.0;
    for (int i = 0; i < pd.copies; ++i) {
      std::vector<double> reps(out.bit_marginals.begin() + std::size_t(i) * pd.repetitions,
                               out.bit_marginals.begin() + std::size_t(i + 1) * pd.repetitions);
      const auto ones = poisson_binomial(reps);
      double q1 = 0.0;
      for (int t = pd.accept_count; t < int(ones.size()); ++t) q1 += ones[t];
      corr *= 1.0 - 2.0 * q1;
    }
    out.answer = {(1.0 + corr) / 2.0, (1.0 - corr) / 2.0};
    out.has_answer = true;
  }

  if (shots > 0) {
    Rng rng = rng_stream(seed, 0x54a7);
    out.shots.assign(shots, 0);
    for (int t = 0; t < shots; ++t) {
      std::uint64_t word = 0;
      for (const auto& b : blocks) {
        const std::uint64_t w = sample_dist(b.joint, rng);
        for (std::size_t k = 0; k < b.measured_slots.size(); ++k)
          if (w >> k & 1) word |= std::uint64_t(1) << b.measured_slots[k];
      }
      out.shots[t] = word;
    }
  }
  return out;
}

}  // namespace qpar
