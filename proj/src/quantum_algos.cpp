#include <algorithm>
#include <cmath>

#include "qpar/constructions.hpp"
#include "qpar/errors.hpp"
#include "qpar/quantum.hpp"
#include "qpar/rng.hpp"

namespace qpar {

namespace {

std::vector<int> iota_vec(int from, int count) {
  std::vector<int> v(count);
  for (int k = 0; k < count; ++k) v[k] = from + k;
  return v;
}

}  // namespace

int HybridOutcome::max_parallelism() const {
  int m = 0;
  for (int w : round_widths) m = std::max(m, w);
  return m;
}

// --- Grover ----------------------------------------------------------------

QuantumRoundProgram grover_parallel(int N, int p, int rounds) {
  if (N < 1 || p < 1 || p > N || N % p != 0)
    throw ArityMismatch("partitioned search needs p dividing N");
  if (rounds < 0) throw ArityMismatch("negative round count");
  const int M = N / p;
  const int bits = M > 1 ? ceil_log2((std::uint64_t)M) : 0;
  QuantumRoundProgram prog;
  prog.name = "grover";
  prog.qubits = p * bits;

  ProgramStep init;
  init.label = "init";
  for (int j = 0; j < p && bits > 0; ++j)
    init.gates.push_back({GateStep::Kind::prepare, iota_vec(j * bits, bits), M, {}, {}});
  prog.steps.push_back(std::move(init));

  for (int r = 0; r < rounds; ++r) {
    ProgramStep mark;
    mark.oracle.emplace();
    mark.oracle->mode = OracleMode::phase;
    for (int j = 0; j < p; ++j)
      mark.oracle->regs.push_back({iota_vec(j * bits, bits), -1, std::int64_t(j) * M, M});
    prog.steps.push_back(std::move(mark));

    ProgramStep diffuse;
    diffuse.label = "diffusion";
    for (int j = 0; j < p && bits > 0; ++j)
      diffuse.gates.push_back({GateStep::Kind::reflect, iota_vec(j * bits, bits), M, {}, {}});
    prog.steps.push_back(std::move(diffuse));
  }
  prog.measured = iota_vec(0, prog.qubits);
  return prog;
}

double grover_success(int N, int p, int rounds, int marked) {
  if (marked < 0 || marked >= N) throw IndexOutOfRange("marked element outside [N]");
  const auto prog = grover_parallel(N, p, rounds);
  Bits x(N);
  x.set(marked, 1);
  const auto out = run_program(prog, x);
  const int M = N / p;
  const int bits = M > 1 ? ceil_log2((std::uint64_t)M) : 0;
  const int owner = marked / M;
  const std::uint64_t loc = std::uint64_t(marked % M);
  double success = 0.0;
  for (std::uint64_t w = 0; w < out.dist.size(); ++w)
    if ((w >> (owner * bits) & ((std::uint64_t(1) << bits) - 1)) == loc) success += out.dist[w];
  return success;
}

double grover_closed_form(int N, int p, int rounds) {
  const double theta = std::asin(std::sqrt(double(p) / double(N)));
  const double s = std::sin((2.0 * rounds + 1.0) * theta);
  return s * s;
}

// --- Forrelation -------------------------------------------------------------

QuantumRoundProgram forrelation_program(int n) {
  if (n < 1 || n > 12) throw ArityMismatch("table parameter out of range");
  QuantumRoundProgram prog;
  prog.name = "forrelation";
  prog.qubits = n + 1;  // table register plus the control qubit on top

  ProgramStep init;
  init.label = "superpose";
  init.gates.push_back({GateStep::Kind::h, iota_vec(0, n + 1), 0, {}, {}});
  prog.steps.push_back(std::move(init));

  // one phase query against X||Y: the control qubit is the top address bit,
  // so the branches pick up X phases (control 0) and Y phases (control 1)
  ProgramStep query;
  query.oracle.emplace();
  query.oracle->mode = OracleMode::phase;
  query.oracle->regs.push_back({iota_vec(0, n + 1), -1, 0, 0});
  prog.steps.push_back(std::move(query));

  ProgramStep extract;
  extract.label = "overlap-test";
  for (int k = 0; k < n; ++k)
    extract.gates.push_back({GateStep::Kind::ch, {n, k}, 0, {}, {}});
  extract.gates.push_back({GateStep::Kind::h, {n}, 0, {}, {}});
  prog.steps.push_back(std::move(extract));

  prog.measured = {n};
  prog.decide = [](std::uint64_t w) { return w == 0 ? 1 : 0; };
  return prog;
}

double forrelation_acceptance(const Bits& tables, int n) {
  if (tables.n != (1 << (n + 1))) throw ArityMismatch("table pair has the wrong width");
  const auto out = run_program(forrelation_program(n), tables);
  return out.answer[1];
}

// --- parity of inner bits in one round ---------------------------------------

namespace {

QuantumRoundProgram build_parity_program(int m, int p, const InnerBitSolver& inner,
                                         std::int64_t x_offset, const std::string& name) {
  if (m < 1) throw ArityMismatch("parity needs at least one copy");
  const int R = inner.repetitions;
  if (R < 1 || inner.accept_count < 1 || inner.accept_count > R)
    throw ArityMismatch("vote parameters out of range");
  if (p < m * R)
    throw ParallelismTooSmall("one-round parity needs p >= copies * repetitions");

  QuantumRoundProgram prog;
  prog.name = name;
  const int B = inner.block_qubits();
  prog.qubits = m * R * B;
  prog.decode_parity = ParityDecode{m, R, inner.accept_count};

  ProgramStep init;
  init.label = "superpose";
  ProgramStep query;
  query.oracle.emplace();
  query.oracle->mode =
      inner.kind == InnerBitSolver::Kind::bit_read ? OracleMode::bitflip : OracleMode::phase;
  ProgramStep extract;
  extract.label = "overlap-test";

  for (int i = 0; i < m; ++i) {
    for (int r = 0; r < R; ++r) {
      const int qb = (i * R + r) * B;
      if (inner.kind == InnerBitSolver::Kind::bit_read) {
        query.oracle->regs.push_back({{}, qb, x_offset + i, 1});
        prog.measured.push_back(qb);
      } else {
        const int n = inner.n;
        init.gates.push_back({GateStep::Kind::h, iota_vec(qb, n + 1), 0, {}, {}});
        query.oracle->regs.push_back(
            {iota_vec(qb, n + 1), -1, x_offset + std::int64_t(i) * (1 << (n + 1)), 0});
        for (int k = 0; k < n; ++k)
          extract.gates.push_back({GateStep::Kind::ch, {qb + n, qb + k}, 0, {}, {}});
        extract.gates.push_back({GateStep::Kind::h, {qb + n}, 0, {}, {}});
        // flip so that a measured 1 votes for inner value 1
        extract.gates.push_back({GateStep::Kind::x, {qb + n}, 0, {}, {}});
        prog.measured.push_back(qb + n);
      }
    }
  }
  if (!init.gates.empty()) prog.steps.push_back(std::move(init));
  prog.steps.push_back(std::move(query));
  if (!extract.gates.empty()) prog.steps.push_back(std::move(extract));
  return prog;
}

}  // namespace

QuantumRoundProgram parity_parallel_program(int m, int p, const InnerBitSolver& inner) {
  return build_parity_program(m, p, inner, 0, "parity");
}

QuantumRoundProgram ana_quantum_program(const AnaQuantumParams& params) {
  const int w = ceil_log2((std::uint64_t)params.blocks);
  const std::int64_t x_arity = std::int64_t(params.blocks) * w;
  InnerBitSolver inner{InnerBitSolver::Kind::forrelation, params.inner_n, params.repetitions,
                       params.accept_count};
  const int p = params.parallelism > 0 ? params.parallelism : params.copies * params.repetitions;
  return build_parity_program(params.copies, p, inner, x_arity, "ana");
}

// --- cheat-sheet hybrid -------------------------------------------------------

CheatSheetLayout cheatsheet_quantum_layout(int copies) {
  return canonical_cheatsheet_layout(2, 1, 1, copies, 0);
}

BooleanFunction cheatsheet_quantum_function(int copies) {
  return make_canonical_cheatsheet(make_dj(2), 1, 1, copies, 0);
}

HybridOutcome cheatsheet_quantum_3round(const CheatsheetQuantumParams& params, const Bits& z,
                                        std::uint64_t seed) {
  const int c = params.copies;
  if (c < 1 || c > 16) throw ArityMismatch("copy count out of range");
  const CheatSheetLayout lay = cheatsheet_quantum_layout(c);
  if (z.n != lay.arity()) throw ArityMismatch("input width does not match the layout");
  const int R = params.repetitions > 0 ? params.repetitions : 1 + ceil_log2((std::uint64_t)c);
  const int min_p = std::max(c * R, lay.cell_size);
  const int p = params.parallelism > 0 ? params.parallelism : min_p;
  if (p < min_p) throw ParallelismTooSmall("need p >= max(copies * repetitions, cell size)");

  const BooleanFunction f_inner =
      compose(make_dj(2), {make_and_or(1, 1), make_and_or(1, 1)});
  const CertChecker checker = default_cert_checker(f_inner, lay);
  Rng rng = rng_stream(seed, 0xc5a2);

  HybridOutcome out;
  // round 1: one exact phase query per (copy, repetition)
  Bits ell(c);
  for (int i = 0; i < c; ++i) {
    int ones = 0;
    for (int r = 0; r < R; ++r) {
      StateVector s = StateVector::basis(1);
      apply_h(s, 0);
      ParallelOracle o;
      o.x = z;
      o.mode = OracleMode::phase;
      o.layout = {1, 1, 0, {std::int64_t(lay.copy_offset(i))}};
      apply_oracle(s, o);
      apply_h(s, 0);
      ones += rng_double(rng) < std::norm(s.amp[1]) ? 1 : 0;
    }
    ell.set(i, 2 * ones > R ? 1 : 0);
  }
  out.round_widths.push_back(c * R);

  // round 2: the cell the estimates point at
  const Bits cell = lay.cell_bits(z, (int)ell.index());
  out.round_widths.push_back(lay.cell_size);

  // round 3: the certified address positions
  const auto fmt = CertificateFormat::for_arity(lay.inner_arity);
  const auto certs = decode_certificates(cell, fmt, c, lay.inner_arity);
  std::vector<Bits> copies(c, Bits(lay.inner_arity));
  int read = 0;
  if (certs) {
    for (int i = 0; i < c; ++i)
      for (const auto& [idx, val] : (*certs)[i].entries) {
        copies[i].set(idx, z.get(lay.copy_offset(i) + idx));
        ++read;
      }
  }
  out.round_widths.push_back(read);
  out.rounds = 3;
  out.answer = cell.popcount() != 0 && checker(cell, copies, ell) ? 1 : 0;
  return out;
}

// --- two-adaptive hybrid ------------------------------------------------------

BooleanFunction two_adaptive_quantum_inner() {
  std::vector<int> outputs(16);
  for (int idx = 0; idx < 16; ++idx)
    outputs[idx] = forrelation_value(Bits::from_index(4, idx), 1) > 0 ? 1 : 0;
  return BooleanFunction::total_from_bits(4, outputs);
}

HybridOutcome two_adaptive_quantum(const TwoAdaptiveQuantumParams& params, const Bits& z,
                                   std::uint64_t seed) {
  const int s = params.segments;
  const int R = params.repetitions;
  if (s < 1 || s > 8) throw ArityMismatch("segment count out of range");
  if (R < 1) throw ArityMismatch("need at least one repetition");
  const int n = 4;  // inner arity; sub-segments are n blocks of n bits
  const TwoAdaptiveLayout lay{n, s};
  if (z.n != lay.arity()) throw ArityMismatch("input width does not match the layout");
  const int sub = n * n;
  const int verify_width = s * n * (sub - 1) + 1;
  const int min_p = std::max(lay.bc_size() + s * R, verify_width);
  const int p = params.parallelism > 0 ? params.parallelism : min_p;
  if (p < min_p) throw ParallelismTooSmall("declared parallelism below the round widths");

  HybridOutcome out;
  out.rounds = 2;
  Rng rng = rng_stream(seed, 0x2ada);

  // round 1 (classical half): the whole bicertificate region
  bool valid = true;
  std::vector<std::vector<Bicertificate>> bc(s);
  for (int i = 0; i < s && valid; ++i) {
    bc[i].reserve(n);
    for (int j = 0; j < n; ++j) {
      const auto d =
          decode_bicertificate(z.slice_bits(lay.bc_offset(i, j), lay.bc_cell()), lay);
      if (!d) {
        valid = false;
        break;
      }
      bc[i].push_back(*d);
    }
  }

  // round 1 (quantum half): per segment, R phase queries over the raw
  // address segment; post-processing and measurement happen next round once
  // the bicertificates pin down the forced pattern
  std::vector<std::vector<StateVector>> states(s);
  for (int i = 0; i < s; ++i) {
    states[i].reserve(R);
    for (int r = 0; r < R; ++r) {
      StateVector sv = StateVector::basis(6);  // 4 location qubits + 2 sub-segment qubits
      for (int q = 0; q < 6; ++q) apply_h(sv, q);
      ParallelOracle o;
      o.x = z;
      o.mode = OracleMode::phase;
      o.layout = {1, 6, 0, {std::int64_t(lay.add_offset(i, 0))}};
      apply_oracle(sv, o);
      states[i].push_back(std::move(sv));
    }
  }
  out.round_widths.push_back(lay.bc_size() + s * R);

  if (!valid) {
    out.round_widths.push_back(0);
    out.answer = 0;
    return out;
  }

  // round 2 (quantum post-processing): cancel the forced phases, move each
  // intersection to location 0, then run the overlap test per sub-segment
  Bits tg(s);
  for (int i = 0; i < s; ++i) {
    std::vector<int> inter(n), forced(sub * n, 0);
    for (int j = 0; j < n; ++j) {
      inter[j] = bc[i][j].intersection();
      for (int loc : bc[i][j].one_part) forced[j * sub + loc] = 1;
      forced[j * sub + inter[j]] = 0;
    }
    int votes = 0, used = 0;
    for (int r = 0; r < R; ++r) {
      StateVector& sv = states[i][r];
      apply_phase_fn(sv, [&](std::uint64_t zz) {
        const int w = int(zz & 15), j = int(zz >> 4);
        return w != inter[j] && forced[j * sub + w] == 1;
      });
      apply_permutation(sv, [&](std::uint64_t zz) {
        const int w = int(zz & 15), j = int(zz >> 4);
        if (w == inter[j]) return zz & ~std::uint64_t(15);
        if (w == 0) return (zz & ~std::uint64_t(15)) | std::uint64_t(inter[j]);
        return zz;
      });
      apply_ch(sv, 5, 4);
      apply_h(sv, 5);
      std::vector<double> dist(64);
      for (int zz = 0; zz < 64; ++zz) dist[zz] = std::norm(sv.amp[zz]);
      double u = rng_double(rng);
      int m = 63;
      for (int zz = 0; zz < 64; ++zz) {
        u -= dist[zz];
        if (u < 0) {
          m = zz;
          break;
        }
      }
      if ((m & 15) == 0) {  // only location-0 outcomes carry the overlap statistics
        ++used;
        votes += (m >> 5 & 1) == 0 ? 1 : 0;
      }
    }
    if (2 * votes == used)
      tg.set(i, rng_bool(rng) ? 1 : 0);
    else
      tg.set(i, 2 * votes > used ? 1 : 0);
  }

  // round 2 (classical half): verify the forced pattern away from the
  // intersections, then read the data bit at the estimated target
  bool structure_ok = true;
  for (int i = 0; i < s && structure_ok; ++i)
    for (int j = 0; j < n && structure_ok; ++j) {
      const int inter = bc[i][j].intersection();
      std::vector<int> expected(sub, 0);
      for (int loc : bc[i][j].one_part) expected[loc] = 1;
      for (int w = 0; w < sub; ++w) {
        if (w == inter) continue;
        if (z.get(lay.add_offset(i, j) + w) != expected[w]) {
          structure_ok = false;
          break;
        }
      }
    }
  out.round_widths.push_back(verify_width);
  out.answer = structure_ok ? z.get(lay.dt_offset() + (int)tg.index()) : 0;
  return out;
}

// --- pointer-chasing parity reduction ----------------------------------------

ParityReductionInstance parity_reduction_instance(const Bits& X) {
  if (X.n < 1) throw ArityMismatch("empty parity instance");
  const int k = 2 * X.n;
  const int blocks = 1 << ceil_log2((std::uint64_t)k + 2);
  const int w = ceil_log2((std::uint64_t)blocks);
  ParityReductionInstance inst;
  inst.blocks = blocks;
  inst.hops = X.n;
  inst.input = Bits(blocks * w);
  for (int i = 0; i < X.n; ++i) {
    const int xi = X.get(i);
    inst.input.set_slice(2 * i * w, w, std::uint64_t(2 * i + 2 + xi));
    inst.input.set_slice((2 * i + 1) * w, w, std::uint64_t(2 * i + 3 - xi));
  }
  return inst;
}

}  // namespace qpar
