#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/cheatsheet.hpp"
#include "qpar/two_adaptive.hpp"

namespace qpar {

// Dense little-endian statevector: qubit q contributes 2^q to the basis index.
struct StateVector {
  static constexpr int kHardCap = 26;  // memory guard, separate from program caps

  int qubits = 0;
  std::vector<std::complex<double>> amp;

  static StateVector basis(int qubits, std::uint64_t index = 0);
  std::uint64_t size() const { return amp.size(); }
  double norm_sq() const;
};

// Gates mutate in place; every one of them is unitary.
void apply_h(StateVector& s, int q);
void apply_x(StateVector& s, int q);
void apply_z(StateVector& s, int q);
void apply_cz(StateVector& s, int a, int b);
void apply_ch(StateVector& s, int control, int target);
// Flips the sign of every basis state satisfying the predicate.
void apply_phase_fn(StateVector& s, const std::function<bool(std::uint64_t)>& pred);
// Relabels basis states: amp'[pi(z)] = amp[z]; pi must be a bijection.
void apply_permutation(StateVector& s, const std::function<std::uint64_t(std::uint64_t)>& pi);
// |0..0> of the register -> uniform over its first `support` values. The
// register must currently hold |0..0> (an initialization gate).
void apply_prepare_uniform(StateVector& s, const std::vector<int>& reg, int support);
// Reflection about the uniform state over the register's first `support`
// values (Grover diffusion); -identity on the rest of the register space.
void apply_reflect_uniform(StateVector& s, const std::vector<int>& reg, int support);

enum class OracleMode { bitflip, phase };

// p index registers of index_bits each (register j on qubits [j*index_bits,
// (j+1)*index_bits)), then p target bits when mode is bitflip, then workspace.
// base[j] shifts register j's addresses into x; empty base means all zero.
struct RegisterLayout {
  int p = 0;
  int index_bits = 0;
  int workspace = 0;
  std::vector<std::int64_t> base;

  int index_qubit(int reg, int bit) const { return reg * index_bits + bit; }
  int target_qubit(int reg) const { return p * index_bits + reg; }
  int qubits(OracleMode mode) const {
    return p * index_bits + (mode == OracleMode::bitflip ? p : 0) + workspace;
  }
};

struct ParallelOracle {
  Bits x;
  OracleMode mode = OracleMode::phase;
  RegisterLayout layout;
};

// |i_1..i_p>|b_1..b_p> -> |i_1..i_p>|b_1^x_{i_1}..b_p^x_{i_p}|; phase mode
// multiplies by (-1)^{sum_j x_{i_j}} instead. LayoutMismatch when the layout
// does not fit the state or some register address can leave x.
void apply_oracle(StateVector& s, const ParallelOracle& o);

// --- round programs -------------------------------------------------------

struct GateStep {
  enum class Kind { h, x, z, cz, ch, phase_fn, permutation, prepare, reflect };
  Kind kind = Kind::h;
  std::vector<int> qubits;  // h/x/z: targets; cz/ch: {control, target}; prepare/reflect: register
  int support = 0;
  std::function<bool(std::uint64_t)> pred;
  std::function<std::uint64_t(std::uint64_t)> permute;
};

struct OracleStep {
  struct Reg {
    std::vector<int> index_qubits;  // little-endian
    int target = -1;                // bitflip only
    std::int64_t base = 0;
    std::int64_t limit = 0;  // 0 = 2^bits; addresses past it read as 0 (partition padding)
  };
  OracleMode mode = OracleMode::phase;
  std::vector<Reg> regs;
};

struct ProgramStep {
  std::string label;
  std::vector<GateStep> gates;        // unitary step when no oracle
  std::optional<OracleStep> oracle;
};

// Per-copy vote over repeated measurements: copy bit = [#ones among its
// repetitions >= accept_count]; program answer = parity of the copy bits.
struct ParityDecode {
  int copies = 1;
  int repetitions = 1;
  int accept_count = 1;
};

struct QuantumRoundProgram {
  std::string name;
  int qubits = 0;
  int cap = 24;
  std::vector<ProgramStep> steps;  // Figure-style alternation U_0, O, U_1, ..., U_k
  std::vector<int> measured;       // measured qubits; output word is little-endian in this order
  std::function<int(std::uint64_t)> decide;  // optional classical decode of the word
  std::optional<ParityDecode> decode_parity;

  int oracle_rounds() const;
  int oracle_parallelism() const;  // max register count over oracle steps
  std::string trace() const;       // JSON lines: step, gate/oracle, registers
};

struct RunOutcome {
  std::vector<double> dist;  // joint over measured bits; empty if only blockwise marginals exist
  std::vector<double> bit_marginals;  // P(measured bit = 1), always filled
  std::array<double, 2> answer{0.0, 0.0};
  bool has_answer = false;
  std::vector<std::uint64_t> shots;
};

// Exact final distribution; seeded shots on request. Programs whose steps
// split into independent qubit blocks are simulated blockwise, so fused
// parity programs may exceed the cap as long as every block fits.
RunOutcome run_program(const QuantumRoundProgram& prog, const Bits& x, int shots = 0,
                       std::uint64_t seed = 0);

// --- named programs -------------------------------------------------------

// p independent Grover searches over the p partitions of [N] (p | N). Each
// register holds ceil_log2(N/p) qubits; `rounds` oracle+diffusion iterations.
QuantumRoundProgram grover_parallel(int N, int p, int rounds);
// Probability that the partition owning `marked` measures its local index.
double grover_success(int N, int p, int rounds, int marked);
double grover_closed_form(int N, int p, int rounds);

// One (n+1)-bit phase query against the X||Y table; Hadamard-test control
// qubit turns the overlap into acceptance (1+Phi)/2. Answer bit 1 = accept.
QuantumRoundProgram forrelation_program(int n);
double forrelation_acceptance(const Bits& tables, int n);

struct InnerBitSolver {
  enum class Kind { bit_read, forrelation };
  Kind kind = Kind::bit_read;
  int n = 0;            // forrelation table size parameter
  int repetitions = 1;  // per-copy repetitions, all inside the single round
  int accept_count = 1; // copy bit = [#accepting repetitions >= this]
  int block_arity() const { return kind == Kind::bit_read ? 1 : 1 << (n + 1); }
  int block_qubits() const { return kind == Kind::bit_read ? 1 : n + 1; }
};

// PARITY of m inner bits in one round: every (copy, repetition) sub-circuit
// runs in its own register block and the single oracle step queries them all.
QuantumRoundProgram parity_parallel_program(int m, int p, const InnerBitSolver& inner);

struct AnaQuantumParams {
  int blocks = 4;  // pointer component: blocks cells of ceil_log2(blocks) bits
  int hops = 1;
  int copies = 2;  // parity width of the g-component
  int inner_n = 2;
  int parallelism = 0;  // 0 = minimum legal (copies * repetitions)
  int repetitions = 15;
  int accept_count = 11;
};

// One-round solver for the composed function's g-component; every oracle
// address lands past the pointer region.
QuantumRoundProgram ana_quantum_program(const AnaQuantumParams& params);

// --- hybrid algorithms ----------------------------------------------------

struct HybridOutcome {
  int answer = 0;
  int rounds = 0;
  std::vector<int> round_widths;  // queried bits + oracle registers, per round
  int max_parallelism() const;
};

struct CheatsheetQuantumParams {
  int copies = 1;
  int parallelism = 0;  // 0 = minimum legal
  int repetitions = 0;  // 0 = 1 + ceil_log2(copies)
};

// Round 1: exact one-query quantum solve of every address copy (repeated).
// Round 2: classical read of the selected cell. Round 3: classical read of
// the certified positions, then verification. The toy inner is the two-bit
// distinguish-all-zeros function under a trivial 1x1 AND-of-ORs lift.
CheatSheetLayout cheatsheet_quantum_layout(int copies);
BooleanFunction cheatsheet_quantum_function(int copies);
HybridOutcome cheatsheet_quantum_3round(const CheatsheetQuantumParams& params, const Bits& z,
                                        std::uint64_t seed);

struct TwoAdaptiveQuantumParams {
  int segments = 2;
  int parallelism = 0;  // 0 = minimum legal
  int repetitions = 48; // round-1 sub-circuits per segment
};

// Balanced toy inner: total on 4 bits, 1 iff the table pair's correlation
// sum is positive (it is +-1/sqrt(2) on every input, so one phase query
// decides it with probability ~0.854).
BooleanFunction two_adaptive_quantum_inner();
// Round 1: full bicertificate region classically + per-segment phase queries
// over whole address segments. Round 2: classical structure verification and
// the data bit at the estimated target, with the bicertificate-informed
// post-processing unitaries applied before measurement. Answer 0 on any
// structural violation.
HybridOutcome two_adaptive_quantum(const TwoAdaptiveQuantumParams& params, const Bits& z,
                                   std::uint64_t seed);

// --- pointer-chasing parity reduction --------------------------------------

struct ParityReductionInstance {
  Bits input;
  int blocks = 0;
  int hops = 0;
};

// Chain input whose |X| dereferences from cell 0 end on a label of parity
// PARITY(X): cell 2i points to 2i+2+X_i, cell 2i+1 to 2i+3-X_i, rest zero.
ParityReductionInstance parity_reduction_instance(const Bits& X);

}  // namespace qpar
