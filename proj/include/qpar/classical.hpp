#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/cheatsheet.hpp"
#include "qpar/rng.hpp"
#include "qpar/two_adaptive.hpp"

namespace qpar {

// ---- strategy plumbing ----

struct TranscriptRound {
  std::vector<int> indices;
  std::vector<int> answers;
};

struct Transcript {
  std::vector<TranscriptRound> rounds;
  int final_answer = -1;
  bool answered = false;
  std::optional<int> truth;  // known only when run against a concrete input

  int round_count() const { return (int)rounds.size(); }
  int query_count() const {
    int q = 0;
    for (auto& r : rounds) q += (int)r.indices.size();
    return q;
  }
  bool correct() const { return answered && truth && *truth == final_answer; }
  // one JSON object per round, then a closing summary object
  std::string to_jsonl() const;
};

struct StrategyStep {
  std::optional<int> answer;
  std::vector<int> query;
  static StrategyStep ask(std::vector<int> q) { return {std::nullopt, std::move(q)}; }
  static StrategyStep decide(int a) { return {a, {}}; }
};

// A deterministic decision procedure; randomized flavors are deterministic
// over an explicit seed consumed at construction time.
struct QueryStrategy {
  int parallelism = 1;
  std::string name;
  std::function<StrategyStep(const Transcript&)> next;
};

// Stateful adversary: answers query sets and, on demand, exhibits an input
// consistent with everything answered so far achieving the requested value
// (-1 = any value).
struct AdaptiveAnswerer {
  std::string name;
  std::function<std::vector<int>(const std::vector<int>&)> answer;
  std::function<std::optional<Bits>(int value)> complete;
};

Transcript run_strategy(const QueryStrategy& s, const Bits& x, const BooleanFunction& f);
Transcript run_strategy(const QueryStrategy& s, AdaptiveAnswerer& adv, int arity,
                        int max_rounds = 1 << 12);

QueryStrategy read_all_strategy(const BooleanFunction& f, int p);

// ---- exact deterministic round complexity ----

enum class Granularity { bit, block };

// Exact minimum round count over deterministic p-parallel strategies; for a
// partial function a branch ends once every consistent completion agrees.
// Block granularity queries whole blocks of f's block metadata.
int exact_parallel_D(const BooleanFunction& f, int p, Granularity g = Granularity::bit);

// An optimal strategy realizing exact_parallel_D, ties broken toward the
// lexicographically smallest query set. Emits bit indices in both modes.
QueryStrategy make_optimal_strategy(const BooleanFunction& f, int p,
                                    Granularity g = Granularity::bit);

// ---- distributional (Yao) success ----

struct WeightedInput {
  Bits x;
  double w = 1.0;
};

// Max over deterministic p-parallel `rounds`-round strategies of
// Pr[answer = f(x)] for x from the given distribution, by exact expectimax.
double distributional_success(const BooleanFunction& f, const std::vector<WeightedInput>& dist,
                              int p, int rounds);

// ---- pointer chasing ----

// min(hops, ceil(blocks/p)) rounds of p block queries: chain following when
// the chain is short, otherwise read everything.
QueryStrategy pointer_det_algorithm(int blocks, int hops, int p);

// Answers each queried cell with a pointer to a fresh cell, so q rounds
// reveal a chain of length at most q; both completions stay available while
// the round budget holds.
AdaptiveAnswerer pointer_adversary(int blocks, int hops, int p, int round_budget);

// length of the chain from cell 0 readable off answered cells alone
int revealed_chain_length(const std::vector<int>& cell_labels, int blocks);

// ---- generic / lifted adversaries ----

// Picks answers keeping both output values consistent as long as possible.
AdaptiveAnswerer balancing_adversary(const BooleanFunction& f, int round_budget);

// Routes queries by component; a value-b completion pairs component
// completions with equal outputs.
AdaptiveAnswerer cor_det_adversary(const BooleanFunction& f, const BooleanFunction& g,
                                   AdaptiveAnswerer f_adv, AdaptiveAnswerer g_adv,
                                   int round_budget);

// Address queries go to per-copy inner adversaries, cell queries answer 0.
// complete(1) fills the addressed cell with full certificates of the chosen
// address completion; complete(0) leaves all cells zero.
AdaptiveAnswerer cheatsheet_det_adversary(const BooleanFunction& f_inner,
                                          const CheatSheetLayout& layout, int round_budget);

// ---- explicit upper-bound algorithms ----

enum class AlgModel { det, rand };

// Three-phase strategy for the canonical cheat sheet over f_base lifted with
// ao_blocks x ao_block_size AND-of-ORs addresses: solve the address copies,
// read the indexed cell in one round, then read the certified positions and
// decide. det reads every address bit; rand estimates each AND-of-ORs value
// from `samples` random OR probes.
QueryStrategy cheatsheet_parallel_algorithm(AlgModel model, const BooleanFunction& f_base,
                                            int ao_blocks, int ao_block_size, int c,
                                            int cell_size, int p, int samples = 2,
                                            std::uint64_t seed = 0);

// Two rounds: all bicertificate cells plus `repetitions` random sub-segment
// probes per segment, then certified positions and the addressed data bit.
// The estimator treats the inner f as one-sided (any sampled 1 settles it).
QueryStrategy two_adaptive_rand_algorithm(const BooleanFunction& f,
                                          const TwoAdaptiveLayout& layout, int repetitions,
                                          std::uint64_t seed);

// Runs an outer strategy of parallelism ceil(p/M) on f, expanding each outer
// query into full reads of the selected inner copies, M = inner arity.
QueryStrategy compose_parallel_strategy(const QueryStrategy& outer, const BooleanFunction& inner,
                                        int copies, int p);

// ---- reduction machinery ----

// Per input bit: k-1 zero sub-blocks, a seeded random later sub-block holding
// NOT(x_i), all other sub-blocks 1; the block's k-subset-sum then equals x_i
// whenever modulus > k.
Bits build_ksum_lift(const Bits& x, int sub_blocks, int k, int block_bits, int modulus,
                     std::uint64_t seed);

// One star per length-m block at a seeded uniform position; returns how many
// of the queried positions hit a star.
int star_query_count(const std::vector<int>& queries, int n_blocks, int m, std::uint64_t seed);

struct StarStats {
  double exceed_prob = 0.0;  // fraction of trials with count > threshold
  double mean = 0.0;
};
StarStats star_hit_stats(const std::vector<int>& queries, int n_blocks, int m, double threshold,
                         int trials, std::uint64_t seed);

// ---- hard distribution for the two-round lower bound ----

// Output address uniform, each segment input uniform in the inner fiber,
// bicertificates uniform, data region uniform; address bits forced as in
// build_two_adaptive_instance.
Bits sample_two_adaptive_hard(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                              Rng& rng);

// Exact optimum success of deterministic two-round p-parallel strategies
// against the hard distribution, by expectimax with the posterior factored
// across segments and the data region. Only p = 1 is supported.
double two_adaptive_two_round_optimum(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                                      int p);

}  // namespace qpar
