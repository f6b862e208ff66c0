#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpar/bits.hpp"
#include "qpar/errors.hpp"

namespace qpar {

// Optional block structure: arity = block_bits * block_count, block j covers
// bit positions [j*block_bits, (j+1)*block_bits).
struct BlockMeta {
  int block_bits = 0;
  int block_count = 0;
};

// Which output values appear among domain completions of a partial input.
struct CubeValues {
  bool sees0 = false;
  bool sees1 = false;
  bool determined() const { return sees0 != sees1; }
  bool empty() const { return !sees0 && !sees1; }
};

struct PartialInput {
  Bits mask;   // 1 = coordinate fixed
  Bits value;  // fixed coordinate values; bits outside mask ignored
};

using GenParams = std::vector<std::pair<std::string, std::int64_t>>;

// A (possibly partial) boolean function. Value type; cheap to copy.
// Backing is either a packed truth table (arity <= 24) or generator callbacks
// for desk-scale constructions whose tables do not fit.
class BooleanFunction {
 public:
  static constexpr int kTableArityCap = 24;

  BooleanFunction() = default;

  static BooleanFunction from_table(int arity, std::vector<Word> outputs,
                                    std::vector<Word> domain);
  // Total function from per-index output bits (index = input read little-endian).
  static BooleanFunction total_from_bits(int arity, const std::vector<int>& outputs);
  static BooleanFunction from_predicate(int arity,
                                        const std::function<int(std::uint64_t)>& out,
                                        const std::function<bool(std::uint64_t)>& dom);

  struct GeneratorSpec {
    std::string name;
    GenParams params;
    int arity = 0;
    bool total = true;
    std::function<bool(const Bits&)> in_domain;           // null => total
    std::function<int(const Bits&)> eval;                 // assumes in-domain input
    std::function<CubeValues(const PartialInput&)> cube;  // optional exact subcube oracle
    std::optional<BlockMeta> blocks;
  };
  static BooleanFunction from_generator(GeneratorSpec spec);

  bool valid() const { return impl_ != nullptr; }
  int arity() const;
  bool is_table() const;
  bool total() const;
  const std::string& kind() const;  // "table" or generator name
  const GenParams& params() const;
  const std::optional<BlockMeta>& block_meta() const;
  BooleanFunction with_block_meta(BlockMeta meta) const;

  bool in_domain(const Bits& x) const;
  bool in_domain_index(std::uint64_t idx) const;
  int evaluate(const Bits& x) const;            // throws OutOfDomain / ArityMismatch
  int evaluate_index(std::uint64_t idx) const;  // arity <= 64

  // Exact over domain completions of the fixed coordinates. Generator-backed
  // functions without a cube oracle fall back to enumeration of free bits
  // (TooLarge past 2^24 completions).
  CubeValues cube_values(const PartialInput& pa) const;

  BooleanFunction to_table() const;  // force table backing

  std::string descriptor() const;
  static BooleanFunction parse_descriptor(const std::string& text);

  using GeneratorFactory = std::function<BooleanFunction(const GenParams&)>;
  static void register_generator(const std::string& name, GeneratorFactory factory);
  static bool generator_registered(const std::string& name);
  static BooleanFunction build_generator(const std::string& name, const GenParams& params);

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Partial assignment (index, bit); remaining coordinates keep relative order.
using Restriction = std::vector<std::pair<int, int>>;

BooleanFunction restrict_function(const BooleanFunction& f, const Restriction& rho);

// h(x^(1)...x^(M)) = outer(inner_1(x^(1)), ..., inner_M(x^(M))).
BooleanFunction compose(const BooleanFunction& outer,
                        const std::vector<BooleanFunction>& inners);

// Named basics.
BooleanFunction make_and(int n);
BooleanFunction make_or(int n);
BooleanFunction make_parity(int n);
BooleanFunction make_majority(int n);     // odd n
BooleanFunction make_threshold(int n, int t);  // 1 iff |x| >= t

bool equal_on_domain(const BooleanFunction& f, const BooleanFunction& g);

}  // namespace qpar
