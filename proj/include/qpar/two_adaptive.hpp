#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/rng.hpp"

namespace qpar {

// Pointers to a full OR-block (a zero-certificate template) plus one location
// per block (a one-certificate template). The location shared by both halves
// is the intersection point.
struct Bicertificate {
  int zero_block = 0;
  std::vector<int> one_part;  // one location per block, block order; values in [0, n^2)
  int intersection() const { return one_part[zero_block]; }
  std::vector<int> zero_part(int n) const {
    std::vector<int> v(n);
    for (int b = 0; b < n; ++b) v[b] = zero_block * n + b;
    return v;
  }
  bool operator==(const Bicertificate& o) const {
    return zero_block == o.zero_block && one_part == o.one_part;
  }
};

// Input split into an address region (segments x n sub-segments, each n
// blocks of n bits), a bicertificate region (one fixed-width cell per
// sub-segment) and a 2^segments-bit data region, in that order.
struct TwoAdaptiveLayout {
  int n = 0;
  int segments = 0;

  int loc_bits() const { return std::max(1, ceil_log2((std::uint64_t)n * n)); }
  int bc_cell() const { return 2 * n * loc_bits(); }
  int add_size() const { return segments * n * n * n; }
  int bc_size() const { return segments * n * bc_cell(); }
  int dt_size() const { return 1 << segments; }
  int arity() const { return add_size() + bc_size() + dt_size(); }

  int add_offset(int i, int j, int k = 0) const { return ((i * n + j) * n + k) * n; }
  int bc_offset(int i, int j) const { return add_size() + (i * n + j) * bc_cell(); }
  int dt_offset() const { return add_size() + bc_size(); }

  // CSV rows: region,i,j,k,bit_start,bit_len
  std::string offset_map_csv() const;
};

// Cell encoding: the zero part's n locations ascending, then the one part's n
// locations in block order, each loc_bits wide, little-endian.
Bits encode_bicertificate(const Bicertificate& bc, const TwoAdaptiveLayout& layout);
// nullopt unless the cell is structurally valid: the zero part spells out a
// whole block and the one part picks one location inside every block.
std::optional<Bicertificate> decode_bicertificate(const Bits& cell,
                                                  const TwoAdaptiveLayout& layout);

// Total function over the layout: 1 iff every cell decodes to a valid
// bicertificate whose relevant half certifies its sub-segment's AND-of-ORs
// value, every segment's derived f-input is in-domain, and the data bit at
// the address spelled by the f outputs is 1. inner_kind overrides the name
// suffix when f was materialized as a table.
BooleanFunction make_two_adaptive(const BooleanFunction& f, int segments,
                                  const std::string& inner_kind = "");

// Hard-distribution sampler: per sub-segment, a uniform valid bicertificate;
// address bits forced by it (one-part locations 1, intersection carries the
// requested f-input bit, everything else 0); data region as given.
Bits build_two_adaptive_instance(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                                 const std::vector<Bits>& in_values, const Bits& dt,
                                 std::uint64_t seed);

void register_two_adaptive_generators();

}  // namespace qpar
