#pragma once

#include <cstdint>

#include "qpar/boolfn.hpp"

namespace qpar {

// AND of `blocks` ORs over disjoint blocks of `block_size` bits.
BooleanFunction make_and_or(int blocks, int block_size);

// Each block read little-endian as a number mod `modulus`; 1 iff some k
// distinct blocks sum to 0 (mod modulus).
BooleanFunction make_ksum(int blocks, int k, int block_bits, std::int64_t modulus);

// 1 iff some k balanced blocks (equal 0s and 1s) sum to 0 (mod modulus) and
// every unbalanced block has at least as many 1s as 0s. block_bits even.
BooleanFunction make_block_ksum(int blocks, int k, int block_bits, std::int64_t modulus);

// Block k-SUM outer composed with one k-SUM inner per outer input bit.
BooleanFunction make_bkk(int blocks, int k, int block_bits, std::int64_t modulus,
                         int inner_blocks, int inner_k, int inner_block_bits,
                         std::int64_t inner_modulus);

// Promise: all-zeros (output 0) or exactly n/2 ones (output 1); n even.
BooleanFunction make_dj(int n);

// Phi = 2^{-3n/2} * sum_{i,j} (-1)^{X_i} (-1)^{i.j} (-1)^{Y_j}; the input packs
// the X table (2^n bits) then the Y table.
double forrelation_value(const Bits& input, int n);
double forrelation_value_tables(const Bits& x_table, const Bits& y_table);

// Promise: Phi >= 3/5 (output 1) or |Phi| <= 1/100 (output 0); n <= 12.
BooleanFunction make_forrelation(int n);

// `blocks` = 2^w pointer cells of w bits; output = least significant bit of the
// label reached after `hops` dereferences starting from cell 0. Carries an
// exact subcube oracle, so round solvers can cut off chains early.
BooleanFunction make_pointer(int blocks, int hops);

// Promise f(x) = g(y); output the common value.
BooleanFunction make_cor(const BooleanFunction& f, const BooleanFunction& g);

// COR(pointer, PARITY of `copies` promise instances).
BooleanFunction make_ana_dj(int blocks, int hops, int copies, int inner_n);
BooleanFunction make_ana_for(int blocks, int hops, int copies, int inner_n);

// Makes every generator above available to the descriptor parser / CLI.
void register_construction_generators();

}  // namespace qpar
