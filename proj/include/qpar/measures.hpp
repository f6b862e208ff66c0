#pragma once

#include <vector>

#include "qpar/boolfn.hpp"
#include "qpar/spectral.hpp"

namespace qpar {

// Minimum certificate size over inputs of the given side (-1 if the side is
// empty). Exhaustive subset sweep; capped at arity 16.
int certificate_complexity(const BooleanFunction& f, int side);

struct CertificateStats {
  int c0 = -1, c1 = -1;
  int c() const { return c0 > c1 ? c0 : c1; }
};
CertificateStats certificate_stats(const BooleanFunction& f);

// Lexicographically-first minimum certifying set for x (positions, ascending).
std::vector<int> find_certificate(const BooleanFunction& f, const Bits& x);

struct BlockSensitivityResult {
  int value = 0;
  Bits witness;                         // maximizing input
  std::vector<std::vector<int>> blocks; // disjoint sensitive blocks at the witness
};

// Max over domain inputs (optionally restricted to one output side) of the
// largest family of disjoint sensitive blocks. Branch and bound over minimal
// sensitive blocks; capped at arity 14.
BlockSensitivityResult block_sensitivity(const BooleanFunction& f, int side = -1);
BlockSensitivityResult block_sensitivity_at(const BooleanFunction& f, const Bits& x);

// Adjacency of the Hamming-distance-1 output-disagreement graph over domain
// inputs; dimension 2^arity, capped at arity 14.
SparseSym sensitivity_adjacency(const BooleanFunction& f);

double spectral_sensitivity(const BooleanFunction& f, const SpectralOptions& opt = {});

}  // namespace qpar
