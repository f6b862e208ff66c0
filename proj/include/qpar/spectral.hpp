#pragma once

#include <cstdint>
#include <vector>

#include "qpar/errors.hpp"

namespace qpar {

// Symmetric sparse matrix, one stored entry per unordered pair (plus diagonal).
struct SparseSym {
  std::int64_t dim = 0;
  struct Entry {
    std::int64_t i, j;
    double w;
  };
  std::vector<Entry> entries;

  explicit SparseSym(std::int64_t d = 0) : dim(d) {}

  void add(std::int64_t i, std::int64_t j, double w) {
    if (i < 0 || j < 0 || i >= dim || j >= dim)
      throw IndexOutOfRange("sparse entry outside matrix");
    entries.push_back({i, j, w});
  }

  void apply(const std::vector<double>& v, std::vector<double>& out) const;
  double frobenius() const;
};

struct SpectralOptions {
  double tol = 1e-9;          // relative residual tolerance
  int max_iter = 4000;        // Lanczos steps across restarts
  std::uint64_t seed = 1;     // deterministic start vector
};

// Largest |eigenvalue| via Lanczos with full reorthogonalization. Breakdown
// (invariant subspace) restarts against the locked basis, so disconnected or
// permutation-like operators stay exact. Throws NoConvergence with the last
// residual if the budget runs out.
double spectral_norm(const SparseSym& m, const SpectralOptions& opt = {});

// Dense eigendecomposition; intended as the small-dimension cross-check.
double spectral_norm_dense(const SparseSym& m);

}  // namespace qpar
