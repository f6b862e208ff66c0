#include "qpar/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qpar/rng.hpp"

namespace qpar {

void SparseSym::apply(const std::vector<double>& v, std::vector<double>& out) const {
  out.assign(dim, 0.0);
  for (const auto& e : entries) {
    out[e.i] += e.w * v[e.j];
    if (e.i != e.j) out[e.j] += e.w * v[e.i];
  }
}

double SparseSym::frobenius() const {
  double s = 0;
  for (const auto& e : entries) s += (e.i == e.j ? 1.0 : 2.0) * e.w * e.w;
  return std::sqrt(s);
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Extreme eigenvalue of the accumulated tridiagonal plus its residual bound
// |beta_k * s_k| for the dominant Ritz pair.
void tridiag_extreme(const std::vector<double>& alpha, const std::vector<double>& beta,
                     double* theta, double* resid_coeff) {
  int k = (int)alpha.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  int best = 0;
  for (int i = 1; i < k; ++i)
    if (std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[best])) best = i;
  *theta = std::abs(es.eigenvalues()[best]);
  *resid_coeff = std::abs(es.eigenvectors()(k - 1, best));
}

}  // namespace

double spectral_norm(const SparseSym& m, const SpectralOptions& opt) {
  if (m.dim == 0 || m.entries.empty()) return 0.0;
  if (m.dim == 1) {
    double s = 0;
    for (const auto& e : m.entries) s += e.w;
    return std::abs(s);
  }

  Rng rng = rng_stream(opt.seed, 0x5ca1ab1e);
  std::vector<std::vector<double>> basis;  // all Lanczos vectors ever produced (locked + active)
  double best = 0.0;
  double scale = m.frobenius();
  if (scale == 0) return 0.0;
  double last_resid = 0.0;
  int steps = 0;

  while (steps < opt.max_iter && (std::int64_t)basis.size() < m.dim) {
    // Fresh start orthogonal to everything found so far.
    std::vector<double> v(m.dim);
    double nv = 0;
    for (int attempt = 0; attempt < 64 && nv < 1e-12; ++attempt) {
      for (auto& x : v) x = rng_double(rng) - 0.5;
      for (const auto& b : basis) {
        double c = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
      }
      nv = norm2(v);
    }
    if (nv < 1e-12) break;  // space exhausted
    for (auto& x : v) x /= nv;

    std::vector<double> alpha, beta;
    std::vector<double> prev;
    std::vector<double> w(m.dim);
    std::size_t run_start = basis.size();
    basis.push_back(v);

    while (steps < opt.max_iter) {
      ++steps;
      m.apply(basis.back(), w);
      double a = dot(w, basis.back());
      alpha.push_back(a);
      // Full reorthogonalization, two sweeps.
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const auto& b : basis) {
          double c = dot(w, b);
          for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * b[i];
        }
      double nb = norm2(w);
      double theta, rc;
      tridiag_extreme(alpha, beta, &theta, &rc);
      last_resid = nb * rc;
      if (theta > best) best = theta;
      if (last_resid <= opt.tol * std::max(1.0, theta) &&
          (alpha.size() >= 2 || nb <= opt.tol * scale)) {
        // Dominant Ritz pair of this run converged; only a restart could
        // still beat it, and restarts keep the running max.
        if (nb <= opt.tol * scale) break;  // invariant subspace: restart
        return best;
      }
      if (nb <= opt.tol * scale) break;  // breakdown: lock run, restart
      for (auto& x : w) x /= nb;
      beta.push_back(nb);
      basis.push_back(w);
      if (basis.size() - run_start > 600) break;  // cap run length, keep max
    }
    if ((std::int64_t)basis.size() >= m.dim) return best;  // whole space spanned: exact
  }
  if ((std::int64_t)basis.size() >= m.dim) return best;
  if (last_resid <= opt.tol * std::max(1.0, best)) return best;
  throw NoConvergence("spectral norm iteration exhausted its budget", last_resid);
}

double spectral_norm_dense(const SparseSym& m) {
  if (m.dim == 0 || m.entries.empty()) return 0.0;
  if (m.dim > (1 << 12)) throw TooLarge("dense spectral norm capped at dimension 4096");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.dim, m.dim);
  for (const auto& e : m.entries) {
    a(e.i, e.j) += e.w;
    if (e.i != e.j) a(e.j, e.i) += e.w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  double lo = std::abs(es.eigenvalues().minCoeff());
  double hi = std::abs(es.eigenvalues().maxCoeff());
  return std::max(lo, hi);
}

}  // namespace qpar
