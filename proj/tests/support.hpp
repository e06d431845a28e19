#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "geodex/types.hpp"

namespace geodex::test {

/// Deterministic RNG for test data.
inline std::mt19937_64 make_rng(unsigned long long seed) { return std::mt19937_64(seed); }

inline Real uniform(std::mt19937_64& rng, Real lo, Real hi) {
  std::uniform_real_distribution<Real> d(lo, hi);
  return d(rng);
}

inline VecX random_vector(std::mt19937_64& rng, int n, Real lo = -1.0, Real hi = 1.0) {
  VecX v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

inline MatX random_symmetric(std::mt19937_64& rng, int dim, Real scale) {
  MatX m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
  MatX sym = 0.5 * (m + m.transpose());
  const Real norm = sym.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm > 0) sym *= scale / norm;
  return sym;
}

/// Random symmetric with operator norm strictly below bound and all
/// eigenvalues bounded away from zero.
inline MatX random_symmetric_bounded(std::mt19937_64& rng, int dim, Real bound,
                                     Real min_abs_eig = 0.05) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    MatX s = random_symmetric(rng, dim, uniform(rng, 0.2, 0.95) * bound);
    Eigen::SelfAdjointEigenSolver<MatX> es(s);
    const Real top = es.eigenvalues().cwiseAbs().maxCoeff();
    const Real bottom = es.eigenvalues().cwiseAbs().minCoeff();
    if (top < bound && bottom > min_abs_eig) return s;
  }
  throw std::runtime_error("could not sample a bounded symmetric matrix");
}

/// Eigenvalue oracle for -xi'' - q xi on the sigma-twisted scalar space:
/// {4 pi^2 k^2 - q} (k=0 once, k>=1 twice) or {pi^2 (2k+1)^2 - q} (twice).
inline std::vector<Real> twisted_fourier_spectrum(int sigma, Real q, int count) {
  std::vector<Real> vals;
  const Real pi = 3.14159265358979323846;
  if (sigma == 0) {
    vals.push_back(-q);
    for (int k = 1; vals.size() < static_cast<size_t>(count); ++k) {
      const Real v = 4.0 * pi * pi * k * k - q;
      vals.push_back(v);
      vals.push_back(v);
    }
  } else {
    for (int k = 0; vals.size() < static_cast<size_t>(count); ++k) {
      const Real v = pi * pi * (2 * k + 1) * (2 * k + 1) - q;
      vals.push_back(v);
      vals.push_back(v);
    }
  }
  vals.resize(count);
  std::sort(vals.begin(), vals.end());
  return vals;
}

}  // namespace geodex::test
