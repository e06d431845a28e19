#pragma once

#include <string>
#include <vector>

#include "geodex/framing.hpp"
#include "geodex/types.hpp"

namespace geodex::jacobi {

using framing::ClosedFrame;

/// Dense symmetric discretization of -d_t d_t - B - Q on the E_sigma-twisted
/// grid space, N blocks of size n.
struct DiscretizedOperator {
  MatX matrix;
  int n = 0;
  int grid = 0;
  int sigma = 0;
  std::string symbol;
  Real presym_defect = 0.0;  // asymmetry before the exact symmetrization
};

/// Assembles the operator from callables Q(t), P(t) sampled at t_k = k/N.
/// The first-order part uses the symmetrized stencil
///   (P_k (xi_{k+1} - xi_{k-1}) + (P_{k+1} xi_{k+1} - P_{k-1} xi_{k-1})) / 2h,
/// which carries both 2P d_t and d_t P; P^2 and Q are pointwise blocks.
DiscretizedOperator assemble_operator(int n, int sigma, int grid, const MatFn& q, const MatFn& p,
                                      const std::string& symbol = "A");

/// Operator for the frame's A^0 (uses the frame's Q samples and analytic P).
DiscretizedOperator assemble_A0(const ClosedFrame& frame, int grid);

struct SpectralCount {
  int ind = 0;       // eigenvalues < -null_tol
  int null_dim = 0;  // |eigenvalue| <= null_tol
  std::vector<Real> near_zero;
  Real gap = 0.0;      // smallest |eigenvalue| outside the null band
  Real null_tol = 0.0;
  Real lambda_min = 0.0;
  int grid = 0;
};

/// Full symmetric eigendecomposition; default null_tol = 1e-6 (1 + |Q|_inf).
SpectralCount spectral_count(const DiscretizedOperator& op, Real null_tol);

struct MorseOptions {
  int initial_grid = 128;
  int max_grid = 2048;
  Real null_tol_scale = 1e-6;
  Real gap_factor = 10.0;  // reject when gap < gap_factor * null_tol
  bool require_nondegenerate = true;
};

/// assemble_A0 + spectral_count with grid doubling until (Ind, Null) agree on
/// two consecutive grids. Throws DegeneracyError on stabilized Null > 0 or a
/// spectral gap below the rejection threshold.
SpectralCount morse_index(const ClosedFrame& frame, const MorseOptions& opts = {});

/// Smallest eigenvalue of the frame operator A^0 at the given grid.
Real smallest_eigenvalue(const ClosedFrame& frame, int grid);

}  // namespace geodex::jacobi
