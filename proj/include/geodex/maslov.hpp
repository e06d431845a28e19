#pragma once

#include <vector>

#include "geodex/symplectic.hpp"
#include "geodex/types.hpp"

namespace geodex::maslov {

using sp::SymplecticPath;

/// Signature n+(S) - n-(S) counting eigenvalues outside +-tol.
/// Throws DegenerateFormError if an eigenvalue lies inside the tolerance band.
int signature(const MatX& sym, Real tol);

struct Crossing {
  Real t = 0.0;
  MatX kernel;       // orthonormal basis of ker(1 - Psi(t)), one column each
  MatX form;         // crossing form -<zeta, S(t) zeta> on the kernel
  int signature = 0;
  bool regular = false;
  bool at_start = false;
  bool at_end = false;
  Real min_singular = 0.0;  // smallest singular value of (1 - Psi(t))
};

struct CrossingOptions {
  Real kernel_tol_scale = 1e-7;  // kernel threshold = scale * (1 + ||Psi||)
  Real form_tol = 1e-8;
  Real t_tol = 1e-10;
  Real dip_fraction = 1e-5;  // |det| dip threshold relative to max |det|
};

/// Locates all crossings det(1 - Psi(t)) = 0 on the path (sign changes and
/// touch points), refines them, and evaluates the crossing forms.
std::vector<Crossing> find_crossings(const SymplecticPath& path,
                                     const CrossingOptions& opts = {});

/// Crossing form matrix M_ab = -<zeta_a, S(t) zeta_b>, symmetrized.
MatX crossing_form(const SymplecticPath& path, Real t, const MatX& kernel);

struct IndexOptions {
  CrossingOptions crossings;
  Real admissibility_tol = 1e-8;
};

/// Robbin-Salamon index of Graph(Psi) against the diagonal: half weights at
/// the path endpoints, full weight at interior crossings.
HalfInteger rs_index(const SymplecticPath& path, const IndexOptions& opts = {});

/// Conley-Zehnder index: rs_index for admissible paths (Psi(0) = 1,
/// det(1 - Psi(1)) != 0); always an integer.
int cz_index(const SymplecticPath& path, const IndexOptions& opts = {});

/// Twice the degree of det(X + iY) for a loop in Sp(2n) cap O(2n).
int unitary_loop_degree(const SymplecticPath& loop);

/// Reruns a path with generator S + delta 1 (documented regularization helper
/// for irregular crossings; approximates the homotopy-invariant index).
SymplecticPath shift_generator(const SymplecticPath& path, Real delta, int steps);

}  // namespace geodex::maslov
