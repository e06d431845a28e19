#pragma once

#include <vector>

#include "geodex/geometry.hpp"
#include "geodex/types.hpp"

namespace geodex::orbits {

using geom::DeckTransform;
using geom::ManifoldModel;
using geom::Potential;

struct Monodromy {
  MatX matrix;                 // covariant quotient linearization of the time-1 map
  Real symplectic_defect = 0.0;
  Real nondegeneracy_gap = 0.0;  // |det(1 - matrix)|
};

struct FlowOptions {
  int steps = 2048;
  Real symplectic_tol = 1e-8;
  bool with_monodromy = true;
};

struct FlowResult {
  VecX z1;
  MatX chart_jacobian;  // plain chart linearization d z(1) / d z(0)
  Real symplectic_defect = 0.0;
};

struct NewtonOptions {
  int steps = 2048;
  Real tol = 1e-10;
  int max_iterations = 50;
  Real degeneracy_tol = 1e-8;
  Real symplectic_tol = 1e-8;
};

/// A 1-periodic solution of the Hamiltonian system, sampled on [0,1] along
/// the chart lift; x(1) = D(x(0)).
struct PerturbedOrbit {
  MatX xs;  // n x (steps+1) chart positions along the lift
  MatX ys;  // n x (steps+1) chart covectors
  DeckTransform deck;
  Real action = 0.0;              // Lagrangian-form quadrature
  Real action_hamiltonian = 0.0;  // Hamiltonian-form quadrature
  Real residual = 0.0;            // shooting residual norm
  Monodromy monodromy;
  bool l2_bound_ok = false;  // ||xdot||_{L^2}^2 < 2 action + 2 ||V||_inf

  int steps() const { return static_cast<int>(xs.cols()) - 1; }
  int dim() const { return static_cast<int>(xs.rows()); }
  Real dt() const { return 1.0 / static_cast<Real>(steps()); }
  VecX x_at(int k) const { return xs.col(k); }
  VecX y_at(int k) const { return ys.col(k); }
  VecX z_at(int k) const {
    VecX z(2 * dim());
    z << xs.col(k), ys.col(k);
    return z;
  }
};

/// Canonical Hamiltonian vector field in plain chart coordinates:
/// xdot = g^{-1} y, ydot_i = -1/2 (d_i g^{jk}) y_j y_k - d_i V.
VecX hamiltonian_rhs(const ManifoldModel& model, const Potential& pot, Real t, const VecX& z);

/// Jacobian of hamiltonian_rhs with respect to z (analytic).
MatX hamiltonian_rhs_jacobian(const ManifoldModel& model, const Potential& pot, Real t,
                              const VecX& z);

Real hamiltonian_value(const ManifoldModel& model, const Potential& pot, Real t, const VecX& z);

/// RK4 time-1 flow with simultaneous variational integration.
FlowResult flow_time1(const ManifoldModel& model, const Potential& pot, const VecX& z0,
                      const FlowOptions& opts = {});

/// Converts the plain chart linearization into the covariant quotient
/// monodromy d phi_1(z_0) (deck pullback and Christoffel fiber correction).
Monodromy covariant_monodromy(const ManifoldModel& model, const DeckTransform& deck,
                              const VecX& z0, const VecX& z1, const MatX& chart_jacobian,
                              Real defect);

/// Damped Newton on F(z) = D^{-1}(phi_1(z)) - z.
PerturbedOrbit find_orbit(const ManifoldModel& model, const Potential& pot, const VecX& seed,
                          const DeckTransform& deck, const NewtonOptions& opts = {});

struct ActionBreakdown {
  Real lagrangian_form;
  Real hamiltonian_form;
  Real xdot_l2_sq;
  bool l2_bound_ok;
};

/// Trapezoidal action quadratures; the Lagrangian form differentiates the
/// position samples (4th-order stencil with deck-periodic extension).
ActionBreakdown action_of(const ManifoldModel& model, const Potential& pot,
                          const PerturbedOrbit& orbit);

/// Builds an orbit container from a known solution sampled by the flow
/// (no Newton); used for manually constructed trajectories.
PerturbedOrbit sample_orbit(const ManifoldModel& model, const Potential& pot, const VecX& z0,
                            const DeckTransform& deck, const FlowOptions& opts = {});

/// Distance between phase points modulo small deck words (orbit dedup).
Real quotient_distance(const ManifoldModel& model, const VecX& z1, const VecX& z2);

}  // namespace geodex::orbits
