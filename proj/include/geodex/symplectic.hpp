#pragma once

#include <iosfwd>
#include <vector>

#include "geodex/types.hpp"

namespace geodex::sp {

/// Sampled path of symplectic matrices together with its symmetric
/// generator family S(t) = J0 (d_t Psi) Psi^{-1}.
class SymplecticPath {
 public:
  SymplecticPath(std::vector<MatX> samples, MatFn generator, Real t0, Real t1);

  int half_dim() const { return n_; }
  int steps() const { return static_cast<int>(psi_.size()) - 1; }
  Real t_begin() const { return t0_; }
  Real t_end() const { return t1_; }
  Real dt() const { return (t1_ - t0_) / static_cast<Real>(steps()); }
  Real time_of(int k) const { return t0_ + k * dt(); }

  const MatX& at(int k) const { return psi_[k]; }
  const std::vector<MatX>& samples() const { return psi_; }
  MatX generator(Real t) const { return s_(t); }
  const MatFn& generator_fn() const { return s_; }
  Real defect() const { return defect_; }
  Real max_norm() const { return max_norm_; }

  /// Value at arbitrary t by RK4 continuation from the nearest grid node.
  MatX value(Real t) const;

  /// Sub-path on sample indices [k0, k1]; shares the generator.
  SymplecticPath slice(int k0, int k1) const;

 private:
  std::vector<MatX> psi_;
  MatFn s_;
  Real t0_, t1_;
  int n_;
  Real defect_ = 0.0;
  Real max_norm_ = 0.0;
};

struct PathOptions {
  int steps = 2048;
  Real defect_tol = 1e-8;
};

/// Fundamental solution of d_t Psi = -J0 S(t) Psi, Psi(t0) = 1, by RK4.
SymplecticPath fundamental_solution(const MatFn& s, const PathOptions& opts = {}, Real t0 = 0.0,
                                    Real t1 = 1.0);

/// Path t -> exp(-t J0 S) for constant symmetric S (scaling-and-squaring).
SymplecticPath matrix_exponential_path(const MatX& s, int steps = 2048);

/// Reference path: rotation times diagonal stretch, mu_CZ = +1.
SymplecticPath gamma1_path(int steps = 2048);

/// Reference path generated by b(t) = u(t) diag(muhat, 1) u(t)^{-1} - pi;
/// requires muhat < -pi (kappa = sqrt(-muhat) > sqrt(pi)).
SymplecticPath gamma2_path(Real muhat, int steps = 2048);

struct TorusCoords {
  Real theta;  // rotation angle of the polar factor
  Real u;      // diagonal log-coordinate of the positive factor
  Real v;      // off-diagonal log-coordinate
};

/// Solid-torus coordinates of Sp(2) via polar decomposition m = R(theta) P.
/// prev_theta selects the angle branch by nearest continuation.
TorusCoords torus_coords(const MatX& m, Real prev_theta = 0.0);

/// CSV rows "t,theta,u,v,det1m" with unwrapped angle along the path.
void write_path_csv(std::ostream& os, const SymplecticPath& path);

/// Pointwise product t -> Theta(t) Psi(t) with the exact product generator
/// S_Theta + Theta S_Psi Theta^T (Theta must be unitary symplectic).
SymplecticPath left_multiply_loop(const SymplecticPath& loop, const SymplecticPath& path);

}  // namespace geodex::sp
