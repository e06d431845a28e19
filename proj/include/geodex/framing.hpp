#pragma once

#include <vector>

#include "geodex/geometry.hpp"
#include "geodex/orbits.hpp"
#include "geodex/types.hpp"

namespace geodex::framing {

using geom::ManifoldModel;
using geom::Potential;
using orbits::PerturbedOrbit;

/// Orthonormal trivialization of x*TM over [0,1] closed up by the twist
/// E_sigma, with its connection potential P and curvature-plus-Hessian
/// block Q on the orbit grid.
struct ClosedFrame {
  int n = 0;
  int sigma = 0;
  std::vector<Real> times;   // uniform grid on [0,1]
  std::vector<MatX> phi;     // chart frame matrices along the lift
  MatFn P;                   // analytic: P(t) = beta'(t) L
  MatFn dPdt;
  std::vector<MatX> Q;       // samples aligned with times
  Real q_sup = 0.0;          // max |Q| coefficient
  Real p_sup = 0.0;

  MatX E() const { return twist_E(n, sigma); }
  MatX Q_at(Real t) const;   // piecewise-linear in the grid cells
};

/// Samples of S or S_U on the frame grid together with an exact evaluator.
struct SymmetricFamily {
  std::vector<MatX> samples;
  MatFn value;
  bool with_rotation = false;
  int n = 0;
  int u_power = 1;
  int steps() const { return static_cast<int>(samples.size()) - 1; }
};

struct FrameOptions {
  Real ramp_margin = 0.1;
  Real orthonormality_tol = 1e-10;
};

/// Parallel-transported orthonormal frame along the orbit (P identically 0),
/// starting from the metric-orthonormalized chart basis times initial_rotation.
std::vector<MatX> parallel_frame(const ManifoldModel& model, const PerturbedOrbit& orbit,
                                 const MatX& initial_rotation = MatX());

/// Holonomy h with phi(1) = dD phi(0) h, measured against the deck return.
MatX frame_holonomy(const ManifoldModel& model, const PerturbedOrbit& orbit,
                    const std::vector<MatX>& phi_par);

/// 0 if det h > 0, 1 otherwise. Throws FrameError unless |det h| is 1 to 1e-6.
int detect_sigma(const MatX& holonomy, Real tol = 1e-6);

/// Principal real logarithm of a special orthogonal matrix (skew-symmetric),
/// pairing -1 eigenvalues into half-turn planes.
MatX so_log(const MatX& r);

/// Applies the interior correcting rotation so that phi(1) = phi(0) E_sigma;
/// P(t) = beta'(t) log(h^{-1} E_sigma) vanishes near both endpoints.
ClosedFrame close_frame(const ManifoldModel& model, const PerturbedOrbit& orbit,
                        const std::vector<MatX>& phi_par, const MatX& holonomy, int sigma,
                        const FrameOptions& opts = {});

/// Q xi = phi^{-1} (R(phi xi, xdot) xdot + grad_{phi xi} grad V); symmetric,
/// with Q(1) = E Q(0) E checked to 1e-8.
std::vector<MatX> assemble_Q(const ManifoldModel& model, const Potential& pot,
                             const PerturbedOrbit& orbit, const ClosedFrame& frame);

/// Rotation of the (1, n+1) coordinate plane by angle power*pi*t.
MatX rotation_U(int n, Real t, int power = 1);

/// Constant correction -J0 U^sigma d_t(U^-sigma) = -(power) pi Pi for sigma=1.
MatX su_correction(int n, int sigma, int power = 1);

/// S = [[Q, P], [-P, 1]] and its U-twist S_U = U^s S U^-s - J0 U^s d_t(U^-s).
SymmetricFamily assemble_SU(const ClosedFrame& frame, int u_power = 1);

/// Full pipeline: parallel frame -> holonomy -> sigma -> closure -> Q.
ClosedFrame build_closed_frame(const ManifoldModel& model, const Potential& pot,
                               const PerturbedOrbit& orbit, const FrameOptions& opts = {},
                               const MatX& initial_rotation = MatX());

}  // namespace geodex::framing
