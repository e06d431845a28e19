#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geodex/framing.hpp"
#include "geodex/jacobi.hpp"
#include "geodex/symplectic.hpp"
#include "geodex/types.hpp"

namespace geodex::specflow {

using framing::ClosedFrame;
using sp::SymplecticPath;

/// One-parameter family of twisted operators given by matrix data
/// Q_lambda(t), P_lambda(t) satisfying the E_sigma boundary relations.
struct OperatorFamily {
  int n = 0;
  int sigma = 0;
  Real lo = 0.0;
  Real hi = 1.0;
  MatFn2 Q;  // (lambda, t) -> symmetric n x n
  MatFn2 P;  // (lambda, t) -> skew n x n
  std::string label;
  Real q_scale = 1.0;  // magnitude scale for the null tolerance
};

struct FlowCrossing {
  Real lambda = 0.0;
  int kernel_dim = 0;
  int signature = 0;
  MatX crossing_operator;      // restricted to the kernel
  std::vector<VecX> kernel;    // grid kernel vectors (Euclidean-orthonormal)
};

struct FlowOptions {
  int lambda_steps = 64;
  int grid = 128;
  Real bisect_tol = 1e-8;
  Real null_tol_scale = 1e-6;
  Real regularity_tol = 1e-8;
  Real overlap_min = 0.5;
  int trace_window = 8;  // widened by 2n inside
};

struct SpectralFlowResult {
  int flow = 0;                 // sum of crossing signatures
  int flow_from_counts = 0;     // n^-(lo) - n^-(hi)
  int flow_from_traces = 0;     // net signed zero transitions of tracked branches
  std::vector<FlowCrossing> crossings;
  std::vector<Real> lambdas;
  std::vector<std::vector<Real>> traces;  // per-branch eigenvalue curves (NaN outside life)
};

/// Spectral flow of a family of symmetric matrices lambda -> A(lambda).
/// Endpoints must be injective (no eigenvalue inside the null tolerance).
SpectralFlowResult spectral_flow_matrix_family(const std::function<MatX(Real)>& a, Real lo,
                                               Real hi, const FlowOptions& opts,
                                               Real null_scale = 1.0);

/// Assembles the discretized operator per lambda and runs the flow engine.
SpectralFlowResult spectral_flow(const OperatorFamily& family, const FlowOptions& opts = {});

/// Fundamental solution Psi_{lambda,U} of statement (S4) for the family slice.
SymplecticPath family_endpoint_path(const OperatorFamily& family, Real lambda, int steps = 2048,
                                    int u_power = 1);

/// The two homotopy families used by the index computation:
///   A_lambda = -d_t d_t - B - (1-lambda) Q - beta(lambda),
///   Atilde_lambda = -d_t d_t - B_lambda - muhat, with P_lambda = (1-lambda) P.
struct ProofFamilies {
  OperatorFamily family_a;
  OperatorFamily family_b;
  std::function<Real(Real)> beta;
  std::function<Real(Real)> beta_deriv;
  Real muhat = 0.0;
};

/// Requires muhat < -pi and muhat below the smallest eigenvalue of A^0.
ProofFamilies build_proof_families(const ClosedFrame& frame, Real muhat,
                                   Real slope_jitter = 0.0);

/// Runs the flow on family A with the a-posteriori check
/// beta'(lambda_i) not in Spec Q(1); re-ramps beta on violation (<= 5 tries).
SpectralFlowResult proof_family_flow(const ClosedFrame& frame, Real muhat,
                                     const FlowOptions& opts, ProofFamilies* used = nullptr);

/// Residual of the crossing identity
///   <xi, (d_lambda A) xi>_{L^2} = -<zeta(0), S_hat_1(lambda) zeta(0)>
/// at a located crossing, both sides by central lambda-differences.
Real crossing_identity_residual(const OperatorFamily& family, const FlowCrossing& crossing,
                                const FlowOptions& opts);

}  // namespace geodex::specflow
