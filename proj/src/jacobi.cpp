#include "geodex/jacobi.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "geodex/errors.hpp"

namespace geodex::jacobi {

DiscretizedOperator assemble_operator(int n, int sigma, int grid, const MatFn& q, const MatFn& p,
                                      const std::string& symbol) {
  if (grid < 64) throw ParameterError("operator grid must have at least 64 points");
  const int dim = n * grid;
  const Real h = 1.0 / static_cast<Real>(grid);
  const MatX e = twist_E(n, sigma);  // symmetric involution
  const MatX id = MatX::Identity(n, n);

  // Boundary data compatibility: Q(1) = E Q(0) E, P(1) = E P(0) E.
  {
    const MatX q0 = q(0.0), q1 = q(1.0);
    const MatX p0 = p(0.0), p1 = p(1.0);
    if ((q1 - e * q0 * e).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + q0.cwiseAbs().maxCoeff()))
      throw AssemblyError("frame data violates Q(1) = E Q(0) E");
    if ((p1 - e * p0 * e).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + p0.cwiseAbs().maxCoeff()))
      throw AssemblyError("frame data violates P(1) = E P(0) E");
  }

  std::vector<MatX> qk(grid), pk(grid);
  for (int k = 0; k < grid; ++k) {
    qk[k] = symmetrized(q(k * h));
    pk[k] = p(k * h);
  }

  MatX a = MatX::Zero(dim, dim);
  const auto add_block = [&](int row, int col, const MatX& m) {
    a.block(n * row, n * col, n, n) += m;
  };

  for (int k = 0; k < grid; ++k) {
    const int kp = (k + 1) % grid;
    const int km = (k - 1 + grid) % grid;
    const bool wrap_up = (k + 1 == grid);  // xi_{k+1} = E xi_0
    const bool wrap_dn = (k == 0);         // xi_{k-1} = E xi_{grid-1}

    // -xi'' second differences.
    add_block(k, k, (2.0 / (h * h)) * id);
    add_block(k, kp, (-1.0 / (h * h)) * (wrap_up ? e : id));
    add_block(k, km, (-1.0 / (h * h)) * (wrap_dn ? e : id));

    // -(P D_c + D_c P): the symmetrized stencil for -(2 P d_t + (d_t P)).
    // Wrapped values use xi and P extended by the twist: P_{grid} = E P_0 E,
    // P_{-1} = E P_{grid-1} E.
    const MatX up_coeff = wrap_up ? MatX(pk[k] * e + e * pk[0]) : MatX(pk[k] + pk[kp]);
    const MatX dn_coeff = wrap_dn ? MatX(pk[0] * e + e * pk[grid - 1]) : MatX(pk[k] + pk[km]);
    add_block(k, kp, (-1.0 / (2.0 * h)) * up_coeff);
    add_block(k, km, (1.0 / (2.0 * h)) * dn_coeff);

    // Pointwise -P^2 and -Q blocks.
    add_block(k, k, -pk[k] * pk[k] - qk[k]);
  }

  const Real presym = asymmetry(a);
  if (presym > 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()))
    throw AssemblyError("discretized operator asymmetry exceeds assembly tolerance");
  a = symmetrized(a);

  DiscretizedOperator op;
  op.matrix = std::move(a);
  op.n = n;
  op.grid = grid;
  op.sigma = sigma;
  op.symbol = symbol;
  op.presym_defect = presym;
  return op;
}

DiscretizedOperator assemble_A0(const ClosedFrame& frame, int grid) {
  const auto q = [&frame](Real t) { return frame.Q_at(t); };
  return assemble_operator(frame.n, frame.sigma, grid, q, frame.P, "A0");
}

SpectralCount spectral_count(const DiscretizedOperator& op, Real null_tol) {
  Eigen::SelfAdjointEigenSolver<MatX> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericsError("symmetric eigensolver failed");
  const VecX& vals = es.eigenvalues();
  SpectralCount out;
  out.null_tol = null_tol;
  out.grid = op.grid;
  out.lambda_min = vals(0);
  out.gap = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < vals.size(); ++i) {
    const Real v = vals(i);
    if (v < -null_tol) {
      ++out.ind;
    } else if (std::abs(v) <= null_tol) {
      ++out.null_dim;
      out.near_zero.push_back(v);
    }
    if (std::abs(v) > null_tol) out.gap = std::min(out.gap, std::abs(v));
  }
  return out;
}

SpectralCount morse_index(const ClosedFrame& frame, const MorseOptions& opts) {
  const Real null_tol = opts.null_tol_scale * (1.0 + frame.q_sup);
  SpectralCount prev;
  bool have_prev = false;
  for (int grid = opts.initial_grid; grid <= opts.max_grid; grid *= 2) {
    const SpectralCount count = spectral_count(assemble_A0(frame, grid), null_tol);
    if (have_prev && count.ind == prev.ind && count.null_dim == prev.null_dim) {
      if (count.gap < opts.gap_factor * null_tol)
        throw DegeneracyError("spectral gap below rejection threshold; numerically degenerate");
      if (opts.require_nondegenerate && count.null_dim > 0)
        throw DegeneracyError("operator has nonzero nullity (orbit degenerate)");
      return count;
    }
    prev = count;
    have_prev = true;
  }
  throw AccuracyError("Morse index did not stabilize under grid doubling");
}

Real smallest_eigenvalue(const ClosedFrame& frame, int grid) {
  Eigen::SelfAdjointEigenSolver<MatX> es(assemble_A0(frame, grid).matrix,
                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace geodex::jacobi
