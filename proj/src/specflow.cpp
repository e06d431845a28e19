#include "geodex/specflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "geodex/errors.hpp"

namespace geodex::specflow {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

struct EigenData {
  VecX values;
  MatX vectors;
};

EigenData solve(const std::function<MatX(Real)>& a, Real lambda) {
  Eigen::SelfAdjointEigenSolver<MatX> es(a(lambda));
  if (es.info() != Eigen::Success) throw NumericsError("eigensolver failed along the family");
  return {es.eigenvalues(), es.eigenvectors()};
}

int count_negative(const VecX& vals) {
  int c = 0;
  for (int i = 0; i < vals.size(); ++i)
    if (vals(i) < 0.0) ++c;
  return c;
}

/// Window of eigenpairs nearest zero, ordered by eigenvalue.
struct Window {
  std::vector<Real> values;
  MatX vectors;
};

Window window_of(const EigenData& ed, int width) {
  const int m = static_cast<int>(ed.values.size());
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int i, int j) { return std::abs(ed.values(i)) < std::abs(ed.values(j)); });
  const int w = std::min(width, m);
  std::vector<int> keep(idx.begin(), idx.begin() + w);
  std::sort(keep.begin(), keep.end());
  Window out;
  out.vectors.resize(ed.vectors.rows(), w);
  for (int i = 0; i < w; ++i) {
    out.values.push_back(ed.values(keep[i]));
    out.vectors.col(i) = ed.vectors.col(keep[i]);
  }
  return out;
}

}  // namespace

SpectralFlowResult spectral_flow_matrix_family(const std::function<MatX(Real)>& a, Real lo,
                                               Real hi, const FlowOptions& opts,
                                               Real null_scale) {
  const Real null_tol = opts.null_tol_scale * null_scale;
  SpectralFlowResult out;

  // lambda grid sweep with zero-window tracking.
  const int steps = opts.lambda_steps;
  std::vector<EigenData> eds;
  eds.reserve(steps + 1);
  out.lambdas.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    out.lambdas[k] = lo + (hi - lo) * k / steps;
    eds.push_back(solve(a, out.lambdas[k]));
  }

  // Endpoint injectivity.
  if (eds.front().values.cwiseAbs().minCoeff() <= null_tol ||
      eds.back().values.cwiseAbs().minCoeff() <= null_tol)
    throw DegeneracyError("family endpoint operator is not injective");

  out.flow_from_counts = count_negative(eds.front().values) - count_negative(eds.back().values);

  // Branch tracking by eigenvector overlap inside the zero window.
  const int dim2n = static_cast<int>(eds.front().values.size());
  const int width = std::min(dim2n, opts.trace_window + 2 * (dim2n > 2 ? 2 : 1));
  struct Branch {
    std::vector<Real> curve;
    VecX last_vec;
    bool alive = true;
  };
  std::vector<Branch> branches;
  {
    const Window w0 = window_of(eds.front(), width);
    for (size_t i = 0; i < w0.values.size(); ++i) {
      Branch b;
      b.curve.assign(steps + 1, kNaN);
      b.curve[0] = w0.values[i];
      b.last_vec = w0.vectors.col(static_cast<int>(i));
      branches.push_back(std::move(b));
    }
  }
  for (int k = 1; k <= steps; ++k) {
    const Window wk = window_of(eds[k], width);
    std::vector<bool> used(wk.values.size(), false);
    for (Branch& b : branches) {
      if (!b.alive) continue;
      int best = -1;
      Real best_overlap = 0.0;
      for (size_t j = 0; j < wk.values.size(); ++j) {
        if (used[j]) continue;
        const Real ov = std::abs(b.last_vec.dot(wk.vectors.col(static_cast<int>(j))));
        if (ov > best_overlap) {
          best_overlap = ov;
          best = static_cast<int>(j);
        }
      }
      const Real prev = b.curve[k - 1];
      if (best < 0 || best_overlap < opts.overlap_min) {
        if (std::abs(prev) < 0.2 * null_scale + 10.0 * null_tol)
          throw ResolutionError("eigenvalue trace matching ambiguous near zero; refine lambda grid");
        b.alive = false;
        continue;
      }
      used[best] = true;
      b.curve[k] = wk.values[best];
      b.last_vec = wk.vectors.col(best);
    }
    for (size_t j = 0; j < wk.values.size(); ++j) {
      if (used[j]) continue;
      Branch b;
      b.curve.assign(steps + 1, kNaN);
      b.curve[k] = wk.values[j];
      b.last_vec = wk.vectors.col(static_cast<int>(j));
      branches.push_back(std::move(b));
    }
  }
  int trace_flow = 0;
  for (const Branch& b : branches) {
    Real prev = kNaN;
    std::vector<Real> curve = b.curve;
    for (Real v : curve) {
      if (std::isnan(v)) continue;
      if (!std::isnan(prev)) {
        if (prev < 0.0 && v >= 0.0) ++trace_flow;
        if (prev >= 0.0 && v < 0.0) --trace_flow;
      }
      prev = v;
    }
    out.traces.push_back(std::move(curve));
  }
  out.flow_from_traces = trace_flow;

  // Crossing localization: bisection on the negative-count function.
  struct Interval {
    Real lo, hi;
    int nlo, nhi;
  };
  std::vector<Interval> work;
  for (int k = 0; k < steps; ++k) {
    const int nlo = count_negative(eds[k].values);
    const int nhi = count_negative(eds[k + 1].values);
    if (nlo != nhi) work.push_back({out.lambdas[k], out.lambdas[k + 1], nlo, nhi});
  }
  std::vector<std::pair<Real, int>> located;  // (lambda*, delta n^-)
  while (!work.empty()) {
    Interval iv = work.back();
    work.pop_back();
    if (iv.hi - iv.lo <= opts.bisect_tol) {
      located.push_back({0.5 * (iv.lo + iv.hi), iv.nlo - iv.nhi});
      continue;
    }
    const Real mid = 0.5 * (iv.lo + iv.hi);
    const int nmid = count_negative(solve(a, mid).values);
    if (nmid != iv.nlo) work.push_back({iv.lo, mid, iv.nlo, nmid});
    if (nmid != iv.nhi) work.push_back({mid, iv.hi, nmid, iv.nhi});
  }
  std::sort(located.begin(), located.end());

  // Crossing operators by central lambda-differences on the kernel.
  int flow = 0;
  for (const auto& [lambda_star, delta_neg] : located) {
    const EigenData ed = solve(a, lambda_star);
    std::vector<int> order(ed.values.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return std::abs(ed.values(i)) < std::abs(ed.values(j)); });
    int kdim = 0;
    for (int i = 0; i < static_cast<int>(order.size()); ++i)
      if (std::abs(ed.values(order[i])) <= null_tol) ++kdim;
    kdim = std::max(kdim, std::abs(delta_neg));
    MatX kernel(ed.vectors.rows(), kdim);
    for (int i = 0; i < kdim; ++i) kernel.col(i) = ed.vectors.col(order[i]);

    const Real dl = std::max(1e-6 * (hi - lo), 4.0 * opts.bisect_tol);
    const MatX da = (a(lambda_star + dl) - a(lambda_star - dl)) / (2.0 * dl);
    const MatX gamma = symmetrized(MatX(kernel.transpose() * da * kernel));
    Eigen::SelfAdjointEigenSolver<MatX> ges(gamma);
    if (ges.eigenvalues().cwiseAbs().minCoeff() <= opts.regularity_tol * (1.0 + null_scale))
      throw RegularityError("irregular crossing of the operator family at lambda = " +
                            std::to_string(lambda_star));
    int sig = 0;
    for (int i = 0; i < ges.eigenvalues().size(); ++i)
      sig += ges.eigenvalues()(i) > 0 ? 1 : -1;
    FlowCrossing fc;
    fc.lambda = lambda_star;
    fc.kernel_dim = kdim;
    fc.signature = sig;
    fc.crossing_operator = gamma;
    for (int i = 0; i < kdim; ++i) fc.kernel.push_back(kernel.col(i));
    out.crossings.push_back(std::move(fc));
    flow += sig;
  }
  out.flow = flow;

  if (out.flow != out.flow_from_counts)
    throw ResolutionError("crossing signatures disagree with endpoint counts; refine grid");
  if (out.flow != out.flow_from_traces)
    throw ResolutionError("crossing signatures disagree with trace transitions; refine grid");
  return out;
}

SpectralFlowResult spectral_flow(const OperatorFamily& family, const FlowOptions& opts) {
  const auto a = [&family, &opts](Real lambda) {
    const MatFn q = [&family, lambda](Real t) { return family.Q(lambda, t); };
    const MatFn p = [&family, lambda](Real t) { return family.P(lambda, t); };
    return jacobi::assemble_operator(family.n, family.sigma, opts.grid, q, p, family.label)
        .matrix;
  };
  return spectral_flow_matrix_family(a, family.lo, family.hi, opts, 1.0 + family.q_scale);
}

SymplecticPath family_endpoint_path(const OperatorFamily& family, Real lambda, int steps,
                                    int u_power) {
  const int n = family.n;
  const int sigma = family.sigma;
  const MatX corr = framing::su_correction(n, sigma, u_power);
  const MatFn2 qf = family.Q;
  const MatFn2 pf = family.P;
  const MatFn s_u = [n, sigma, u_power, corr, qf, pf, lambda](Real t) {
    MatX s(2 * n, 2 * n);
    const MatX q = qf(lambda, t);
    const MatX p = pf(lambda, t);
    s.topLeftCorner(n, n) = q;
    s.topRightCorner(n, n) = p;
    s.bottomLeftCorner(n, n) = -p;
    s.bottomRightCorner(n, n) = MatX::Identity(n, n);
    if (sigma % 2 == 0) return s;
    const MatX u = framing::rotation_U(n, t, u_power);
    return MatX(u * s * u.transpose() + corr);
  };
  sp::PathOptions popts;
  popts.steps = steps;
  return sp::fundamental_solution(s_u, popts);
}

ProofFamilies build_proof_families(const ClosedFrame& frame, Real muhat, Real slope_jitter) {
  if (!(muhat < -std::numbers::pi))
    throw ParameterError("proof families require muhat < -pi (kappa > sqrt(pi))");
  const int n = frame.n;
  const SmoothRamp ramp{0.1};
  const Real scale = 1.0 + slope_jitter;
  const auto beta = [muhat, ramp, scale](Real lambda) { return muhat * scale * ramp(lambda); };
  const auto dbeta = [muhat, ramp, scale](Real lambda) {
    return muhat * scale * ramp.deriv(lambda);
  };

  // close_frame data are captured by value so the families stay self-contained.
  const MatFn p_fn = frame.P;
  const std::vector<MatX> q_samples = frame.Q;
  const int nt = static_cast<int>(frame.times.size()) - 1;
  const auto q_at = [q_samples, nt](Real t) -> MatX {
    if (t <= 0.0) return q_samples.front();
    if (t >= 1.0) return q_samples.back();
    const Real h = 1.0 / nt;
    const int k = std::min(static_cast<int>(t / h), nt - 1);
    const Real w = t / h - k;
    return (1.0 - w) * q_samples[k] + w * q_samples[k + 1];
  };

  ProofFamilies out;
  out.muhat = muhat;
  out.beta = beta;
  out.beta_deriv = dbeta;

  out.family_a.n = n;
  out.family_a.sigma = frame.sigma;
  out.family_a.label = "A_lambda";
  out.family_a.q_scale = frame.q_sup + std::abs(muhat);
  out.family_a.Q = [q_at, beta, n](Real lambda, Real t) {
    return MatX((1.0 - lambda) * q_at(t) + beta(lambda) * MatX::Identity(n, n));
  };
  out.family_a.P = [p_fn](Real, Real t) { return p_fn(t); };

  out.family_b.n = n;
  out.family_b.sigma = frame.sigma;
  out.family_b.label = "Atilde_lambda";
  out.family_b.q_scale = std::abs(muhat);
  out.family_b.Q = [muhat, n](Real, Real) { return MatX(muhat * MatX::Identity(n, n)); };
  out.family_b.P = [p_fn](Real lambda, Real t) { return MatX((1.0 - lambda) * p_fn(t)); };
  return out;
}

SpectralFlowResult proof_family_flow(const ClosedFrame& frame, Real muhat,
                                     const FlowOptions& opts, ProofFamilies* used) {
  Real jitter = 0.0;
  unsigned seed = 0x2545f491u;
  for (int attempt = 0; attempt < 5; ++attempt) {
    ProofFamilies fams = build_proof_families(frame, muhat, jitter);
    SpectralFlowResult flow = spectral_flow(fams.family_a, opts);
    // beta'(lambda_i) must avoid Spec Q(1) at every crossing.
    Eigen::SelfAdjointEigenSolver<MatX> qend(frame.Q.back());
    bool ok = true;
    for (const FlowCrossing& c : flow.crossings) {
      const Real slope = fams.beta_deriv(c.lambda);
      for (int i = 0; i < qend.eigenvalues().size(); ++i)
        if (std::abs(slope - qend.eigenvalues()(i)) < 1e-6 * (1.0 + std::abs(slope))) ok = false;
    }
    if (ok) {
      if (used != nullptr) *used = std::move(fams);
      return flow;
    }
    seed = seed * 1664525u + 1013904223u;
    jitter = 1e-3 * (static_cast<Real>(seed % 1000u) / 1000.0 + 0.5);
  }
  throw NumericsError("could not re-ramp beta away from Spec Q(1)");
}

Real crossing_identity_residual(const OperatorFamily& family, const FlowCrossing& crossing,
                                const FlowOptions& opts) {
  if (crossing.kernel.empty()) throw ParameterError("crossing has no kernel data");
  const int n = family.n;
  const int grid = opts.grid;
  const Real h = 1.0 / grid;
  const Real lambda = crossing.lambda;

  // L2-normalized kernel vector and its phase-space initial value.
  VecX xi = crossing.kernel.front();
  xi /= std::sqrt(h) * xi.norm();
  const VecX xi0 = xi.segment(0, n);
  const VecX xi1 = xi.segment(n, n);
  const MatX e = twist_E(n, family.sigma);
  const VecX xi_last = xi.segment(n * (grid - 1), n);
  const VecX xidot0 = (xi1 - e * xi_last) / (2.0 * h);
  VecX zeta0(2 * n);
  zeta0 << xi0, xidot0 + family.P(lambda, 0.0) * xi0;

  const auto matrix_at = [&](Real l) {
    const MatFn q = [&family, l](Real t) { return family.Q(l, t); };
    const MatFn p = [&family, l](Real t) { return family.P(l, t); };
    return jacobi::assemble_operator(family.n, family.sigma, grid, q, p, family.label).matrix;
  };
  const Real dl = 1e-5 * (family.hi - family.lo);
  const MatX da = (matrix_at(lambda + dl) - matrix_at(lambda - dl)) / (2.0 * dl);
  const Real lhs = h * xi.dot(da * xi);

  const int psteps = 2048;
  const MatX psi_p = family_endpoint_path(family, lambda + dl, psteps).samples().back();
  const MatX psi_m = family_endpoint_path(family, lambda - dl, psteps).samples().back();
  const MatX psi_0 = family_endpoint_path(family, lambda, psteps).samples().back();
  const MatX dpsi = (psi_p - psi_m) / (2.0 * dl);
  const MatX s_hat = standard_J(n) * dpsi * psi_0.inverse();
  const Real rhs = -zeta0.dot(symmetrized(s_hat) * zeta0);

  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

}  // namespace geodex::specflow
