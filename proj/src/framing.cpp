#include "geodex/framing.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "geodex/errors.hpp"

namespace geodex::framing {

namespace {

constexpr Real kPi = std::numbers::pi;

/// Metric-orthonormalization: returns phi with phi^T g phi = 1 (polar form).
MatX metric_orthonormalize(const MatX& phi, const MatX& g) {
  Eigen::SelfAdjointEigenSolver<MatX> es(symmetrized(MatX(phi.transpose() * g * phi)));
  const MatX inv_sqrt = es.eigenvectors() *
                        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  return phi * inv_sqrt;
}

/// Connection matrix A(t) with (A)_{kj} = Gamma^k_{ij} xdot^i; parallel
/// transport solves phi' = -A phi.
MatX connection_matrix(const ManifoldModel& model, const VecX& x, const VecX& xdot) {
  const int n = model.dim();
  MatX a = MatX::Zero(n, n);
  if (model.is_flat()) return a;
  const auto gamma = model.christoffel(x);
  for (int k = 0; k < n; ++k) a.row(k) = (gamma[k] * xdot).transpose();
  return a;
}

}  // namespace

MatX ClosedFrame::Q_at(Real t) const {
  const int nsteps = static_cast<int>(times.size()) - 1;
  const Real h = 1.0 / static_cast<Real>(nsteps);
  if (t <= 0.0) return Q.front();
  if (t >= 1.0) return Q.back();
  const int k = std::min(static_cast<int>(t / h), nsteps - 1);
  const Real w = (t - times[k]) / h;
  return (1.0 - w) * Q[k] + w * Q[k + 1];
}

std::vector<MatX> parallel_frame(const ManifoldModel& model, const PerturbedOrbit& orbit,
                                 const MatX& initial_rotation) {
  const int n = model.dim();
  const int nt = orbit.steps();
  const Real h = orbit.dt();

  MatX phi0 = metric_orthonormalize(MatX::Identity(n, n), model.metric(orbit.x_at(0)));
  if (initial_rotation.size() > 0) phi0 = phi0 * initial_rotation;

  std::vector<MatX> frames(nt + 1);
  frames[0] = phi0;
  if (model.is_flat()) {
    for (int k = 1; k <= nt; ++k) frames[k] = phi0;
    return frames;
  }

  // Linear interpolation of (x, xdot) within one step keeps RK4 consistent.
  const auto state_at = [&](int k, Real frac, VecX& x, VecX& xdot) {
    const VecX x0 = orbit.x_at(k), x1 = orbit.x_at(std::min(k + 1, nt));
    const VecX v0 = model.metric_inverse(x0) * orbit.y_at(k);
    const VecX v1 = model.metric_inverse(x1) * orbit.y_at(std::min(k + 1, nt));
    x = (1.0 - frac) * x0 + frac * x1;
    xdot = (1.0 - frac) * v0 + frac * v1;
  };

  MatX phi = phi0;
  for (int k = 0; k < nt; ++k) {
    VecX x, v;
    const auto rhs = [&](Real frac, const MatX& p) {
      state_at(k, frac, x, v);
      return MatX(-connection_matrix(model, x, v) * p);
    };
    const MatX k1 = rhs(0.0, phi);
    const MatX k2 = rhs(0.5, phi + 0.5 * h * k1);
    const MatX k3 = rhs(0.5, phi + 0.5 * h * k2);
    const MatX k4 = rhs(1.0, phi + h * k3);
    phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phi = metric_orthonormalize(phi, model.metric(orbit.x_at(k + 1)));
    frames[k + 1] = phi;
  }
  return frames;
}

MatX frame_holonomy(const ManifoldModel& model, const PerturbedOrbit& orbit,
                    const std::vector<MatX>& phi_par) {
  (void)model;
  const MatX dd = orbit.deck.linear;
  return phi_par.front().inverse() * dd.transpose() * phi_par.back();
}

int detect_sigma(const MatX& holonomy, Real tol) {
  const Real det = holonomy.determinant();
  if (std::abs(std::abs(det) - 1.0) > tol)
    throw FrameError("holonomy determinant is not +-1; frame is not orthogonal");
  return det > 0.0 ? 0 : 1;
}

MatX so_log(const MatX& r) {
  const int n = static_cast<int>(r.rows());
  if (std::abs(r.determinant() - 1.0) > 1e-8)
    throw FrameError("matrix logarithm requested for a non-special-orthogonal matrix");
  Eigen::RealSchur<MatX> schur(r);
  const MatX t = schur.matrixT();
  const MatX q = schur.matrixU();
  MatX log_t = MatX::Zero(n, n);
  std::vector<int> minus_ones;
  int i = 0;
  while (i < n) {
    const bool has_block = (i + 1 < n) && (std::abs(t(i + 1, i)) > 1e-10);
    if (has_block) {
      // 2x2 rotation block [[c, -s], [s, c]].
      const Real c = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const Real s = 0.5 * (t(i + 1, i) - t(i, i + 1));
      const Real theta = std::atan2(s, c);
      log_t(i, i + 1) = -theta;
      log_t(i + 1, i) = theta;
      i += 2;
    } else {
      if (t(i, i) < 0.0) minus_ones.push_back(i);
      i += 1;
    }
  }
  if (minus_ones.size() % 2 != 0)
    throw FrameError("orthogonal log branch failure: odd count of -1 eigenvalues");
  for (size_t j = 0; j + 1 < minus_ones.size(); j += 2) {
    const int a = minus_ones[j], b = minus_ones[j + 1];
    log_t(a, b) = -kPi;
    log_t(b, a) = kPi;
  }
  return q * log_t * q.transpose();
}

ClosedFrame close_frame(const ManifoldModel& model, const PerturbedOrbit& orbit,
                        const std::vector<MatX>& phi_par, const MatX& holonomy, int sigma,
                        const FrameOptions& opts) {
  const int n = model.dim();
  const MatX e = twist_E(n, sigma);
  const MatX r = holonomy.inverse() * e;
  if (r.determinant() <= 0.0)
    throw FrameError("no correcting rotation exists: det(h E_sigma) <= 0");
  const MatX gen = so_log(r);  // skew generator L of the correcting rotation
  const SmoothRamp ramp{opts.ramp_margin};

  ClosedFrame frame;
  frame.n = n;
  frame.sigma = sigma;
  const int nt = orbit.steps();
  frame.times.resize(nt + 1);
  frame.phi.resize(nt + 1);
  for (int k = 0; k <= nt; ++k) {
    const Real t = static_cast<Real>(k) / nt;
    frame.times[k] = t;
    frame.phi[k] = phi_par[k] * MatX((ramp(t) * gen).exp());
  }
  frame.P = [gen, ramp](Real t) { return MatX(ramp.deriv(t) * gen); };
  frame.dPdt = [gen, ramp](Real t) { return MatX(ramp.second_deriv(t) * gen); };
  frame.p_sup = gen.cwiseAbs().maxCoeff() * ramp.deriv(0.5) * 1.1;

  // Orthonormality audit in the chart metric.
  for (int k = 0; k <= nt; ++k) {
    const MatX g = model.metric(orbit.x_at(k));
    const Real defect =
        (frame.phi[k].transpose() * g * frame.phi[k] - MatX::Identity(n, n)).cwiseAbs().maxCoeff();
    if (defect > opts.orthonormality_tol)
      throw FrameError("closed frame lost orthonormality beyond tolerance");
  }
  return frame;
}

std::vector<MatX> assemble_Q(const ManifoldModel& model, const Potential& pot,
                             const PerturbedOrbit& orbit, const ClosedFrame& frame) {
  const int n = model.dim();
  const int nt = orbit.steps();
  std::vector<MatX> qs(nt + 1);
  for (int k = 0; k <= nt; ++k) {
    const Real t = frame.times[k];
    const VecX x = orbit.x_at(k);
    const MatX g = model.metric(x);
    const MatX gi = model.metric_inverse(x);
    const VecX xdot = gi * orbit.y_at(k);
    const MatX hess = geom::covariant_hessian(model, pot, t, x);
    const MatX& phi = frame.phi[k];
    MatX q(n, n);
    for (int j = 0; j < n; ++j) {
      const VecX w =
          model.curvature_term(x, phi.col(j), xdot) + gi * (hess * phi.col(j));
      q.col(j) = phi.transpose() * (g * w);
    }
    if (asymmetry(q) > 1e-8 * (1.0 + q.cwiseAbs().maxCoeff()))
      throw AssemblyError("curvature-plus-Hessian block is not symmetric");
    qs[k] = symmetrized(q);
  }
  const MatX e = frame.E();
  if ((qs.back() - e * qs.front() * e).cwiseAbs().maxCoeff() >
      1e-8 * (1.0 + qs.front().cwiseAbs().maxCoeff()))
    throw AssemblyError("Q boundary relation Q(1) = E Q(0) E violated");
  return qs;
}

MatX rotation_U(int n, Real t, int power) {
  MatX u = MatX::Identity(2 * n, 2 * n);
  const Real angle = power * kPi * t;
  const Real c = std::cos(angle), s = std::sin(angle);
  u(0, 0) = c;
  u(0, n) = -s;
  u(n, 0) = s;
  u(n, n) = c;
  return u;
}

MatX su_correction(int n, int sigma, int power) {
  MatX corr = MatX::Zero(2 * n, 2 * n);
  if (sigma % 2 == 0) return corr;
  corr(0, 0) = -power * kPi;
  corr(n, n) = -power * kPi;
  return corr;
}

SymmetricFamily assemble_SU(const ClosedFrame& frame, int u_power) {
  const int n = frame.n;
  const int nt = static_cast<int>(frame.times.size()) - 1;
  if (frame.Q.empty()) throw AssemblyError("frame has no Q samples; run assemble_Q first");
  if (u_power % 2 == 0) throw ParameterError("rotation power must be odd");

  const int sigma = frame.sigma;
  const MatFn p_fn = frame.P;
  // Local copies keep the evaluator self-contained.
  auto q_samples = frame.Q;
  const auto q_at = [q_samples, nt](Real t) -> MatX {
    if (t <= 0.0) return q_samples.front();
    if (t >= 1.0) return q_samples.back();
    const Real h = 1.0 / nt;
    const int k = std::min(static_cast<int>(t / h), nt - 1);
    const Real w = t / h - k;
    return (1.0 - w) * q_samples[k] + w * q_samples[k + 1];
  };
  const MatX corr = su_correction(n, sigma, u_power);
  const MatFn value = [n, sigma, u_power, p_fn, q_at, corr](Real t) {
    const MatX p = p_fn(t);
    const MatX q = q_at(t);
    MatX s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = q;
    s.topRightCorner(n, n) = p;
    s.bottomLeftCorner(n, n) = -p;
    s.bottomRightCorner(n, n) = MatX::Identity(n, n);
    if (sigma % 2 == 0) return s;
    const MatX u = rotation_U(n, t, u_power);
    return MatX(u * s * u.transpose() + corr);
  };

  SymmetricFamily fam;
  fam.n = n;
  fam.u_power = u_power;
  fam.with_rotation = (sigma % 2 != 0);
  fam.value = value;
  fam.samples.resize(nt + 1);
  for (int k = 0; k <= nt; ++k) fam.samples[k] = value(frame.times[k]);
  return fam;
}

ClosedFrame build_closed_frame(const ManifoldModel& model, const Potential& pot,
                               const PerturbedOrbit& orbit, const FrameOptions& opts,
                               const MatX& initial_rotation) {
  const auto phi_par = parallel_frame(model, orbit, initial_rotation);
  const MatX h = frame_holonomy(model, orbit, phi_par);
  const int sigma = detect_sigma(h);
  ClosedFrame frame = close_frame(model, orbit, phi_par, h, sigma, opts);
  frame.Q = assemble_Q(model, pot, orbit, frame);
  Real qs = 0.0;
  for (const MatX& q : frame.Q) qs = std::max(qs, q.cwiseAbs().maxCoeff());
  frame.q_sup = qs;
  return frame;
}

}  // namespace geodex::framing
