#include "geodex/symplectic.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/MatrixFunctions>

#include "geodex/errors.hpp"

namespace geodex::sp {

namespace {

constexpr Real kPi = std::numbers::pi;

MatX rk4_matrix_step(const MatFn& s, const MatX& j0, Real t, Real h, const MatX& psi) {
  const auto f = [&](Real tt, const MatX& p) -> MatX { return -j0 * s(tt) * p; };
  const MatX k1 = f(t, psi);
  const MatX k2 = f(t + 0.5 * h, psi + 0.5 * h * k1);
  const MatX k3 = f(t + 0.5 * h, psi + 0.5 * h * k2);
  const MatX k4 = f(t + h, psi + h * k3);
  return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

SymplecticPath::SymplecticPath(std::vector<MatX> samples, MatFn generator, Real t0, Real t1)
    : psi_(std::move(samples)), s_(std::move(generator)), t0_(t0), t1_(t1) {
  if (psi_.size() < 2) throw ParameterError("symplectic path needs at least two samples");
  n_ = static_cast<int>(psi_.front().rows()) / 2;
  for (const MatX& p : psi_) {
    defect_ = std::max(defect_, symplectic_defect(p));
    max_norm_ = std::max(max_norm_, p.cwiseAbs().maxCoeff());
  }
}

MatX SymplecticPath::value(Real t) const {
  const Real h = dt();
  int k = static_cast<int>(std::floor((t - t0_) / h));
  k = std::max(0, std::min(k, steps()));
  const Real tk = time_of(k);
  MatX psi = psi_[k];
  const Real span = t - tk;
  if (std::abs(span) < 1e-15) return psi;
  // Integrate the remainder in a few substeps; S is smooth within one cell.
  const int sub = 4;
  const Real hh = span / sub;
  Real tt = tk;
  for (int i = 0; i < sub; ++i) {
    psi = rk4_matrix_step(s_, standard_J(n_), tt, hh, psi);
    tt += hh;
  }
  return psi;
}

SymplecticPath SymplecticPath::slice(int k0, int k1) const {
  if (k0 < 0 || k1 <= k0 || k1 > steps()) throw ParameterError("invalid path slice");
  std::vector<MatX> sub(psi_.begin() + k0, psi_.begin() + k1 + 1);
  return SymplecticPath(std::move(sub), s_, time_of(k0), time_of(k1));
}

SymplecticPath fundamental_solution(const MatFn& s, const PathOptions& opts, Real t0, Real t1) {
  const MatX s0 = s(t0);
  const int n = static_cast<int>(s0.rows()) / 2;
  const MatX j0 = standard_J(n);
  const Real h = (t1 - t0) / static_cast<Real>(opts.steps);
  std::vector<MatX> samples;
  samples.reserve(opts.steps + 1);
  MatX psi = MatX::Identity(2 * n, 2 * n);
  samples.push_back(psi);
  for (int k = 0; k < opts.steps; ++k) {
    psi = rk4_matrix_step(s, j0, t0 + k * h, h, psi);
    samples.push_back(psi);
  }
  SymplecticPath path(std::move(samples), s, t0, t1);
  if (path.defect() > opts.defect_tol)
    throw AccuracyError("fundamental solution symplecticity defect above bound; increase steps");
  return path;
}

SymplecticPath matrix_exponential_path(const MatX& s, int steps) {
  const int n = static_cast<int>(s.rows()) / 2;
  const MatX j0 = standard_J(n);
  const MatX gen = -j0 * s;
  std::vector<MatX> samples;
  samples.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const Real t = static_cast<Real>(k) / steps;
    samples.push_back(MatX((t * gen).exp()));
  }
  MatX s_copy = s;
  return SymplecticPath(std::move(samples), [s_copy](Real) { return s_copy; }, 0.0, 1.0);
}

SymplecticPath gamma1_path(int steps) {
  std::vector<MatX> samples;
  samples.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const Real t = static_cast<Real>(k) / steps;
    const Real c = std::cos(kPi * t), s = std::sin(kPi * t);
    MatX rot(2, 2), str(2, 2);
    rot << c, -s, s, c;
    str << 1.0 + t, 0.0, 0.0, 1.0 / (1.0 + t);
    samples.push_back(rot * str);
  }
  const MatFn gen = [](Real t) {
    // S(t) = -pi 1 + (1+t)^{-1} [[-sin 2pi t, cos 2pi t], [cos 2pi t, sin 2pi t]]
    const Real c2 = std::cos(2.0 * kPi * t), s2 = std::sin(2.0 * kPi * t);
    MatX s(2, 2);
    s << -kPi - s2 / (1.0 + t), c2 / (1.0 + t), c2 / (1.0 + t), -kPi + s2 / (1.0 + t);
    return s;
  };
  return SymplecticPath(std::move(samples), gen, 0.0, 1.0);
}

SymplecticPath gamma2_path(Real muhat, int steps) {
  if (!(muhat < -kPi)) throw ParameterError("gamma2 requires muhat < -pi (kappa > sqrt(pi))");
  const MatFn b = [muhat](Real t) {
    const Real c = std::cos(kPi * t), s = std::sin(kPi * t);
    MatX m(2, 2);
    m << muhat * c * c + s * s - kPi, (muhat - 1.0) * c * s, (muhat - 1.0) * c * s,
        muhat * s * s + c * c - kPi;
    return m;
  };
  PathOptions opts;
  opts.steps = steps;
  return fundamental_solution(b, opts);
}

TorusCoords torus_coords(const MatX& m, Real prev_theta) {
  if (m.rows() != 2 || m.cols() != 2) throw ParameterError("torus coordinates need Sp(2)");
  Eigen::SelfAdjointEigenSolver<MatX> es(MatX(m.transpose() * m));
  const MatX sqrt_vals = es.eigenvalues().cwiseSqrt().asDiagonal();
  const MatX p = es.eigenvectors() * sqrt_vals * es.eigenvectors().transpose();
  const MatX rot = m * p.inverse();
  Real theta = std::atan2(rot(1, 0), rot(0, 0));
  // Nearest-branch continuation of the angle.
  while (theta - prev_theta > kPi) theta -= 2.0 * kPi;
  while (theta - prev_theta < -kPi) theta += 2.0 * kPi;
  const MatX log_vals = es.eigenvalues().array().log().matrix().asDiagonal();
  const MatX logp = 0.5 * es.eigenvectors() * log_vals * es.eigenvectors().transpose();
  return {theta, logp(0, 0), logp(0, 1)};
}

void write_path_csv(std::ostream& os, const SymplecticPath& path) {
  if (path.half_dim() != 1)
    throw ParameterError("path CSV uses solid-torus coordinates and needs Sp(2)");
  os << "t,theta,u,v,det1m\n";
  const MatX id = MatX::Identity(2, 2);
  char buf[512];
  Real prev_theta = 0.0;
  for (int k = 0; k <= path.steps(); ++k) {
    const MatX& m = path.at(k);
    const TorusCoords tc = torus_coords(m, prev_theta);
    prev_theta = tc.theta;
    const Real det1m = (id - m).determinant();
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", path.time_of(k), tc.theta,
                  tc.u, tc.v, det1m);
    os << buf;
  }
}

SymplecticPath left_multiply_loop(const SymplecticPath& loop, const SymplecticPath& path) {
  if (loop.steps() != path.steps() || loop.half_dim() != path.half_dim())
    throw ParameterError("loop and path must share grid and dimension");
  const int n = path.half_dim();
  for (const MatX& th : loop.samples()) {
    if ((th.transpose() * th - MatX::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() > 1e-8 ||
        symplectic_defect(th) > 1e-8)
      throw ParameterError("loop samples must be unitary symplectic");
  }
  std::vector<MatX> samples;
  samples.reserve(path.steps() + 1);
  for (int k = 0; k <= path.steps(); ++k) samples.push_back(loop.at(k) * path.at(k));
  const MatFn loop_gen = loop.generator_fn();
  const MatFn path_gen = path.generator_fn();
  const MatFn loop_val = [loop](Real t) { return loop.value(t); };
  const MatFn gen = [loop_gen, path_gen, loop_val](Real t) {
    const MatX th = loop_val(t);
    return MatX(loop_gen(t) + th * path_gen(t) * th.transpose());
  };
  return SymplecticPath(std::move(samples), gen, path.t_begin(), path.t_end());
}

}  // namespace geodex::sp
