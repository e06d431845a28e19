#include "geodex/orbits.hpp"

#include <cmath>
#include <limits>

#include "geodex/errors.hpp"

namespace geodex::orbits {

namespace {

VecX split_x(const VecX& z) { return z.head(z.size() / 2); }
VecX split_y(const VecX& z) { return z.tail(z.size() / 2); }

struct Rk4Step {
  VecX z;
  MatX var;  // variational matrix, empty when not propagated
};

Rk4Step rk4_step(const ManifoldModel& model, const Potential& pot, Real t, Real h, const VecX& z,
                 const MatX* var) {
  const auto f = [&](Real tt, const VecX& zz) { return hamiltonian_rhs(model, pot, tt, zz); };
  const VecX k1 = f(t, z);
  const VecX k2 = f(t + 0.5 * h, z + 0.5 * h * k1);
  const VecX k3 = f(t + 0.5 * h, z + 0.5 * h * k2);
  const VecX k4 = f(t + h, z + h * k3);
  Rk4Step out;
  out.z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (var != nullptr) {
    const auto df = [&](Real tt, const VecX& zz) {
      return hamiltonian_rhs_jacobian(model, pot, tt, zz);
    };
    const MatX m1 = df(t, z) * (*var);
    const MatX m2 = df(t + 0.5 * h, z + 0.5 * h * k1) * (*var + 0.5 * h * m1);
    const MatX m3 = df(t + 0.5 * h, z + 0.5 * h * k2) * (*var + 0.5 * h * m2);
    const MatX m4 = df(t + h, z + h * k3) * (*var + h * m3);
    out.var = *var + (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
  }
  return out;
}

/// Fiber-coordinate correction C(x, y) = [[1, 0], [-W, 1]], W_{li} = Gamma^k_{il} y_k,
/// mapping plain chart variations to the covariant splitting.
MatX covariant_correction(const ManifoldModel& model, const VecX& x, const VecX& y) {
  const int n = model.dim();
  MatX c = MatX::Identity(2 * n, 2 * n);
  if (model.is_flat()) return c;
  const auto gamma = model.christoffel(x);
  MatX w = MatX::Zero(n, n);
  for (int k = 0; k < n; ++k) w += y(k) * gamma[k];
  c.bottomLeftCorner(n, n) = -w;
  return c;
}

}  // namespace

VecX hamiltonian_rhs(const ManifoldModel& model, const Potential& pot, Real t, const VecX& z) {
  const int n = model.dim();
  const VecX x = split_x(z), y = split_y(z);
  model.check_chart(x);
  VecX out(2 * n);
  out.head(n) = model.metric_inverse(x) * y;
  VecX ydot = -pot.gradient(t, x);
  if (!model.is_flat()) {
    const auto dgi = model.metric_inverse_partials(x);
    for (int i = 0; i < n; ++i) ydot(i) -= 0.5 * y.dot(dgi[i] * y);
  }
  out.tail(n) = ydot;
  return out;
}

MatX hamiltonian_rhs_jacobian(const ManifoldModel& model, const Potential& pot, Real t,
                              const VecX& z) {
  const int n = model.dim();
  const VecX x = split_x(z), y = split_y(z);
  model.check_chart(x);
  MatX jac = MatX::Zero(2 * n, 2 * n);
  jac.topRightCorner(n, n) = model.metric_inverse(x);
  jac.bottomLeftCorner(n, n) = -pot.hessian(t, x);
  if (!model.is_flat()) {
    // Sphere chart: only d(g^{-1})/dtheta is nonzero and it depends on theta alone.
    const auto dgi = model.metric_inverse_partials(x);
    for (int i = 0; i < n; ++i) jac.block(0, i, n, 1) += dgi[i] * y;
    // d/dx_l of -1/2 y^T (d_i g^{-1}) y: second partials of g^{-1}.
    const Real r2 = model.sphere_radius() * model.sphere_radius();
    const Real s = std::sin(x(0)), c = std::cos(x(0));
    const Real d2 = (2.0 / r2) * (3.0 * c * c / (s * s * s * s) + 1.0 / (s * s));  // d2(1/(r2 s^2))/dtheta2
    jac(n + 0, 0) += -0.5 * y(1) * y(1) * d2;
    for (int i = 0; i < n; ++i) jac.block(n + i, n, 1, n) -= (dgi[i] * y).transpose();
  }
  return jac;
}

Real hamiltonian_value(const ManifoldModel& model, const Potential& pot, Real t, const VecX& z) {
  const VecX x = split_x(z), y = split_y(z);
  return 0.5 * y.dot(model.metric_inverse(x) * y) + pot.value(t, x);
}

FlowResult flow_time1(const ManifoldModel& model, const Potential& pot, const VecX& z0,
                      const FlowOptions& opts) {
  const int n = model.dim();
  if (z0.size() != 2 * n) throw DomainError("phase point has wrong dimension");
  const Real h = 1.0 / static_cast<Real>(opts.steps);
  VecX z = z0;
  MatX var = MatX::Identity(2 * n, 2 * n);
  for (int k = 0; k < opts.steps; ++k) {
    const Rk4Step step =
        rk4_step(model, pot, k * h, h, z, opts.with_monodromy ? &var : nullptr);
    z = step.z;
    if (opts.with_monodromy) var = step.var;
  }
  FlowResult out;
  out.z1 = z;
  out.chart_jacobian = var;
  if (opts.with_monodromy) {
    out.symplectic_defect = symplectic_defect(var);
    if (out.symplectic_defect > opts.symplectic_tol)
      throw AccuracyError("monodromy symplecticity defect above tolerance; increase steps");
  }
  return out;
}

Monodromy covariant_monodromy(const ManifoldModel& model, const DeckTransform& deck,
                              const VecX& z0, const VecX& z1, const MatX& chart_jacobian,
                              Real defect) {
  const int n = model.dim();
  const MatX a_inv = deck.linear.transpose();  // orthogonal
  MatX pull = MatX::Zero(2 * n, 2 * n);
  pull.topLeftCorner(n, n) = a_inv;
  pull.bottomRightCorner(n, n) = a_inv;
  const MatX c1 = covariant_correction(model, split_x(z1), split_y(z1));
  const MatX c0 = covariant_correction(model, split_x(z0), split_y(z0));
  Monodromy m;
  m.matrix = pull * c1 * chart_jacobian * c0.inverse();
  m.symplectic_defect = std::max(defect, symplectic_defect(m.matrix));
  m.nondegeneracy_gap =
      std::abs((MatX::Identity(2 * n, 2 * n) - m.matrix).determinant());
  return m;
}

PerturbedOrbit find_orbit(const ManifoldModel& model, const Potential& pot, const VecX& seed,
                          const DeckTransform& deck, const NewtonOptions& opts) {
  const int n = model.dim();
  if (seed.size() != 2 * n) throw DomainError("seed has wrong dimension");
  const DeckTransform dinv = deck.inverse();
  FlowOptions fopts;
  fopts.steps = opts.steps;
  fopts.symplectic_tol = opts.symplectic_tol;

  const auto residual_of = [&](const VecX& z, FlowResult& flow) {
    flow = flow_time1(model, pot, z, fopts);
    VecX mapped(2 * n);
    mapped.head(n) = dinv.apply_point(split_x(flow.z1));
    mapped.tail(n) = dinv.apply_covector(split_y(flow.z1));
    return VecX(mapped - z);
  };

  VecX z = seed;
  FlowResult flow;
  VecX f = residual_of(z, flow);
  Real fnorm = f.norm();
  int iterations = 0;
  while (fnorm > opts.tol) {
    if (++iterations > opts.max_iterations)
      throw AccuracyError("orbit Newton iteration did not converge");
    MatX pull = MatX::Zero(2 * n, 2 * n);
    pull.topLeftCorner(n, n) = dinv.linear;
    pull.bottomRightCorner(n, n) = dinv.linear;
    const MatX jac = pull * flow.chart_jacobian - MatX::Identity(2 * n, 2 * n);
    if (std::abs(jac.determinant()) < opts.degeneracy_tol)
      throw DegeneracyError("shooting Jacobian is singular (degenerate orbit family)");
    const VecX delta = jac.fullPivLu().solve(-f);
    // Backtracking damping on the residual norm.
    Real step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 12; ++bt) {
      FlowResult trial_flow;
      VecX trial_f;
      try {
        trial_f = residual_of(z + step * delta, trial_flow);
      } catch (const DomainError&) {
        step *= 0.5;
        continue;
      }
      if (trial_f.norm() < fnorm || trial_f.norm() <= opts.tol) {
        z += step * delta;
        f = trial_f;
        fnorm = f.norm();
        flow = trial_flow;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) throw AccuracyError("orbit Newton damping failed to reduce residual");
  }

  PerturbedOrbit orbit = sample_orbit(model, pot, z, deck, fopts);
  orbit.residual = fnorm;
  return orbit;
}

PerturbedOrbit sample_orbit(const ManifoldModel& model, const Potential& pot, const VecX& z0,
                            const DeckTransform& deck, const FlowOptions& opts) {
  const int n = model.dim();
  const int nt = opts.steps;
  const Real h = 1.0 / static_cast<Real>(nt);
  PerturbedOrbit orbit;
  orbit.deck = deck;
  orbit.xs.resize(n, nt + 1);
  orbit.ys.resize(n, nt + 1);
  VecX z = z0;
  MatX var = MatX::Identity(2 * n, 2 * n);
  orbit.xs.col(0) = split_x(z);
  orbit.ys.col(0) = split_y(z);
  for (int k = 0; k < nt; ++k) {
    const Rk4Step step = rk4_step(model, pot, k * h, h, z, &var);
    z = step.z;
    var = step.var;
    orbit.xs.col(k + 1) = split_x(z);
    orbit.ys.col(k + 1) = split_y(z);
  }
  orbit.monodromy =
      covariant_monodromy(model, deck, z0, z, var, symplectic_defect(var));
  if (orbit.monodromy.symplectic_defect > opts.symplectic_tol)
    throw AccuracyError("orbit monodromy symplecticity defect above tolerance");
  const VecX mapped_back = deck.inverse().apply_point(orbit.xs.col(nt));
  orbit.residual = (mapped_back - orbit.xs.col(0)).norm() +
                   (deck.inverse().apply_covector(orbit.ys.col(nt)) - orbit.ys.col(0)).norm();
  const ActionBreakdown action = action_of(model, pot, orbit);
  orbit.action = action.lagrangian_form;
  orbit.action_hamiltonian = action.hamiltonian_form;
  orbit.l2_bound_ok = action.l2_bound_ok;
  return orbit;
}

ActionBreakdown action_of(const ManifoldModel& model, const Potential& pot,
                          const PerturbedOrbit& orbit) {
  const int nt = orbit.steps();
  const int n = orbit.dim();
  const Real h = orbit.dt();

  // Deck-periodic sample accessor: x(t + 1) = D(x(t)).
  const auto x_wrapped = [&](int k) -> VecX {
    if (k >= 0 && k <= nt) return orbit.xs.col(k);
    if (k > nt) return orbit.deck.apply_point(orbit.xs.col(k - nt));
    return orbit.deck.inverse().apply_point(orbit.xs.col(k + nt));
  };
  // 4th-order centered derivative of the position samples.
  const auto xdot_fd = [&](int k) -> VecX {
    return (8.0 * (x_wrapped(k + 1) - x_wrapped(k - 1)) - (x_wrapped(k + 2) - x_wrapped(k - 2))) /
           (12.0 * h);
  };

  Real lagr = 0.0, ham = 0.0, kinetic2 = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const Real w = (k == 0 || k == nt) ? 0.5 : 1.0;
    const Real t = k * h;
    const VecX x = orbit.x_at(k);
    const VecX y = orbit.y_at(k);
    const MatX g = model.metric(x);
    const VecX xd = xdot_fd(k);
    const Real v = pot.value(t, x);
    lagr += w * (0.5 * xd.dot(g * xd) - v);
    const VecX xdot_h = model.metric_inverse(x) * y;
    ham += w * (y.dot(xdot_h) - hamiltonian_value(model, pot, t, orbit.z_at(k)));
    kinetic2 += w * xd.dot(g * xd);
  }
  lagr *= h;
  ham *= h;
  kinetic2 *= h;

  ActionBreakdown out;
  out.lagrangian_form = lagr;
  out.hamiltonian_form = ham;
  out.xdot_l2_sq = kinetic2;
  out.l2_bound_ok = kinetic2 < 2.0 * lagr + 2.0 * pot.sup_norm() + 1e-9;
  (void)n;
  return out;
}

Real quotient_distance(const ManifoldModel& model, const VecX& z1, const VecX& z2) {
  const int n = model.dim();
  if (model.kind() == geom::ManifoldKind::Sphere2) return (z1 - z2).norm();
  Real best = std::numeric_limits<Real>::infinity();
  // Search small deck words: for the torus integer shifts, for the Klein
  // bottle additionally the glide reflection applied once.
  const auto consider = [&](const DeckTransform& d) {
    VecX w(2 * n);
    w.head(n) = d.apply_point(z2.head(n));
    w.tail(n) = d.apply_covector(z2.tail(n));
    VecX diff = w - z1;
    for (int i = 0; i < n; ++i) diff(i) -= std::round(diff(i));
    best = std::min(best, diff.norm());
  };
  consider(DeckTransform::identity(n));
  if (model.kind() == geom::ManifoldKind::FlatKleinBottle)
    consider(model.deck_generators()[0]);
  return best;
}

}  // namespace geodex::orbits
