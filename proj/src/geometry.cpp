#include "geodex/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "geodex/errors.hpp"

namespace geodex::geom {

namespace {

constexpr Real kTwoPi = 2.0 * std::numbers::pi;

void check_finite(const VecX& x) {
  if (!x.allFinite()) throw DomainError("chart point has non-finite coordinates");
}

}  // namespace

ManifoldModel ManifoldModel::flat_torus(int n) {
  if (n < 1) throw ConfigError("flat torus dimension must be positive");
  ManifoldModel m;
  m.kind_ = ManifoldKind::FlatTorus;
  m.n_ = n;
  for (int i = 0; i < n; ++i) {
    DeckTransform d = DeckTransform::identity(n);
    d.offset(i) = 1.0;
    m.deck_.push_back(d);
  }
  return m;
}

ManifoldModel ManifoldModel::flat_klein_bottle() {
  ManifoldModel m;
  m.kind_ = ManifoldKind::FlatKleinBottle;
  m.n_ = 2;
  // Glide reflection (x, y) -> (x + 1, -y).
  DeckTransform a{MatX::Identity(2, 2), VecX::Zero(2)};
  a.linear(1, 1) = -1.0;
  a.offset(0) = 1.0;
  // Translation (x, y) -> (x, y + 1).
  DeckTransform b = DeckTransform::identity(2);
  b.offset(1) = 1.0;
  m.deck_ = {a, b};
  return m;
}

ManifoldModel ManifoldModel::sphere2(Real radius, Real pole_margin) {
  if (radius <= 0.0) throw ConfigError("sphere radius must be positive");
  if (pole_margin <= 0.0 || pole_margin >= 1.0) throw ConfigError("pole margin out of range");
  ManifoldModel m;
  m.kind_ = ManifoldKind::Sphere2;
  m.n_ = 2;
  m.radius_ = radius;
  m.pole_margin_ = pole_margin;
  return m;
}

void ManifoldModel::check_chart(const VecX& x) const {
  check_finite(x);
  if (x.size() != n_) throw DomainError("chart point has wrong dimension");
  if (kind_ == ManifoldKind::Sphere2) {
    const Real theta = x(0);
    if (theta < pole_margin_ || theta > std::numbers::pi - pole_margin_)
      throw DomainError("sphere chart point within pole margin");
  }
}

MatX ManifoldModel::metric(const VecX& x) const {
  check_chart(x);
  if (is_flat()) return MatX::Identity(n_, n_);
  const Real r2 = radius_ * radius_;
  const Real s = std::sin(x(0));
  MatX g(2, 2);
  g << r2, 0.0, 0.0, r2 * s * s;
  return g;
}

MatX ManifoldModel::metric_inverse(const VecX& x) const {
  check_chart(x);
  if (is_flat()) return MatX::Identity(n_, n_);
  const Real r2 = radius_ * radius_;
  const Real s = std::sin(x(0));
  MatX gi(2, 2);
  gi << 1.0 / r2, 0.0, 0.0, 1.0 / (r2 * s * s);
  return gi;
}

std::vector<MatX> ManifoldModel::christoffel(const VecX& x) const {
  check_chart(x);
  std::vector<MatX> gamma(n_, MatX::Zero(n_, n_));
  if (is_flat()) return gamma;
  const Real theta = x(0);
  const Real s = std::sin(theta), c = std::cos(theta);
  // Gamma^theta_{phi phi} = -sin cos, Gamma^phi_{theta phi} = cot.
  gamma[0](1, 1) = -s * c;
  gamma[1](0, 1) = c / s;
  gamma[1](1, 0) = c / s;
  return gamma;
}

std::vector<MatX> ManifoldModel::metric_inverse_partials(const VecX& x) const {
  check_chart(x);
  std::vector<MatX> parts(n_, MatX::Zero(n_, n_));
  if (is_flat()) return parts;
  const Real r2 = radius_ * radius_;
  const Real s = std::sin(x(0)), c = std::cos(x(0));
  parts[0](1, 1) = -2.0 * c / (r2 * s * s * s);
  return parts;
}

VecX ManifoldModel::curvature_term(const VecX& x, const VecX& xi, const VecX& v) const {
  check_chart(x);
  if (is_flat()) return VecX::Zero(n_);
  // Constant sectional curvature K = 1/R^2: R(xi, v)v = K (<v,v> xi - <xi,v> v).
  const MatX g = metric(x);
  const Real k = 1.0 / (radius_ * radius_);
  const Real vv = v.dot(g * v);
  const Real xv = xi.dot(g * v);
  return k * (vv * xi - xv * v);
}

DeckTransform ManifoldModel::compose_deck(const std::vector<int>& indices) const {
  DeckTransform d = DeckTransform::identity(n_);
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(deck_.size()))
      throw ConfigError("deck generator index out of range");
    d = d.compose(deck_[idx]);
  }
  return d;
}

Potential Potential::zero(int n) {
  Potential p;
  p.n_ = n;
  p.zero_ = true;
  p.v_ = [](Real, const VecX&) { return 0.0; };
  p.grad_ = [n](Real, const VecX&) { return VecX::Zero(n); };
  p.hess_ = [n](Real, const VecX&) { return MatX::Zero(n, n); };
  p.sup_norm_ = 0.0;
  return p;
}

Potential Potential::cosine_lattice(const VecX& eps) {
  const int n = static_cast<int>(eps.size());
  Potential p;
  p.n_ = n;
  p.v_ = [eps](Real, const VecX& x) {
    Real v = 0.0;
    for (int i = 0; i < eps.size(); ++i) v += eps(i) * std::cos(kTwoPi * x(i));
    return v;
  };
  p.grad_ = [eps, n](Real, const VecX& x) {
    VecX g(n);
    for (int i = 0; i < n; ++i) g(i) = -kTwoPi * eps(i) * std::sin(kTwoPi * x(i));
    return g;
  };
  p.hess_ = [eps, n](Real, const VecX& x) {
    MatX h = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = -kTwoPi * kTwoPi * eps(i) * std::cos(kTwoPi * x(i));
    return h;
  };
  p.sup_norm_ = eps.cwiseAbs().sum();
  return p;
}

Potential Potential::plane_waves(int n, const std::vector<PlaneWaveTerm>& terms) {
  for (const auto& term : terms) {
    if (term.wave.size() != n) throw ConfigError("plane wave vector has wrong dimension");
  }
  Potential p;
  p.n_ = n;
  p.v_ = [terms](Real t, const VecX& x) {
    Real v = 0.0;
    for (const auto& w : terms)
      v += w.amplitude * std::cos(kTwoPi * (w.wave.dot(x) - w.frequency * t) + w.phase);
    return v;
  };
  p.grad_ = [terms, n](Real t, const VecX& x) {
    VecX g = VecX::Zero(n);
    for (const auto& w : terms)
      g -= w.amplitude * kTwoPi * std::sin(kTwoPi * (w.wave.dot(x) - w.frequency * t) + w.phase) *
           w.wave;
    return g;
  };
  p.hess_ = [terms, n](Real t, const VecX& x) {
    MatX h = MatX::Zero(n, n);
    for (const auto& w : terms)
      h -= w.amplitude * kTwoPi * kTwoPi *
           std::cos(kTwoPi * (w.wave.dot(x) - w.frequency * t) + w.phase) *
           (w.wave * w.wave.transpose());
    return h;
  };
  Real sup = 0.0;
  for (const auto& w : terms) sup += std::abs(w.amplitude);
  p.sup_norm_ = sup;
  return p;
}

Potential Potential::custom(int n, ValueFn v, GradFn g, HessFn h, Real sup_norm_hint) {
  Potential p;
  p.n_ = n;
  p.v_ = std::move(v);
  p.grad_ = std::move(g);
  p.hess_ = std::move(h);
  p.sup_norm_ = sup_norm_hint;

  // Finite-difference consistency check at random points, relative tol 1e-5.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<Real> unif(0.0, 1.0);
  const Real fd_h = 1e-5;
  for (int trial = 0; trial < 12; ++trial) {
    const Real t = unif(rng);
    VecX x(n);
    for (int i = 0; i < n; ++i) x(i) = unif(rng);
    const VecX grad = p.grad_(t, x);
    const MatX hess = p.hess_(t, x);
    const Real scale = 1.0 + std::abs(p.v_(t, x)) + grad.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      VecX xp = x, xm = x;
      xp(i) += fd_h;
      xm(i) -= fd_h;
      const Real fd_grad = (p.v_(t, xp) - p.v_(t, xm)) / (2.0 * fd_h);
      if (std::abs(fd_grad - grad(i)) > 1e-5 * scale)
        throw ConsistencyError("custom potential gradient fails finite-difference check");
      const VecX fd_hess_col = (p.grad_(t, xp) - p.grad_(t, xm)) / (2.0 * fd_h);
      if ((fd_hess_col - hess.col(i)).cwiseAbs().maxCoeff() >
          1e-5 * (1.0 + hess.cwiseAbs().maxCoeff()))
        throw ConsistencyError("custom potential Hessian fails finite-difference check");
    }
    if (asymmetry(hess) > 1e-10 * (1.0 + hess.cwiseAbs().maxCoeff()))
      throw ConsistencyError("custom potential Hessian is not symmetric");
  }
  return p;
}

PotentialData potential_data(const Potential& pot, Real t, const VecX& x) {
  return {pot.value(t, x), pot.gradient(t, x), pot.hessian(t, x)};
}

MatX covariant_hessian(const ManifoldModel& model, const Potential& pot, Real t, const VecX& x) {
  MatX h = pot.hessian(t, x);
  if (!model.is_flat()) {
    const VecX dv = pot.gradient(t, x);
    const auto gamma = model.christoffel(x);
    for (int k = 0; k < model.dim(); ++k) h -= gamma[k] * dv(k);
  }
  return symmetrized(h);
}

}  // namespace geodex::geom
