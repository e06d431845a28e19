#pragma once

#include <functional>
#include <vector>

#include "geodex/types.hpp"

namespace geodex::geom {

/// Affine chart isometry x -> A x + b identifying lifted loop endpoints.
struct DeckTransform {
  MatX linear;
  VecX offset;

  static DeckTransform identity(int n) { return {MatX::Identity(n, n), VecX::Zero(n)}; }

  VecX apply_point(const VecX& x) const { return linear * x + offset; }
  VecX apply_vector(const VecX& v) const { return linear * v; }
  /// Covector pushforward; valid for orthogonal linear parts.
  VecX apply_covector(const VecX& y) const { return linear * y; }

  DeckTransform inverse() const {
    MatX ai = linear.transpose();  // orthogonal linear part
    return {ai, -(ai * offset)};
  }
  DeckTransform compose(const DeckTransform& then) const {
    return {then.linear * linear, then.linear * offset + then.offset};
  }
  bool is_identity(Real tol = 1e-12) const {
    return (linear - MatX::Identity(linear.rows(), linear.cols())).cwiseAbs().maxCoeff() < tol &&
           offset.cwiseAbs().maxCoeff() < tol;
  }
};

enum class ManifoldKind { FlatTorus, FlatKleinBottle, Sphere2 };

/// Chart-based metric data for the model manifolds. A single global
/// (quotient) chart per model; all evaluators are closed-form.
class ManifoldModel {
 public:
  static ManifoldModel flat_torus(int n);
  static ManifoldModel flat_klein_bottle();
  static ManifoldModel sphere2(Real radius, Real pole_margin = 0.05);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return n_; }
  bool is_flat() const { return kind_ != ManifoldKind::Sphere2; }
  Real sphere_radius() const { return radius_; }

  /// Throws DomainError if x is outside the chart (sphere pole margin).
  void check_chart(const VecX& x) const;

  MatX metric(const VecX& x) const;
  MatX metric_inverse(const VecX& x) const;
  /// Christoffel symbols: component k of result is the matrix (Gamma^k_{ij})_{ij}.
  std::vector<MatX> christoffel(const VecX& x) const;
  /// Partial derivatives of the inverse metric: component l is d(g^{-1})/dx^l.
  std::vector<MatX> metric_inverse_partials(const VecX& x) const;

  /// R(xi, v)v in chart components.
  VecX curvature_term(const VecX& x, const VecX& xi, const VecX& v) const;

  const std::vector<DeckTransform>& deck_generators() const { return deck_; }
  /// Composes generators by index list (left to right).
  DeckTransform compose_deck(const std::vector<int>& indices) const;

 private:
  ManifoldModel() = default;

  ManifoldKind kind_ = ManifoldKind::FlatTorus;
  int n_ = 2;
  Real radius_ = 1.0;
  Real pole_margin_ = 0.05;
  std::vector<DeckTransform> deck_;
};

struct PotentialData {
  Real value;
  VecX gradient;
  MatX hessian;
};

struct PlaneWaveTerm {
  Real amplitude = 0.0;
  VecX wave;         // integer wave vector (stored as reals)
  Real frequency = 0.0;  // integer time frequency
  Real phase = 0.0;
};

/// Time-periodic potential V(t, x) with chart gradient and Hessian.
class Potential {
 public:
  using ValueFn = std::function<Real(Real, const VecX&)>;
  using GradFn = std::function<VecX(Real, const VecX&)>;
  using HessFn = std::function<MatX(Real, const VecX&)>;

  static Potential zero(int n);
  /// V = sum_i eps_i cos(2 pi x^i).
  static Potential cosine_lattice(const VecX& eps);
  /// V = sum_j a_j cos(2 pi (k_j . x - m_j t) + phase_j).
  static Potential plane_waves(int n, const std::vector<PlaneWaveTerm>& terms);
  /// Callback triple; consistency-checked by finite differences at construction.
  static Potential custom(int n, ValueFn v, GradFn g, HessFn h, Real sup_norm_hint);

  int dim() const { return n_; }
  Real value(Real t, const VecX& x) const { return v_(t, x); }
  VecX gradient(Real t, const VecX& x) const { return grad_(t, x); }
  MatX hessian(Real t, const VecX& x) const { return hess_(t, x); }
  Real sup_norm() const { return sup_norm_; }
  bool is_zero() const { return zero_; }

 private:
  Potential() = default;

  int n_ = 0;
  ValueFn v_;
  GradFn grad_;
  HessFn hess_;
  Real sup_norm_ = 0.0;
  bool zero_ = false;
};

PotentialData potential_data(const Potential& pot, Real t, const VecX& x);

/// Covariant Hessian of V as a (0,2)-tensor: Hess_ij - Gamma^k_ij d_k V.
MatX covariant_hessian(const ManifoldModel& model, const Potential& pot, Real t, const VecX& x);

}  // namespace geodex::geom
