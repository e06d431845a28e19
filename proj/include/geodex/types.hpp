#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

namespace geodex {

using Real = double;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CMatX = Eigen::MatrixXcd;

/// Time-dependent matrix family t -> M(t).
using MatFn = std::function<MatX(Real)>;
/// Two-parameter matrix family (lambda, t) -> M(lambda, t).
using MatFn2 = std::function<MatX(Real, Real)>;

/// Standard complex structure on R^{2n}: J0 = [[0, -1],[1, 0]] in n x n blocks.
inline MatX standard_J(int n) {
  MatX j = MatX::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -MatX::Identity(n, n);
  j.bottomLeftCorner(n, n) = MatX::Identity(n, n);
  return j;
}

/// Boundary twist E_sigma = diag((-1)^sigma, 1, ..., 1).
inline MatX twist_E(int n, int sigma) {
  MatX e = MatX::Identity(n, n);
  if (sigma % 2 != 0) e(0, 0) = -1.0;
  return e;
}

/// Max-abs-coefficient deviation of Psi^T J0 Psi from J0.
inline Real symplectic_defect(const MatX& psi) {
  const int n = static_cast<int>(psi.rows()) / 2;
  const MatX j = standard_J(n);
  return (psi.transpose() * j * psi - j).cwiseAbs().maxCoeff();
}

template <typename Derived>
Real asymmetry(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

template <typename Derived>
MatX symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return 0.5 * (m + m.transpose());
}

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3, clamped to [0,1].
inline Real smoothstep5(Real s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return ((6.0 * s - 15.0) * s + 10.0) * s * s * s;
}

inline Real smoothstep5_deriv(Real s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return ((30.0 * s - 60.0) * s + 30.0) * s * s;
}

/// Monotone ramp on [0,1], identically 0 on [0, margin] and 1 on [1-margin, 1].
struct SmoothRamp {
  Real margin = 0.1;

  Real operator()(Real t) const { return smoothstep5((t - margin) / (1.0 - 2.0 * margin)); }
  Real deriv(Real t) const {
    return smoothstep5_deriv((t - margin) / (1.0 - 2.0 * margin)) / (1.0 - 2.0 * margin);
  }
  Real second_deriv(Real t) const {
    const Real w = 1.0 - 2.0 * margin;
    const Real s = (t - margin) / w;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return ((120.0 * s - 180.0) * s + 60.0) * s / (w * w);
  }
};

/// Exact half-integer arithmetic; stores twice the value.
class HalfInteger {
 public:
  HalfInteger() = default;
  explicit HalfInteger(int twice) : twice_(twice) {}
  static HalfInteger whole(int k) { return HalfInteger(2 * k); }

  int twice() const { return twice_; }
  bool is_integer() const { return twice_ % 2 == 0; }
  int integer() const { return twice_ / 2; }
  Real value() const { return 0.5 * static_cast<Real>(twice_); }

  HalfInteger operator+(HalfInteger o) const { return HalfInteger(twice_ + o.twice_); }
  HalfInteger operator-(HalfInteger o) const { return HalfInteger(twice_ - o.twice_); }
  HalfInteger& operator+=(HalfInteger o) {
    twice_ += o.twice_;
    return *this;
  }
  bool operator==(const HalfInteger&) const = default;

  std::string str() const {
    if (is_integer()) return std::to_string(integer());
    return std::to_string(twice_) + "/2";
  }

 private:
  int twice_ = 0;
};

}  // namespace geodex
