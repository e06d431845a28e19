#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "geodex/errors.hpp"
#include "geodex/framing.hpp"
#include "geodex/maslov.hpp"
#include "support.hpp"

using namespace geodex;
using namespace geodex::sp;
using namespace geodex::maslov;

namespace {
constexpr Real kPi = std::numbers::pi;

/// Unitary symplectic loop rotating by 2 pi k t in the plane (coord, n+coord),
/// conjugated by a fixed unitary symplectic V.
SymplecticPath unitary_loop(int n, int k, int coord, const MatX& v, int steps) {
  MatX gen = MatX::Zero(2 * n, 2 * n);
  gen(coord, n + coord) = -2.0 * kPi * k;
  gen(n + coord, coord) = 2.0 * kPi * k;
  const MatX conj_gen = v * gen * v.transpose();
  std::vector<MatX> samples;
  samples.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const Real t = static_cast<Real>(i) / steps;
    samples.push_back(MatX((t * conj_gen).exp()));
  }
  const MatX s_theta = symmetrized(MatX(standard_J(n) * conj_gen));
  return SymplecticPath(std::move(samples), [s_theta](Real) { return s_theta; }, 0.0, 1.0);
}

/// Random unitary symplectic matrix from the QR of a complex Gaussian.
MatX random_unitary_symplectic(std::mt19937_64& rng, int n) {
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = std::complex<Real>(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1));
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  MatX v(2 * n, 2 * n);
  v.topLeftCorner(n, n) = q.real();
  v.topRightCorner(n, n) = -q.imag();
  v.bottomLeftCorner(n, n) = q.imag();
  v.bottomRightCorner(n, n) = q.real();
  return v;
}

SymplecticPath random_admissible_path(std::mt19937_64& rng, int n, int steps) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    const MatX s0 = test::random_symmetric(rng, 2 * n, test::uniform(rng, 0.3, 4.0));
    const MatX s1 = test::random_symmetric(rng, 2 * n, test::uniform(rng, 0.3, 3.0));
    const Real phase = test::uniform(rng, 0.0, 2.0 * kPi);
    const MatFn gen = [s0, s1, phase](Real t) {
      return MatX(s0 + std::sin(2.0 * kPi * t + phase) * s1);
    };
    SymplecticPath path = fundamental_solution(gen, {.steps = steps});
    const MatX end = path.at(steps);
    if (std::abs((MatX::Identity(2 * n, 2 * n) - end).determinant()) < 1e-3) continue;
    // Reject samples whose crossings sit in the ambiguous resolution band.
    try {
      const auto crossings = find_crossings(path);
      bool ok = true;
      for (const auto& c : crossings)
        if (!c.regular) ok = false;
      if (ok) return path;
    } catch (const Error&) {
      continue;
    }
  }
  throw std::runtime_error("could not sample an admissible path");
}

}  // namespace

TEST_SUITE_BEGIN("maslov");

TEST_CASE("signature of small forms") {
  CHECK(signature(MatX::Identity(2, 2), 1e-9) == 2);
  MatX d(2, 2);
  d << 1, 0, 0, -1;
  CHECK(signature(d, 1e-9) == 0);
  d << -3.0, 0, 0, 1.0;
  CHECK(signature(d, 1e-9) == 0);
  d << 0, 0, 0, 1;
  CHECK_THROWS_AS(signature(d, 1e-9), DegenerateFormError);
}

TEST_CASE("crossing at t=0 carries the form -S(0) on all of R^2n") {
  const MatX s = -kPi * MatX::Identity(2, 2);
  const SymplecticPath path = matrix_exponential_path(s, 512);
  const auto crossings = find_crossings(path);
  REQUIRE(crossings.size() == 1);
  CHECK(crossings.front().at_start);
  CHECK(crossings.front().kernel.cols() == 2);
  // Form = -S(0) in the kernel basis; eigenvalues all +pi.
  Eigen::SelfAdjointEigenSolver<MatX> es(crossings.front().form);
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(kPi));
  CHECK((MatX::Identity(2, 2) - path.at(512)).determinant() == doctest::Approx(4.0));
  CHECK(cz_index(path) == 1);
}

TEST_CASE("identity path is rejected as non-regular") {
  std::vector<MatX> ids(65, MatX::Identity(2, 2));
  const SymplecticPath path(std::move(ids), [](Real) { return MatX::Zero(2, 2); }, 0.0, 1.0);
  CHECK_THROWS_AS(rs_index(path), RegularityError);
  CHECK_THROWS_AS(cz_index(path), AdmissibilityError);  // endpoint on the cycle
}

TEST_CASE("gamma2 has its only crossing at t = 0") {
  const SymplecticPath g2 = gamma2_path(-kPi * kPi, 2048);
  const auto crossings = find_crossings(g2);
  REQUIRE(crossings.size() == 1);
  CHECK(crossings.front().at_start);
  CHECK(cz_index(g2) == 1);
}

TEST_CASE("normalization: cz(e^{-t J0 S}) = -1/2 sign S") {
  auto rng = test::make_rng(515);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    const MatX s = test::random_symmetric_bounded(rng, 2 * n, 2.0 * kPi - 0.2);
    const SymplecticPath path = matrix_exponential_path(s, 1024);
    CHECK(cz_index(path) == -signature(s, 1e-12) / 2);
  }
}

TEST_CASE("endpoint forms of the two homotopy cases (n = 1)") {
  const Real muhat = -kPi * kPi;
  // Case sigma = 0: constant S = diag(muhat, 1), signature 0, cz = 0.
  MatX s_flat(2, 2);
  s_flat << muhat, 0.0, 0.0, 1.0;
  const SymplecticPath case1 = matrix_exponential_path(s_flat, 1024);
  const auto cross1 = find_crossings(case1);
  REQUIRE(cross1.size() == 1);
  CHECK((cross1.front().form - (-s_flat)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cz_index(case1) == 0);

  // Case sigma = 1: b(t) generator; form at t=0 is -diag(muhat - pi, 1 - pi),
  // positive definite, so cz = +1.
  const SymplecticPath case2 = gamma2_path(muhat, 2048);
  const auto cross2 = find_crossings(case2);
  REQUIRE(cross2.size() == 1);
  MatX expected(2, 2);
  expected << -(muhat - kPi), 0.0, 0.0, -(1.0 - kPi);
  CHECK((cross2.front().form - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(cross2.front().signature == 2);
  CHECK(cz_index(case2) == 1);
}

TEST_CASE("gamma1 has Conley-Zehnder index +1") {
  CHECK(cz_index(gamma1_path(2048)) == 1);
  CHECK(rs_index(gamma1_path(2048)).twice() == 2);
}

TEST_CASE("unitary loop degrees") {
  auto rng = test::make_rng(99);
  const MatX v1 = random_unitary_symplectic(rng, 1);
  const MatX v2 = random_unitary_symplectic(rng, 2);

  // Constant loop.
  std::vector<MatX> consts(65, v2);
  const SymplecticPath const_loop(std::move(consts), [](Real) { return MatX::Zero(4, 4); }, 0.0,
                                  1.0);
  CHECK(unitary_loop_degree(const_loop) == 0);

  // U(t)^2 is the full rotation of one plane: degree 1, value 2.
  CHECK(unitary_loop_degree(unitary_loop(2, 1, 0, MatX::Identity(4, 4), 256)) == 2);

  // e^{2 pi i k t} in one complex coordinate: 2k.
  CHECK(unitary_loop_degree(unitary_loop(1, 3, 0, v1, 512)) == 6);
  CHECK(unitary_loop_degree(unitary_loop(2, -2, 1, v2, 512)) == -4);
}

TEST_CASE("loop property: cz(Theta Psi) = 2 deg + cz(Psi)") {
  auto rng = test::make_rng(2718);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 2;
    const SymplecticPath psi = random_admissible_path(rng, n, 2048);
    const int cz_psi = cz_index(psi);
    const int k = static_cast<int>(test::uniform(rng, -2.49, 2.49));
    const MatX v = random_unitary_symplectic(rng, n);
    const SymplecticPath theta = unitary_loop(n, k, trial % n, v, 2048);
    const int two_deg = unitary_loop_degree(theta);
    CHECK(two_deg == 2 * k);
    const SymplecticPath product = left_multiply_loop(theta, psi);
    CHECK(cz_index(product) == two_deg + cz_psi);
  }
}

TEST_CASE("catenation: rs splits additively at a non-crossing time") {
  auto rng = test::make_rng(31415);
  for (int trial = 0; trial < 6; ++trial) {
    const SymplecticPath psi = random_admissible_path(rng, 1, 2048);
    const int mid = 1024;
    const Real d_mid = (MatX::Identity(2, 2) - psi.at(mid)).determinant();
    if (std::abs(d_mid) < 1e-4) continue;
    const HalfInteger whole = rs_index(psi);
    const HalfInteger left = rs_index(psi.slice(0, mid));
    const HalfInteger right = rs_index(psi.slice(mid, 2048));
    CHECK(whole.twice() == left.twice() + right.twice());
  }
}

TEST_CASE("transition-loop naturality: mu_RS(Graph U psi U^{-1}) = 0") {
  // psi(t) = rotation by theta(t) with theta(1) = -theta(0) gives an O(n)
  // transition compatible with E_1; the twisted loop has degree 0.
  auto rng = test::make_rng(777);
  const int n = 2;
  for (int trial = 0; trial < 5; ++trial) {
    const Real theta0 = test::uniform(rng, 0.4, 2.6);
    const auto theta = [theta0](Real t) { return theta0 * (1.0 - 2.0 * t); };
    const int steps = 1024;
    std::vector<MatX> samples;
    samples.reserve(steps + 1);
    for (int k = 0; k <= steps; ++k) {
      const Real t = static_cast<Real>(k) / steps;
      MatX rot(2, 2);
      rot << std::cos(theta(t)), -std::sin(theta(t)), std::sin(theta(t)), std::cos(theta(t));
      MatX block = MatX::Zero(4, 4);
      block.topLeftCorner(2, 2) = rot;
      block.bottomRightCorner(2, 2) = rot;
      const MatX u = framing::rotation_U(n, t);
      samples.push_back(u * block * u.transpose());
    }
    // Generator by differencing: S = J0 Psi' Psi^{-1} (finite differences are
    // adequate for crossing forms; the loop is smooth).
    auto samples_copy = samples;
    const Real h = 1.0 / steps;
    const MatFn gen = [samples_copy, h, steps](Real t) {
      int k = std::min(static_cast<int>(t * steps), steps - 1);
      int kp = std::min(k + 1, steps);
      int km = std::max(k - 1, 0);
      const MatX dpsi = (samples_copy[kp] - samples_copy[km]) / ((kp - km) * h);
      return symmetrized(MatX(standard_J(2) * dpsi * samples_copy[k].inverse()));
    };
    const SymplecticPath loop(std::move(samples), gen, 0.0, 1.0);
    CHECK(unitary_loop_degree(loop) == 0);
    CHECK(rs_index(loop).twice() == 0);
  }
}

TEST_CASE("perturbing the generator within admissibility keeps cz fixed") {
  auto rng = test::make_rng(5050);
  for (int trial = 0; trial < 5; ++trial) {
    const SymplecticPath psi = random_admissible_path(rng, 1, 2048);
    const int cz0 = cz_index(psi);
    const MatX bump = test::random_symmetric(rng, 2, 5e-3);
    const MatFn base = psi.generator_fn();
    const MatFn perturbed = [base, bump](Real t) {
      return MatX(base(t) + std::sin(kPi * t) * bump);
    };
    const SymplecticPath psi2 = fundamental_solution(perturbed, {.steps = 2048});
    CHECK(cz_index(psi2) == cz0);
  }
}

TEST_CASE("inadmissible endpoint raises an error") {
  // Full rotation e^{2 pi t J0} ends at the identity.
  MatX gen = MatX::Zero(2, 2);
  const MatX s = -2.0 * kPi * MatX::Identity(2, 2);
  const SymplecticPath loop = matrix_exponential_path(s, 512);
  CHECK_THROWS_AS(cz_index(loop), AdmissibilityError);
  (void)gen;
}

TEST_SUITE_END();
