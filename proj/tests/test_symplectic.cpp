#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "geodex/errors.hpp"
#include "geodex/framing.hpp"
#include "geodex/orbits.hpp"
#include "geodex/symplectic.hpp"
#include "support.hpp"

using namespace geodex;
using namespace geodex::sp;

namespace {
constexpr Real kPi = std::numbers::pi;

MatX coshsinh_matrix(Real t, Real kappa) {
  MatX m(2, 2);
  m << std::cosh(t * kappa), std::sinh(t * kappa) / kappa, kappa * std::sinh(t * kappa),
      std::cosh(t * kappa);
  return m;
}
}  // namespace

TEST_SUITE_BEGIN("symplectic");

TEST_CASE("zero generator gives the constant identity path") {
  const MatFn zero = [](Real) { return MatX::Zero(2, 2); };
  const SymplecticPath path = fundamental_solution(zero, {.steps = 128});
  CHECK((path.at(128) - MatX::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(path.defect() == 0.0);
}

TEST_CASE("constant hyperbolic generator reproduces the cosh/sinh matrix") {
  const Real muhat = -4.0;
  const Real kappa = std::sqrt(-muhat);
  MatX s(2, 2);
  s << muhat, 0.0, 0.0, 1.0;
  const MatFn gen = [s](Real) { return s; };
  const SymplecticPath path = fundamental_solution(gen, {.steps = 2048});
  Real max_err = 0.0;
  for (int k = 0; k <= path.steps(); k += 64) {
    const Real t = path.time_of(k);
    max_err = std::max(max_err, (path.at(k) - coshsinh_matrix(t, kappa)).cwiseAbs().maxCoeff());
  }
  CHECK(max_err < 1e-8);

  // Eigenvalues rho_pm(t) = cosh(t kappa) +- sinh(t kappa).
  for (const Real t : {0.25, 0.5, 1.0}) {
    const Eigen::VectorXcd eig = path.value(t).eigenvalues();
    const Real rp = std::cosh(t * kappa) + std::sinh(t * kappa);
    const Real rm = std::cosh(t * kappa) - std::sinh(t * kappa);
    const Real got_max = eig.cwiseAbs().maxCoeff();
    const Real got_min = eig.cwiseAbs().minCoeff();
    CHECK(std::abs(got_max - rp) < 1e-8);
    CHECK(std::abs(got_min - rm) < 1e-8);
  }
}

TEST_CASE("matrix exponential path oracles") {
  // S = -pi 1: e^{pi t J0} is the rotation by pi t, so Psi(1) = -1.
  const MatX s = -kPi * MatX::Identity(2, 2);
  const SymplecticPath path = matrix_exponential_path(s, 256);
  CHECK((path.at(256) + MatX::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  const SymplecticPath id_path = matrix_exponential_path(MatX::Zero(4, 4), 64);
  for (const MatX& m : id_path.samples())
    CHECK((m - MatX::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RK4 fundamental solution matches the exponential on random constant S") {
  auto rng = test::make_rng(2024);
  Real max_err = 0.0, max_det = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(trial % 2);
    const MatX s = test::random_symmetric(rng, 2 * n, test::uniform(rng, 0.1, 0.95) * 2.0 * kPi);
    const MatX s_copy = s;
    const SymplecticPath rk = fundamental_solution([s_copy](Real) { return s_copy; },
                                                   {.steps = 1024});
    const SymplecticPath ex = matrix_exponential_path(s, 1024);
    max_err = std::max(
        max_err, (rk.at(rk.steps()) - ex.at(ex.steps())).cwiseAbs().maxCoeff());
    for (int k = 0; k <= rk.steps(); k += 128)
      max_det = std::max(max_det, std::abs(rk.at(k).determinant() - 1.0));
  }
  CHECK(max_err < 1e-8);
  CHECK(max_det < 1e-8);
}

TEST_CASE("gamma1 endpoint and generator recovery by differencing") {
  const SymplecticPath g1 = gamma1_path(2048);
  MatX expected(2, 2);
  expected << -2.0, 0.0, 0.0, -0.5;
  CHECK((g1.at(2048) - expected).cwiseAbs().maxCoeff() < 1e-12);

  // S(t) = J0 Psi' Psi^{-1} recovered by central differences to O(h^2).
  const Real h = g1.dt();
  for (int k = 256; k < 2048; k += 512) {
    const MatX dpsi = (g1.at(k + 1) - g1.at(k - 1)) / (2.0 * h);
    const MatX s_fd = standard_J(1) * dpsi * g1.at(k).inverse();
    CHECK((s_fd - g1.generator(g1.time_of(k))).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("gamma2 determinant function f(t) and endpoint value") {
  const Real muhat = -kPi * kPi;
  const Real kappa = std::sqrt(-muhat);
  const SymplecticPath g2 = gamma2_path(muhat, 2048);
  Real max_err = 0.0;
  for (int k = 0; k <= 2048; ++k) {
    const Real t = g2.time_of(k);
    const Real f = 2.0 - 2.0 * std::cos(kPi * t) * std::cosh(kappa * t) +
                   (kappa - 1.0 / kappa) * std::sin(kPi * t) * std::sinh(kappa * t);
    const Real det = (MatX::Identity(2, 2) - g2.at(k)).determinant();
    max_err = std::max(max_err, std::abs(det - f));
    if (k > 0) CHECK(f > 0.0);
  }
  CHECK(max_err < 1e-6);
  const Real f1 = (MatX::Identity(2, 2) - g2.at(2048)).determinant();
  CHECK(f1 == doctest::Approx(2.0 * (1.0 + std::cosh(kappa))).epsilon(1e-9));
  CHECK_THROWS_AS(gamma2_path(-1.0), ParameterError);
}

TEST_CASE("both reference paths depart from 1 into Sp+") {
  // det(1 - gamma(eps)) > 0 at eps = 1e-3 for gamma1 and gamma2: expanding
  // the gamma1 product gives det(1 - gamma1(t)) = (pi^2 - 1) t^2 + O(t^3).
  const SymplecticPath g1 = gamma1_path(2048);
  const SymplecticPath g2 = gamma2_path(-kPi * kPi, 2048);
  const Real eps = 1e-3;
  const Real d1 = (MatX::Identity(2, 2) - g1.value(eps)).determinant();
  const Real d2 = (MatX::Identity(2, 2) - g2.value(eps)).determinant();
  CHECK(d1 > 0.0);
  CHECK(d1 == doctest::Approx((kPi * kPi - 1.0) * eps * eps).epsilon(0.01));
  CHECK(d2 > 0.0);
}

TEST_CASE("solid-torus coordinates") {
  const TorusCoords at_id = torus_coords(MatX::Identity(2, 2));
  CHECK(at_id.theta == 0.0);
  CHECK(at_id.u == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at_id.v == doctest::Approx(0.0).epsilon(1e-14));

  MatX rot(2, 2);
  const Real angle = 1.1;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const TorusCoords at_rot = torus_coords(rot);
  CHECK(at_rot.theta == doctest::Approx(angle));
  CHECK(std::abs(at_rot.u) < 1e-12);
  CHECK(std::abs(at_rot.v) < 1e-12);

  MatX g1_end(2, 2);
  g1_end << -2.0, 0.0, 0.0, -0.5;
  const TorusCoords at_end = torus_coords(g1_end, 3.0);
  CHECK(at_end.theta == doctest::Approx(kPi));
  CHECK(at_end.u == doctest::Approx(std::log(2.0)));
  CHECK(std::abs(at_end.v) < 1e-12);
}

TEST_CASE("path CSV starts at the identity row") {
  const SymplecticPath g1 = gamma1_path(64);
  std::ostringstream os;
  write_path_csv(os, g1);
  std::istringstream is(os.str());
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(header == "t,theta,u,v,det1m");
  CHECK(first == "0,0,0,0,0");
  int rows = 2;
  std::string line;
  while (std::getline(is, line)) ++rows;
  CHECK(rows - 1 == 65);
}

TEST_CASE("monodromy conjugation: Psi_U(1) equals the framed linearized flow") {
  const auto torus = geom::ManifoldModel::flat_torus(2);
  const auto pot = geom::Potential::cosine_lattice((VecX(2) << 0.1, 0.1).finished());
  VecX seed(4);
  seed << 0.48, 0.51, 0.0, 0.0;
  const orbits::PerturbedOrbit orbit =
      orbits::find_orbit(torus, pot, seed, geom::DeckTransform::identity(2));
  const framing::ClosedFrame frame = framing::build_closed_frame(torus, pot, orbit);
  const framing::SymmetricFamily su = framing::assemble_SU(frame);
  const SymplecticPath psi = fundamental_solution(su.value, {.steps = orbit.steps()});

  // Phi_U(1)^{-1} dphi_1 Phi_U(0) with Phi = diag(phi, phi^{-T}) and the
  // closed-frame endpoint relation phi(1) = phi(0) E.
  const int n = 2;
  const MatX e = frame.E();
  const MatX phi0 = frame.phi.front();
  MatX phi_state0 = MatX::Zero(2 * n, 2 * n);
  phi_state0.topLeftCorner(n, n) = phi0;
  phi_state0.bottomRightCorner(n, n) = phi0.inverse().transpose();
  const MatX phi1 = phi0 * e;
  MatX phi_state1 = MatX::Zero(2 * n, 2 * n);
  phi_state1.topLeftCorner(n, n) = phi1;
  phi_state1.bottomRightCorner(n, n) = phi1.inverse().transpose();
  const MatX u1 = framing::rotation_U(n, 1.0);
  const MatX conj = (frame.sigma == 0 ? phi_state1 : phi_state1 * u1.transpose()).inverse() *
                    orbit.monodromy.matrix * phi_state0;
  CHECK((psi.at(psi.steps()) - conj).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_SUITE_END();
