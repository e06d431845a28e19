#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geodex/errors.hpp"
#include "geodex/orbits.hpp"
#include "support.hpp"

using namespace geodex;
using namespace geodex::geom;
using namespace geodex::orbits;

namespace {
constexpr Real kPi = std::numbers::pi;

VecX vec2(Real a, Real b) {
  VecX v(2);
  v << a, b;
  return v;
}
VecX phase(Real x0, Real x1, Real y0, Real y1) {
  VecX z(4);
  z << x0, x1, y0, y1;
  return z;
}
}  // namespace

TEST_SUITE_BEGIN("orbits");

TEST_CASE("free torus motion: rhs, time-1 point and unit-shear monodromy") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto v0 = Potential::zero(2);

  const VecX rhs = hamiltonian_rhs(torus, v0, 0.0, phase(0, 0, 1, 0));
  CHECK((rhs - phase(1, 0, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);

  const FlowResult flow = flow_time1(torus, v0, phase(0, 0, 1, 0));
  CHECK((flow.z1 - phase(1, 0, 1, 0)).cwiseAbs().maxCoeff() < 1e-12);

  MatX shear = MatX::Identity(4, 4);
  shear.topRightCorner(2, 2) = MatX::Identity(2, 2);
  CHECK((flow.chart_jacobian - shear).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(flow.symplectic_defect < 1e-12);
}

TEST_CASE("lattice stationary points are equilibria of the vector field") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto pot = Potential::cosine_lattice(vec2(0.1, 0.1));
  const VecX z = phase(0.5, 0.5, 0.0, 0.0);
  CHECK(hamiltonian_rhs(torus, pot, 0.3, z).cwiseAbs().maxCoeff() < 1e-15);
  const FlowResult flow = flow_time1(torus, pot, z);
  CHECK((flow.z1 - z).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sphere equator flow matches the great circle") {
  const auto sphere = ManifoldModel::sphere2(1.0);
  const auto v0 = Potential::zero(2);
  // Great circle along the equator, one turn per unit time: y_phi = 2 pi.
  const VecX z0 = phase(kPi / 2.0, 0.0, 0.0, 2.0 * kPi);
  const VecX rhs = hamiltonian_rhs(sphere, v0, 0.0, z0);
  CHECK((rhs - phase(0.0, 2.0 * kPi, 0.0, 0.0)).cwiseAbs().maxCoeff() < 1e-13);

  FlowOptions opts;
  opts.with_monodromy = false;
  const FlowResult flow = flow_time1(sphere, v0, z0, opts);
  CHECK(std::abs(flow.z1(0) - kPi / 2.0) < 1e-10);
  CHECK(std::abs(flow.z1(1) - 2.0 * kPi) < 1e-8);

  // rhs Jacobian agrees with finite differences off the equator.
  auto rng = test::make_rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    VecX z = phase(test::uniform(rng, 0.8, 2.2), test::uniform(rng, -1.0, 1.0),
                   test::uniform(rng, -0.5, 0.5), test::uniform(rng, -0.5, 0.5));
    const MatX jac = hamiltonian_rhs_jacobian(sphere, v0, 0.0, z);
    const Real h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      VecX zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      const VecX col =
          (hamiltonian_rhs(sphere, v0, 0.0, zp) - hamiltonian_rhs(sphere, v0, 0.0, zm)) /
          (2.0 * h);
      CHECK((col - jac.col(i)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("find_orbit converges to the lattice equilibrium") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto pot = Potential::cosine_lattice(vec2(0.1, 0.1));
  const VecX seed = phase(0.47, 0.52, 0.01, -0.02);
  const PerturbedOrbit orbit =
      find_orbit(torus, pot, seed, DeckTransform::identity(2));
  CHECK(orbit.residual < 1e-10);
  CHECK(std::abs(orbit.x_at(0)(0) - 0.5) < 1e-9);
  CHECK(std::abs(orbit.x_at(0)(1) - 0.5) < 1e-9);
  CHECK(orbit.action == doctest::Approx(0.2).epsilon(1e-8));  // -V = 2 eps
  CHECK(orbit.l2_bound_ok);

  // Newton fixed point: restarting from the solution converges immediately.
  const PerturbedOrbit again = find_orbit(torus, pot, orbit.z_at(0), orbit.deck);
  CHECK(again.residual < 1e-10);
}

TEST_CASE("free constant loops are rejected as a degenerate family") {
  const auto torus = ManifoldModel::flat_torus(2);
  CHECK_THROWS_AS(
      find_orbit(torus, Potential::zero(2), phase(0, 0, 0, 0), DeckTransform::identity(2)),
      DegeneracyError);
}

TEST_CASE("Klein bottle orientation-reversing geodesic with a co-moving wave") {
  const auto klein = ManifoldModel::flat_klein_bottle();
  // V = eps cos(2 pi (x - t)) cos(2 pi y) as a sum of two plane waves.
  const Real eps = 0.1;
  const auto pot = Potential::plane_waves(
      2, {{eps / 2.0, vec2(1.0, 1.0), 1.0, 0.0}, {eps / 2.0, vec2(1.0, -1.0), 1.0, 0.0}});
  const DeckTransform glide = klein.deck_generators()[0];
  const VecX seed = phase(0.0, 0.03, 1.0, 0.02);
  const PerturbedOrbit orbit = find_orbit(klein, pot, seed, glide);
  CHECK(orbit.residual < 1e-10);
  CHECK(std::abs(orbit.x_at(0)(1)) < 1e-9);       // settles on the y = 0 line
  CHECK(std::abs(orbit.y_at(0)(0) - 1.0) < 1e-9); // unit horizontal momentum
  CHECK(orbit.action == doctest::Approx(0.5 - eps).epsilon(1e-7));
  CHECK(orbit.l2_bound_ok);
}

TEST_CASE("action forms agree and the kinetic L2 bound holds") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto pot = Potential::cosine_lattice(vec2(0.08, 0.05));
  // Librating orbit from a generic seed.
  const PerturbedOrbit orbit = find_orbit(torus, pot, phase(0.45, 0.55, 0.02, -0.01),
                                          DeckTransform::identity(2));
  const ActionBreakdown action = action_of(torus, pot, orbit);
  CHECK(std::abs(action.lagrangian_form - action.hamiltonian_form) < 1e-8);
  CHECK(action.l2_bound_ok);
}

TEST_CASE("manually sampled free geodesic has action 1/2") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto v0 = Potential::zero(2);
  const DeckTransform shift = torus.deck_generators()[0];
  const PerturbedOrbit orbit = sample_orbit(torus, v0, phase(0.2, 0.4, 1.0, 0.0), shift);
  CHECK(orbit.residual < 1e-12);
  CHECK(orbit.action == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(orbit.action - orbit.action_hamiltonian) < 1e-10);
}

TEST_CASE("monodromy is symplectic and RK4 converges at fourth order") {
  const auto torus = ManifoldModel::flat_torus(2);
  const auto pot = Potential::cosine_lattice(vec2(0.3, 0.2));
  const VecX z0 = phase(0.1, 0.2, 0.4, -0.3);

  FlowOptions coarse;
  coarse.symplectic_tol = 1.0;  // measuring, not enforcing
  coarse.steps = 64;
  const VecX z_a = flow_time1(torus, pot, z0, coarse).z1;
  coarse.steps = 128;
  const VecX z_b = flow_time1(torus, pot, z0, coarse).z1;
  coarse.steps = 256;
  const VecX z_c = flow_time1(torus, pot, z0, coarse).z1;
  const Real ratio = (z_a - z_b).norm() / (z_b - z_c).norm();
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);

  FlowOptions fine;
  fine.steps = 2048;
  CHECK(flow_time1(torus, pot, z0, fine).symplectic_defect < 1e-8);
}

TEST_CASE("quotient distance identifies lattice translates") {
  const auto torus = ManifoldModel::flat_torus(2);
  const VecX a = phase(0.1, 0.9, 0.3, 0.0);
  const VecX b = phase(1.1, -0.1, 0.3, 0.0);
  CHECK(quotient_distance(torus, a, b) < 1e-12);
  const VecX c = phase(0.4, 0.9, 0.3, 0.0);
  CHECK(quotient_distance(torus, a, c) > 0.2);
}

TEST_SUITE_END();
