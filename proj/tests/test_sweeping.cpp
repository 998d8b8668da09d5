#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/io.hpp"
#include "sweep/sweeping.hpp"

#include <cstdio>
#include <random>

using namespace sweep;

namespace {

// Scalar example: u = -1, b(t) = -t/2, x0 = 0; solution x(t) = t/2.
ControlFunction scalar_u() {
  return [](Scalar) { return Matrix::Constant(1, 1, -1.0); };
}
OffsetFunction ramp_b() {
  return [](Scalar t) { return Vector::Constant(1, -t / 2); };
}

// Shrinking 2d box: u = (e1; e2), b(t) = (1 - t/2, 1 - t/2), x0 = (1,1).
ControlFunction box_u() {
  return [](Scalar) {
    Matrix U(2, 2);
    U << 1, 0, 0, 1;
    return U;
  };
}
OffsetFunction box_b() {
  return [](Scalar t) { return Vector::Constant(2, 1.0 - t / 2); };
}

// Degenerate three-face data on [0, pi] (moving set jumps at t = 0+).
ControlFunction degen_u() {
  return [](Scalar t) {
    Matrix U(3, 2);
    U << 1, 0, -1, 0, -std::cos(t), -std::sin(t);
    return U;
  };
}
OffsetFunction degen_b() {
  return [](Scalar t) {
    Vector b(3);
    b << 1, -1, -std::cos(t) - std::sin(t);
    return b;
  };
}

}  // namespace

TEST_CASE("index_tau matches its definition") {
  SUBCASE("tau = 0 spans the whole horizon") {
    auto [lo, hi] = index_tau(Mesh(1.0, 10), 0.0);
    CHECK(lo == 0);
    CHECK(hi == 10);
  }
  SUBCASE("T=1, k=10, tau=0.25") {
    auto [lo, hi] = index_tau(Mesh(1.0, 10), 0.25);
    // oracle: direct enumeration of t_j = j/10
    CHECK(lo == 3);
    CHECK(hi == 7);
  }
  SUBCASE("tau = T/2 with even k pins the midpoint") {
    auto [lo, hi] = index_tau(Mesh(2.0, 8), 1.0);
    CHECK(lo == 4);
    CHECK(hi == 4);
  }
}

TEST_CASE("catch_up on a static interior set is constant") {
  Mesh mesh(1.0, 50);
  auto ctrl = ControlPath::sample(mesh, box_u(), [](Scalar) { return Vector::Constant(2, 5.0); });
  Vector x0(2);
  x0 << 0.3, -0.2;
  const auto path = catch_up(x0, ctrl);
  CHECK((path.x.rowwise() - x0.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(path.eta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("catch_up reproduces the scalar ramp solution") {
  Mesh mesh(1.0, 64);
  auto ctrl = ControlPath::sample(mesh, scalar_u(), ramp_b());
  const auto path = catch_up(Vector::Zero(1), ctrl);
  for (int j = 0; j <= mesh.k; ++j) {
    CHECK(std::abs(path.x(j, 0) - mesh.t(j) / 2) <= 1e-12);
  }
  const auto rep = verify_feasible(path, ctrl);
  CHECK(rep.ok);
  // zero margin on the active face throughout
  for (int j = 1; j <= mesh.k; ++j) {
    CHECK(std::abs(-path.x(j, 0) - ctrl.b(j, 0)) <= 1e-12);
  }
}

TEST_CASE("catch_up pushes the shrinking box to its corner") {
  Mesh mesh(1.0, 100);
  auto ctrl = ControlPath::sample(mesh, box_u(), box_b());
  Vector x0(2);
  x0 << 1, 1;
  const auto path = catch_up(x0, ctrl);
  CHECK(std::abs(path.x(mesh.k, 0) - 0.5) <= 1e-10);
  CHECK(std::abs(path.x(mesh.k, 1) - 0.5) <= 1e-10);
  CHECK(verify_feasible(path, ctrl).ok);
}

TEST_CASE("degenerate moving set trips the jump guard") {
  Mesh mesh(M_PI, 50);
  auto ctrl = ControlPath::sample(mesh, degen_u(), degen_b());
  Vector x0(2);
  x0 << 1, 0;
  CHECK_THROWS_AS(catch_up(x0, ctrl), DiscontinuityDetected);
}

TEST_CASE("verify_feasible flags a hand-built violation") {
  Mesh mesh(1.0, 10);
  auto ctrl = ControlPath::sample(mesh, scalar_u(), ramp_b());
  auto path = catch_up(Vector::Zero(1), ctrl);
  path.x(5, 0) -= 0.1;  // leave C by 0.1: -x <= b becomes -0.15+... > b
  auto rep = verify_feasible(path, ctrl);
  CHECK_FALSE(rep.ok);
  CHECK(rep.max_violation == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("dissipativity for a static set") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Mesh mesh(1.0, 30);
  Matrix U(3, 2);
  U << 1, 0, 0, 1, -std::sqrt(0.5), -std::sqrt(0.5);
  Vector b(3);
  b << 1, 1, 1;
  auto ctrl = ControlPath::sample(
      mesh, [&](Scalar) { return U; }, [&](Scalar) { return b; });
  Vector x0(2);
  x0 << 0.9, 0.9;
  const auto path = catch_up(x0, ctrl);
  MovingPolyhedron P{U, b};
  for (int trial = 0; trial < 20; ++trial) {
    Vector c(2);
    c << gauss(rng), gauss(rng);
    c = project(c, P).point;  // sample a point of C
    for (int j = 0; j < mesh.k; ++j) {
      const double dj = (path.x.row(j).transpose() - c).norm();
      const double dj1 = (path.x.row(j + 1).transpose() - c).norm();
      CHECK(dj1 <= dj + 1e-12);
    }
  }
}

TEST_CASE("convergence study on exactly representable data reports zero error") {
  const auto table = convergence_study(scalar_u(), ramp_b(), Vector::Zero(1), 1.0,
                                       {25, 50, 100, 200},
                                       StateFunction([](Scalar t) { return Vector::Constant(1, t / 2); }));
  for (const auto& row : table.rows) CHECK(row.error <= 1e-14);
}

TEST_CASE("convergence study sees second order on a curved floor") {
  // u = -1, b(t) = -t^2/2: floor t^2/2, solution x(t) = t^2/2
  const auto table = convergence_study(
      scalar_u(), [](Scalar t) { return Vector::Constant(1, -t * t / 2); }, Vector::Zero(1), 1.0,
      {25, 50, 100, 200},
      StateFunction([](Scalar t) { return Vector::Constant(1, t * t / 2); }));
  for (size_t i = 0; i + 1 < table.rows.size(); ++i) {
    CHECK(table.rows[i + 1].error < table.rows[i].error);
    CHECK(table.orders[i] >= 0.9);
  }
}

TEST_CASE("convergence study sees first order on a rotating face vs Richardson") {
  // rotating halfplane <u(t), x> <= 0 with u(t) = (sin t, -cos t), x0 = (1, 0):
  // the face sweeps the point along the unit circle, x(t) = (cos t, sin t).
  ControlFunction uf = [](Scalar t) {
    Matrix U(1, 2);
    U << std::sin(t), -std::cos(t);
    return U;
  };
  OffsetFunction bf = [](Scalar) { return Vector::Zero(1); };
  Vector x0(2);
  x0 << 1, 0;
  const auto table = convergence_study(uf, bf, x0, 1.0, {25, 50, 100, 200}, std::nullopt, 1600);
  for (size_t i = 0; i + 1 < table.rows.size(); ++i) {
    CHECK(table.rows[i + 1].error < table.rows[i].error);
    CHECK(table.orders[i] >= 0.9);
  }
}

TEST_CASE("mesh refinement does not grow the error beyond 5 percent") {
  ControlFunction uf = [](Scalar t) {
    Matrix U(1, 2);
    U << std::sin(t), -std::cos(t);
    return U;
  };
  OffsetFunction bf = [](Scalar) { return Vector::Zero(1); };
  Vector x0(2);
  x0 << 1, 0;
  const auto table = convergence_study(
      uf, bf, x0, 1.0, {20, 40, 80, 160},
      StateFunction([](Scalar t) { return Vector{{std::cos(t), std::sin(t)}}; }));
  for (size_t i = 0; i + 1 < table.rows.size(); ++i)
    CHECK(table.rows[i + 1].error <= 1.05 * table.rows[i].error + 1e-14);
}

TEST_CASE("trajectory csv round-trips losslessly") {
  Mesh mesh(1.0, 17);
  auto ctrl = ControlPath::sample(mesh, box_u(), box_b());
  Vector x0(2);
  x0 << 1, 1;
  Trajectory traj{ctrl, catch_up(x0, ctrl)};
  const std::string path = "/tmp/sweep_traj_test.csv";
  write_trajectory_csv(path, traj);
  const auto back = read_trajectory_csv(path, 2, 2);
  CHECK(back.ctrl.mesh.k == mesh.k);
  CHECK((back.state.x - traj.state.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.state.eta - traj.state.eta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.ctrl.b - traj.ctrl.b).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("control norm constraints of the relaxed problem") {
  Mesh mesh(1.0, 10);
  auto ctrl = ControlPath::sample(mesh, scalar_u(), ramp_b(), 0.25);
  CHECK(ctrl.norm_constraint_violation() <= 1e-12);
  ctrl.u[5] *= 1.2;  // break the unit constraint inside [tau, T-tau]
  CHECK(ctrl.norm_constraint_violation() == doctest::Approx(0.2));
  ctrl.u[5] /= 1.2;
  ctrl.u[0] *= 1.2;  // still within [1/2, 3/2] near the endpoint
  CHECK(ctrl.norm_constraint_violation() <= 1e-12);
}
