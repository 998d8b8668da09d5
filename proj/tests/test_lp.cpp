#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/lp.hpp"

using namespace sweep;

TEST_CASE("bounded 2d lp reaches the known vertex") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0  -> (8/5, 6/5)
  lp::Problem p = lp::Problem::sized(2, 2);
  p.A << 1, 2, 3, 1;
  p.b << 4, 6;
  p.c << 1, 1;
  p.lo.setZero();
  auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.z(0) == doctest::Approx(8.0 / 5).epsilon(1e-9));
  CHECK(r.z(1) == doctest::Approx(6.0 / 5).epsilon(1e-9));
  CHECK(r.objective == doctest::Approx(14.0 / 5));
}

TEST_CASE("equalities and free variables") {
  // max -|x| style: max -t s.t. x <= t, -x <= t, x = 3  -> t = 3
  lp::Problem p = lp::Problem::sized(3, 2);
  p.A << 1, -1, -1, -1, 1, 0;
  p.b << 0, 0, 3;
  p.rel = {'<', '<', '='};
  p.c << 0, -1;
  auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.z(0) == doctest::Approx(3.0));
  CHECK(r.z(1) == doctest::Approx(3.0));
}

TEST_CASE("infeasible system is detected") {
  lp::Problem p = lp::Problem::sized(2, 1);
  p.A << 1, -1;
  p.b << 0, -1;  // x <= 0 and x >= 1
  p.c << 0;
  auto r = lp::solve(p);
  CHECK(r.status == lp::Status::Infeasible);
}

TEST_CASE("unbounded objective is detected") {
  lp::Problem p = lp::Problem::sized(1, 1);
  p.A << -1;
  p.b << 0;
  p.c << 1;
  p.lo(0) = 0;
  auto r = lp::solve(p);
  CHECK(r.status == lp::Status::Unbounded);
}

TEST_CASE("degenerate lp still terminates") {
  // many redundant rows through the optimum
  lp::Problem p = lp::Problem::sized(5, 2);
  p.A << 1, 1, 1, 1, 1, 1, 2, 1, 1, 2;
  p.b << 1, 1, 1, 2, 2;
  p.c << 1, 1;
  p.lo.setZero();
  auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("variable upper bounds are honored") {
  lp::Problem p = lp::Problem::sized(1, 2);
  p.A << 1, 1;
  p.b << 10;
  p.c << 1, 2;
  p.lo.setZero();
  p.hi << 3, 4;
  auto r = lp::solve(p);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.z(0) == doctest::Approx(3.0));
  CHECK(r.z(1) == doctest::Approx(4.0));
}

TEST_CASE("farkas ray certifies an empty polyhedron") {
  Matrix U(2, 1);
  U << 1, -1;
  Vector b(2);
  b << 0, -1;
  const Vector y = lp::farkas_ray(U, b);
  REQUIRE(y.size() == 2);
  CHECK(y.minCoeff() >= -1e-12);
  CHECK(std::abs((U.transpose() * y)(0)) <= 1e-9);
  CHECK(y.dot(b) < -1e-9);
}
