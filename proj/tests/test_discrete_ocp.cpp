#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/discrete_ocp.hpp"
#include "sweep/registry.hpp"

using namespace sweep;

namespace {

DiscreteTriple simulate(const Scenario& sc, int k) {
  DiscreteTriple z;
  z.ctrl = sc.initial_controls(k);
  z.state = catch_up(sc.x0, z.ctrl, sc.integrator);
  return z;
}

// closed-form strategy costs for the 2d box data
Scalar simultaneous_closed_form(Scalar theta, Scalar b1, Scalar b2) {
  return 0.5 * (theta * theta + theta) * (b1 * b1 + b2 * b2) + theta * (b1 + b2) + 1.0;
}

}  // namespace

TEST_CASE("build assembles the constraint lists") {
  SUBCASE("free-u scenario at k = 4") {
    const auto sc = registry_lookup("ex7_3")->builder(0.0);
    const auto prob = build(sc, 4);
    CHECK(prob.count(ConstraintInfo::Kind::Dynamics) == 4);
    CHECK(prob.count(ConstraintInfo::Kind::Endpoint) == 1);
    CHECK(prob.count(ConstraintInfo::Kind::NormEquality) == 5);  // tau = 0: all nodes
    CHECK(prob.count(ConstraintInfo::Kind::NormBox) == 0);
  }
  SUBCASE("tau = 0.25 splits equality and box normalization nodes") {
    auto sc = registry_lookup("ex7_3")->builder(0.0);
    sc.tau = 0.25;
    const auto prob = build(sc, 10);
    CHECK(prob.count(ConstraintInfo::Kind::NormEquality) == 5);  // nodes 3..7
    CHECK(prob.count(ConstraintInfo::Kind::NormBox) == 6);       // nodes 0..2, 8..10
  }
  SUBCASE("fixed-u mode drops the normalization constraints") {
    const auto sc = registry_lookup("ex7_6")->builder(0.0);
    const auto prob = build(sc, 7);
    CHECK(prob.count(ConstraintInfo::Kind::Dynamics) == 7);
    CHECK(prob.count(ConstraintInfo::Kind::Endpoint) == 2);
    CHECK(prob.count(ConstraintInfo::Kind::NormEquality) == 0);
    CHECK(prob.count(ConstraintInfo::Kind::NormBox) == 0);
  }
  SUBCASE("infeasible initial state is rejected") {
    auto sc = registry_lookup("ex7_3")->builder(0.0);
    sc.x0 = Vector::Constant(1, -1.0);  // -x0 = 1 > b(0) = 0
    CHECK_THROWS_AS(build(sc, 4), InfeasibleInitial);
  }
}

TEST_CASE("cost_Jk on the catalog candidates") {
  SUBCASE("terminal-centered state with zero running cost") {
    auto sc = registry_lookup("ex7_6")->builder(0.0);
    sc.cost.l3 = L3Term{};  // zero running cost
    sc.cost.terminal.center = sc.x0;
    const auto z = simulate(sc, 10);
    CHECK(cost_Jk(z, sc) == 0.0);
  }
  SUBCASE("ramp candidate at k = 100 sits at the analytic value") {
    const auto sc = registry_lookup("ex7_3")->builder(0.0);
    const auto z = ex7_3_candidate(100);
    CHECK(std::abs(cost_Jk(z, sc) - 0.25) <= 5e-3);
  }
  SUBCASE("stay-put candidate evaluates to exactly one half") {
    const auto sc = registry_lookup("ex7_3")->builder(0.0);
    DiscreteTriple z;
    z.ctrl = ControlPath::sample(Mesh(1.0, 100), sc.u_init, [](Scalar) { return Vector::Zero(1); });
    z.state = catch_up(Vector::Zero(1), z.ctrl);
    CHECK(cost_Jk(z, sc) == 0.5);
  }
  SUBCASE("localization terms vanish at the reference and grow off it") {
    const auto sc = registry_lookup("ex7_3")->builder(0.0);
    const auto z = ex7_3_candidate(40);
    CHECK(cost_Jk(z, sc, &z) == doctest::Approx(cost_Jk(z, sc)));
    auto z2 = z;
    z2.ctrl.b(20, 0) += 0.05;
    z2.state = catch_up(sc.x0, z2.ctrl);
    CHECK(cost_Jk(z2, sc, &z) > cost_Jk(z2, sc));
  }
}

TEST_CASE("solve_reduced on the ramp problem") {
  const auto sc = registry_lookup("ex7_3")->builder(0.0);
  const auto init = sc.initial_controls(60);
  const auto res = solve_reduced(sc, 60, init);
  CHECK(res.cost <= 0.26);
  // sup distance to the analytic pair (t/2, -t/2)
  Scalar dist = 0.0;
  const Mesh mesh(1.0, 60);
  for (int j = 0; j <= 60; ++j) {
    dist = std::max(dist, std::abs(res.triple.state.x(j, 0) - mesh.t(j) / 2));
    dist = std::max(dist, std::abs(res.triple.ctrl.b(j, 0) + mesh.t(j) / 2));
  }
  CHECK(dist <= 0.05);
  // feasibility and normalization of the returned point
  CHECK(verify_feasible(res.triple.state, res.triple.ctrl).ok);
  CHECK(res.triple.ctrl.norm_constraint_violation() <= 1e-9);
  // monotone descent of the accepted-iterate trace
  for (size_t i = 0; i + 1 < res.trace.size(); ++i)
    CHECK(res.trace[i + 1].second <= res.trace[i].second + 1e-12);
}

TEST_CASE("solve_reduced is stationary at a cost-free point") {
  auto sc = registry_lookup("ex7_6")->builder(0.0);
  sc.cost.l3 = L3Term{};
  sc.cost.terminal.center = sc.x0;  // already optimal at the initial point
  const auto init = sc.initial_controls(20);
  const auto res = solve_reduced(sc, 20, init);
  CHECK(res.cost == 0.0);
  CHECK((res.triple.ctrl.b - init.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_reduced reaches the box optimum") {
  const auto sc = registry_lookup("ex7_6")->builder(0.0);
  const auto init = sc.initial_controls(50);
  const auto res = solve_reduced(sc, 50, init);
  CHECK(res.cost <= 0.52);
  CHECK(verify_feasible(res.triple.state, res.triple.ctrl).ok);
}

TEST_CASE("solver trace is deterministic") {
  const auto sc = registry_lookup("ex7_3")->builder(0.0);
  const auto init = sc.initial_controls(30);
  const auto r1 = solve_reduced(sc, 30, init);
  const auto r2 = solve_reduced(sc, 30, init);
  REQUIRE(r1.trace.size() == r2.trace.size());
  for (size_t i = 0; i < r1.trace.size(); ++i) {
    CHECK(r1.trace[i].first == r2.trace[i].first);
    CHECK(r1.trace[i].second == r2.trace[i].second);  // bitwise
  }
  CHECK((r1.triple.ctrl.b - r2.triple.ctrl.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mesh consistency of the discretized analytic candidates") {
  const auto sc = registry_lookup("ex7_3")->builder(0.0);
  for (int k : {25, 50, 100}) {
    const auto z = ex7_3_candidate(k);
    const Scalar gap = std::abs(cost_Jk(z, sc) - 0.25);
    CHECK(gap <= 1.0 / k);  // |J_k - J| <= C h with C = 1 comfortably
  }
}

TEST_CASE("strategy table for the 2d box") {
  const Vector both = Vector::Constant(2, -0.5);
  Vector one(2);
  one << -0.5, 0.0;

  const Scalar sim = evaluate_strategy(Strategy::Simultaneous, 1.0, both);
  const Scalar alt = evaluate_strategy(Strategy::Alternating, 0.5, both);
  const Scalar sgl = evaluate_strategy(Strategy::Single, 1.0, one);

  CHECK(std::abs(sim - 0.5) <= 1e-3);
  CHECK(std::abs(alt - 11.0 / 16) <= 1e-2);
  CHECK(std::abs(sgl - 0.75) <= 1e-2);
  CHECK(sim < alt);
  CHECK(alt < sgl);

  // cross-check against the closed form on a parameter sweep
  for (Scalar theta : {0.4, 0.7, 1.0}) {
    for (Scalar b : {-0.3, -0.6}) {
      const Scalar numeric = evaluate_strategy(Strategy::Simultaneous, theta, Vector::Constant(2, b));
      CHECK(numeric == doctest::Approx(simultaneous_closed_form(theta, b, b)).epsilon(1e-4));
    }
  }
}

TEST_CASE("nonsmooth catalog routes to the pattern search") {
  auto sc = registry_lookup("ex7_5")->builder(1.0);
  CHECK_FALSE(sc.cost.smooth());
  sc.solver.max_iter = 200;
  const auto init = sc.initial_controls(12);
  const auto res = solve_reduced(sc, 12, init);
  CHECK(res.status == SolveResult::Status::MeshConverged);
  // pattern search never worsens the initial candidate
  CHECK(res.cost <= cost_Jk(DiscreteTriple{init, catch_up(sc.x0, init)}, sc) + 1e-12);
}
