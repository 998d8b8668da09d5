#include "sweep/registry.hpp"

#include "sweep/discrete_ocp.hpp"

#include <cmath>

namespace sweep {

Scalar ex7_5_s0(Scalar t) {
  if (t < 0.2) return (t - 0.2) * (t - 0.2);
  if (t <= 0.8) return 0.0;
  return (t - 0.8) * (t + 0.2);
}

Scalar ex7_5_v0(Scalar t) {
  if (t < 0.2) return 0.2;
  if (t <= 0.8) return t;
  return 0.8;
}

namespace {

ControlFunction const_rows(Matrix U) {
  return [U = std::move(U)](Scalar) { return U; };
}

Scenario make_ex7_3() {
  Scenario sc;
  sc.id = "ex7_3";
  sc.n = sc.m = 1;
  sc.T = 1.0;
  sc.tau = 0.0;
  sc.default_k = 200;
  sc.x0 = Vector::Zero(1);
  sc.cost.terminal = {TerminalCost::Kind::QuadraticHalf, Vector::Constant(1, 1.0), 1.0};
  sc.cost.l3.kind = L3Term::Kind::Quad;
  sc.cost.l3.wb = 0.5;
  sc.mode = ControlMode::FreeU;
  sc.u_init = const_rows(Matrix::Constant(1, 1, -1.0));
  sc.b_init = [](Scalar) { return Vector::Zero(1); };
  sc.reference = AnalyticReference{
      [](Scalar t) { return Vector::Constant(1, t / 2); },
      const_rows(Matrix::Constant(1, 1, -1.0)),
      [](Scalar t) { return Vector::Constant(1, -t / 2); },
      0.25,
      "worked example: optimal triple (t/2, -1, -t/2), cost 1/4"};
  return sc;
}

Scenario make_ex7_4() {
  Scenario sc = make_ex7_3();
  sc.id = "ex7_4";
  sc.default_k = 100;
  sc.cost.l1.kind = L1Term::Kind::TrackingB;
  sc.cost.l1.weight = 0.5;
  sc.cost.l1.b_ref = [](Scalar) { return Vector::Constant(1, 1.0); };
  sc.b_init = [](Scalar) { return Vector::Constant(1, 1.0); };
  sc.reference = AnalyticReference{
      [](Scalar) { return Vector::Zero(1); },
      const_rows(Matrix::Constant(1, 1, -1.0)),
      [](Scalar) { return Vector::Constant(1, 1.0); },
      0.5,
      "worked example: trivial choice b = 1, cost 1/2"};
  return sc;
}

Scenario make_ex7_5(Scalar alpha) {
  Scenario sc;
  sc.id = "ex7_5";
  sc.n = sc.m = 1;
  sc.T = 1.0;
  sc.default_k = 60;
  sc.x0 = Vector::Constant(1, 0.2);
  sc.cost.terminal = {TerminalCost::Kind::Quadratic, Vector::Constant(1, 1.0), 1.0};
  sc.cost.l1.kind = L1Term::Kind::TrackingB;
  sc.cost.l1.weight = 1.0;
  sc.cost.l1.b_ref = [](Scalar t) { return Vector::Constant(1, ex7_5_s0(t) - t); };
  sc.cost.l3.kind = L3Term::Kind::AbsShiftedB;
  sc.cost.l3.weight = alpha;
  sc.cost.l3.shift0 = Vector::Constant(1, 2.0);
  sc.cost.l3.shift1 = Vector::Constant(1, -4.0);
  sc.mode = ControlMode::FixedU;
  sc.u_init = const_rows(Matrix::Constant(1, 1, -1.0));
  sc.b_init = [](Scalar t) { return Vector::Constant(1, ex7_5_s0(t) - t); };
  sc.reference = AnalyticReference{
      [](Scalar t) { return Vector::Constant(1, ex7_5_v0(t)); },
      const_rows(Matrix::Constant(1, 1, -1.0)),
      [](Scalar t) { return Vector::Constant(1, ex7_5_s0(t) - t); },
      std::nullopt,
      "worked example candidate (v0(t), -t + s0(t)); excluded for alpha > 0"};
  return sc;
}

Scenario make_ex7_6() {
  Scenario sc;
  sc.id = "ex7_6";
  sc.n = sc.m = 2;
  sc.T = 1.0;
  sc.default_k = 100;
  sc.x0 = Vector::Constant(2, 1.0);
  sc.cost.terminal = {TerminalCost::Kind::QuadraticHalf, Vector::Zero(2), 1.0};
  sc.cost.l3.kind = L3Term::Kind::Quad;
  sc.cost.l3.wb = 0.5;
  sc.mode = ControlMode::FixedU;
  Matrix U(2, 2);
  U << 1, 0, 0, 1;
  sc.u_init = const_rows(U);
  sc.b_init = [](Scalar) { return Vector::Constant(2, 1.0); };
  sc.reference = AnalyticReference{
      [](Scalar t) { return Vector::Constant(2, 1.0 - t / 2); },
      const_rows(U),
      [](Scalar t) { return Vector::Constant(2, 1.0 - t / 2); },
      0.5,
      "worked example: simultaneous pushing, beta = -1/2, cost 1/2"};
  return sc;
}

Scenario make_play_stop(Scalar half_width) {
  Scenario sc;
  sc.id = "play_stop";
  sc.n = 2;
  sc.m = 4;
  sc.T = M_PI;
  sc.default_k = 100;
  sc.x0 = Vector::Zero(2);
  sc.mode = ControlMode::FixedU;
  Matrix U(4, 2);
  U << 1, 0, 0, 1, -1, 0, 0, -1;
  sc.u_init = const_rows(U);
  const Scalar beta = half_width;
  sc.b_init = [beta](Scalar t) {
    // translate of the rectangle Z by the drive b(t) = 0.3 (sin t, 0)
    const Scalar b1 = 0.3 * std::sin(t);
    const Scalar b2 = 0.0;
    Vector off(4);
    off << beta + b1, beta + b2, beta - b1, beta - b2;
    return off;
  };
  return sc;
}

Scenario make_elasto_toy() {
  // pseudo-rigid hexagonal prism of admissible stresses in R^3; the driving
  // stress sigma(t) shifts the prism and produces plastic-flow episodes
  Scenario sc;
  sc.id = "elasto_toy";
  sc.n = 3;
  sc.m = 6;
  sc.T = 1.0;
  sc.default_k = 100;
  sc.x0 = Vector::Zero(3);
  sc.mode = ControlMode::FixedU;
  Matrix U(6, 3);
  for (int i = 0; i < 6; ++i) {
    const Scalar th = i * M_PI / 3;
    U.row(i) << std::cos(th), std::sin(th), 0.0;
  }
  sc.u_init = const_rows(U);
  sc.b_init = [U](Scalar t) {
    Vector sigma(3);
    sigma << 1.2 * std::sin(2 * M_PI * t), 0.4 * (1 - std::cos(2 * M_PI * t)), 0.0;
    Vector off(6);
    for (int i = 0; i < 6; ++i) off(i) = 1.0 - U.row(i).dot(sigma);
    return off;
  };
  return sc;
}

Scenario make_degenerate_2_3() {
  Scenario sc;
  sc.id = "degenerate_2_3";
  sc.n = 2;
  sc.m = 3;
  sc.T = M_PI;
  sc.default_k = 50;
  sc.x0 = Vector(2);
  sc.x0 << 1, 0;
  sc.mode = ControlMode::FixedU;
  sc.u_init = [](Scalar t) {
    Matrix U(3, 2);
    U << 1, 0, -1, 0, -std::cos(t), -std::sin(t);
    return U;
  };
  sc.b_init = [](Scalar t) {
    Vector b(3);
    b << 1, -1, -std::cos(t) - std::sin(t);
    return b;
  };
  return sc;
}

Scenario make_lipschitz_1d() {
  Scenario sc;
  sc.id = "lipschitz_1d";
  sc.n = sc.m = 1;
  sc.T = 1.0;
  sc.default_k = 100;
  sc.x0 = Vector::Zero(1);
  sc.mode = ControlMode::FixedU;
  sc.u_init = const_rows(Matrix::Constant(1, 1, -1.0));
  sc.b_init = [](Scalar t) { return Vector::Constant(1, -t * t / 2); };
  sc.reference = AnalyticReference{
      [](Scalar t) { return Vector::Constant(1, t * t / 2); },
      const_rows(Matrix::Constant(1, 1, -1.0)),
      [](Scalar t) { return Vector::Constant(1, -t * t / 2); },
      std::nullopt,
      "analytic: state rides the curved floor t^2/2"};
  return sc;
}

Scenario make_rotating_face() {
  Scenario sc;
  sc.id = "rotating_face";
  sc.n = 2;
  sc.m = 1;
  sc.T = 1.0;
  sc.default_k = 100;
  sc.x0 = Vector(2);
  sc.x0 << 1, 0;
  sc.mode = ControlMode::FixedU;
  sc.u_init = [](Scalar t) {
    Matrix U(1, 2);
    U << std::sin(t), -std::cos(t);
    return U;
  };
  sc.b_init = [](Scalar) { return Vector::Zero(1); };
  sc.reference = AnalyticReference{
      [](Scalar t) { return Vector{{std::cos(t), std::sin(t)}}; },
      [](Scalar t) {
        Matrix U(1, 2);
        U << std::sin(t), -std::cos(t);
        return U;
      },
      [](Scalar) { return Vector::Zero(1); },
      std::nullopt,
      "analytic: the face sweeps the state along the unit circle"};
  return sc;
}

}  // namespace

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = [] {
    std::vector<RegistryEntry> v;
    v.push_back({"ex7_3", "1d ramp: minimize (x(1)-1)^2/2 + int bdot^2/2", "optimize",
                 [](Scalar) { return make_ex7_3(); }, 0.0, 0.25,
                 "analytic optimum 1/4 at (t/2, -1, -t/2)"});
    v.push_back({"ex7_4", "1d tracking: stationary offset beats the active arc", "certify",
                 [](Scalar) { return make_ex7_4(); }, 0.0, 0.5,
                 "trivial solution b = 1, cost 1/2"});
    v.push_back({"ex7_5", "1d exclusion candidate with |.| control cost", "certify",
                 [](Scalar alpha) { return make_ex7_5(alpha); }, 1.0, std::nullopt,
                 "candidate excluded by the necessary conditions for alpha > 0"});
    v.push_back({"ex7_6", "2d shrinking box, fixed normals", "optimize",
                 [](Scalar) { return make_ex7_6(); }, 0.0, 0.5,
                 "simultaneous pushing with beta = -1/2, cost 1/2"});
    v.push_back({"play_stop", "play-and-stop hysteresis over a translated rectangle", "simulate",
                 [](Scalar hw) { return make_play_stop(hw > 0 ? hw : 0.25); }, 0.25,
                 std::nullopt, ""});
    v.push_back({"elasto_toy", "pseudo-rigid elastoplasticity, hexagonal prism in R^3",
                 "simulate", [](Scalar) { return make_elasto_toy(); }, 0.0, std::nullopt, ""});
    v.push_back({"degenerate_2_3", "moving set with a jump; no absolutely continuous solution",
                 "simulate", [](Scalar) { return make_degenerate_2_3(); }, 0.0, std::nullopt,
                 ""});
    v.push_back({"lipschitz_1d", "curved floor, first-order scheme lands second order",
                 "simulate", [](Scalar) { return make_lipschitz_1d(); }, 0.0, std::nullopt,
                 ""});
    v.push_back({"rotating_face", "rotating halfplane sweeping along the unit circle",
                 "simulate", [](Scalar) { return make_rotating_face(); }, 0.0, std::nullopt,
                 ""});
    return v;
  }();
  return entries;
}

std::optional<RegistryEntry> registry_lookup(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return e;
  return std::nullopt;
}

DiscreteTriple ex7_3_candidate(int k) {
  const Scenario sc = make_ex7_3();
  const auto& ref = *sc.reference;
  const Mesh mesh(sc.T, k);
  DiscreteTriple z;
  z.ctrl = ControlPath::sample(mesh, ref.u, ref.b, sc.tau);
  z.state.mesh = mesh;
  z.state.x.resize(k + 1, 1);
  for (int j = 0; j <= k; ++j) z.state.x(j, 0) = ref.x(mesh.t(j))(0);
  z.state.eta.resize(k, 1);
  const Scalar h = mesh.h();
  for (int j = 0; j < k; ++j) z.state.eta(j, 0) = (z.state.x(j + 1, 0) - z.state.x(j, 0)) / h;
  return z;
}

DiscreteTriple ex7_5_candidate(int k) {
  const Scenario sc = make_ex7_5(0.0);
  const auto& ref = *sc.reference;
  const Mesh mesh(sc.T, k);
  DiscreteTriple z;
  z.ctrl = ControlPath::sample(mesh, ref.u, ref.b, sc.tau);
  z.state.mesh = mesh;
  z.state.x.resize(k + 1, 1);
  for (int j = 0; j <= k; ++j) z.state.x(j, 0) = ref.x(mesh.t(j))(0);
  z.state.eta.resize(k, 1);
  const Scalar h = mesh.h();
  for (int j = 0; j < k; ++j) z.state.eta(j, 0) = (z.state.x(j + 1, 0) - z.state.x(j, 0)) / h;
  return z;
}

}  // namespace sweep
