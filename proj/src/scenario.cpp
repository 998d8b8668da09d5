#include "sweep/scenario.hpp"

#include <json.hpp>

#include <fstream>

namespace sweep {

using nlohmann::json;

void Scenario::validate() const {
  if (n < 1 || m < 0) throw BadConfig("dims must satisfy n >= 1, m >= 0");
  if (!(T > 0)) throw BadConfig("horizon T must be positive");
  if (tau < 0 || tau > T / 2) throw BadConfig("need 0 <= tau <= T/2");
  if (x0.size() != n) throw BadConfig("x0 has wrong dimension");
  if (!u_init || !b_init) throw BadConfig("control laws missing");
  const Matrix U0 = u_init(0.0);
  const Vector b0 = b_init(0.0);
  if (U0.rows() != m || U0.cols() != n || b0.size() != m)
    throw BadConfig("control law shapes disagree with dims");
  if (m > 0) {
    const Scalar viol = (U0 * x0 - b0).maxCoeff();
    if (viol > kActivityTol) throw InfeasiblePoint(viol);
  }
}

namespace {

Vector to_vector(const json& j) {
  Vector v(j.size());
  Index i = 0;
  for (const auto& e : j) v(i++) = e.get<Scalar>();
  return v;
}

Matrix to_matrix(const json& j, Index rows, Index cols) {
  Matrix M(rows, cols);
  if (static_cast<Index>(j.size()) != rows) throw BadConfig("matrix row count mismatch");
  Index r = 0;
  for (const auto& row : j) {
    if (static_cast<Index>(row.size()) != cols) throw BadConfig("matrix column count mismatch");
    Index c = 0;
    for (const auto& e : row) M(r, c++) = e.get<Scalar>();
    ++r;
  }
  return M;
}

// offsets either as a constant array or {"kind":"linear","c0":[...],"c1":[...]}
OffsetFunction parse_offsets(const json& j, Index m) {
  if (j.is_array()) {
    const Vector c = to_vector(j);
    if (c.size() != m) throw BadConfig("b_init size mismatch");
    return [c](Scalar) { return c; };
  }
  if (j.is_object() && j.value("kind", "") == "linear") {
    const Vector c0 = to_vector(j.at("c0"));
    const Vector c1 = to_vector(j.at("c1"));
    if (c0.size() != m || c1.size() != m) throw BadConfig("linear offset size mismatch");
    return [c0, c1](Scalar t) { return Vector(c0 + t * c1); };
  }
  throw BadConfig("unsupported b_init specification");
}

TerminalCost parse_terminal(const json& j) {
  TerminalCost tc;
  const std::string kind = j.value("kind", "none");
  if (kind == "none") {
    tc.kind = TerminalCost::Kind::None;
  } else if (kind == "quadratic") {
    tc.kind = TerminalCost::Kind::Quadratic;
  } else if (kind == "quadratic_half") {
    tc.kind = TerminalCost::Kind::QuadraticHalf;
  } else {
    throw BadConfig("unknown terminal kind " + kind);
  }
  if (j.contains("center")) tc.center = to_vector(j.at("center"));
  tc.weight = j.value("weight", 1.0);
  return tc;
}

L1Term parse_l1(const json& j, Index m) {
  L1Term t;
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") {
    t.kind = L1Term::Kind::Zero;
  } else if (kind == "tracking") {
    t.kind = L1Term::Kind::TrackingB;
    t.weight = j.value("weight", 1.0);
    if (j.contains("ref")) {
      const auto fn = parse_offsets(j.at("ref"), m);
      t.b_ref = fn;
    } else {
      t.b_ref = [m](Scalar) { return Vector::Zero(m); };
    }
  } else if (kind == "quad_x") {
    t.kind = L1Term::Kind::QuadX;
    t.weight = j.value("weight", 1.0);
    if (j.contains("center")) t.center = to_vector(j.at("center"));
  } else {
    throw BadConfig("unknown l1 kind " + kind);
  }
  return t;
}

L2Term parse_l2(const json& j) {
  L2Term t;
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") t.kind = L2Term::Kind::Zero;
  else if (kind == "quad") t.kind = L2Term::Kind::Quad;
  else if (kind == "abs") t.kind = L2Term::Kind::Abs;
  else throw BadConfig("unknown l2 kind " + kind);
  t.weight = j.value("weight", 0.0);
  return t;
}

L3Term parse_l3(const json& j, Index m) {
  L3Term t;
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") {
    t.kind = L3Term::Kind::Zero;
  } else if (kind == "quad") {
    t.kind = L3Term::Kind::Quad;
    t.wu = j.value("wu", 0.0);
    t.wb = j.value("wb", 0.0);
  } else if (kind == "abs_shifted") {
    t.kind = L3Term::Kind::AbsShiftedB;
    t.weight = j.value("weight", 1.0);
    t.shift0 = j.contains("shift0") ? to_vector(j.at("shift0")) : Vector::Zero(m);
    t.shift1 = j.contains("shift1") ? to_vector(j.at("shift1")) : Vector::Zero(m);
  } else {
    throw BadConfig("unknown l3 kind " + kind);
  }
  return t;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw BadConfig(std::string("invalid scenario JSON: ") + e.what());
  }
  try {
    Scenario sc;
    sc.id = j.value("id", "custom");
    const auto& dims = j.at("dims");
    sc.n = dims.at("n").get<Index>();
    sc.m = dims.at("m").get<Index>();
    const auto& hor = j.at("horizon");
    sc.T = hor.at("T").get<Scalar>();
    sc.tau = hor.value("tau", 0.0);
    sc.default_k = hor.value("k", 100);
    sc.x0 = to_vector(j.at("x0"));

    const std::string mode = j.value("mode", "fixed_u");
    if (mode == "fixed_u") sc.mode = ControlMode::FixedU;
    else if (mode == "free_u") sc.mode = ControlMode::FreeU;
    else throw BadConfig("unknown mode " + mode);

    if (j.contains("cost")) {
      const auto& c = j.at("cost");
      if (c.contains("terminal")) sc.cost.terminal = parse_terminal(c.at("terminal"));
      if (c.contains("l1")) sc.cost.l1 = parse_l1(c.at("l1"), sc.m);
      if (c.contains("l2")) sc.cost.l2 = parse_l2(c.at("l2"));
      if (c.contains("l3")) sc.cost.l3 = parse_l3(c.at("l3"), sc.m);
    }

    const auto& ctrl = j.at("controls");
    const Matrix U0 = to_matrix(ctrl.at("u_init"), sc.m, sc.n);
    sc.u_init = [U0](Scalar) { return U0; };
    sc.b_init = parse_offsets(ctrl.at("b_init"), sc.m);
    if (ctrl.value("fixed_u", sc.mode == ControlMode::FixedU)) sc.mode = ControlMode::FixedU;

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      sc.solver.max_iter = s.value("max_iter", sc.solver.max_iter);
      sc.solver.fd_step = s.value("fd_step", sc.solver.fd_step);
      sc.solver.tol = s.value("tol", sc.solver.tol);
      sc.solver.seed = s.value("seed", sc.solver.seed);
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw BadConfig(std::string("scenario config: ") + e.what());
  }
}

Scenario scenario_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw BadConfig("cannot open scenario file " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return scenario_from_json_text(text);
}

}  // namespace sweep
