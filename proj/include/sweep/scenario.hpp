#pragma once

// Scenario data: problem dimensions, horizon, initial state, cost
// specification, control mode and initial/fixed control laws, solver knobs.

#include "sweep/cost.hpp"
#include "sweep/sweeping.hpp"

#include <optional>
#include <string>

namespace sweep {

enum class ControlMode { FreeU, FixedU };

struct SolverParams {
  int max_iter = 400;
  Scalar fd_step = 1e-6;
  Scalar tol = 1e-6;
  std::uint64_t seed = 0;
};

struct AnalyticReference {
  StateFunction x;
  ControlFunction u;
  OffsetFunction b;
  std::optional<Scalar> cost;
  std::string provenance;  // where the reference values come from
};

struct Scenario {
  std::string id;
  Index n = 1;
  Index m = 1;
  Scalar T = 1.0;
  Scalar tau = 0.0;
  int default_k = 100;
  Vector x0;
  CostSpec cost;
  ControlMode mode = ControlMode::FixedU;
  ControlFunction u_init;  // fixed law in FixedU mode, initial iterate otherwise
  OffsetFunction b_init;
  std::optional<AnalyticReference> reference;
  SolverParams solver;
  CatchUpOptions integrator;
  Scalar eps_localization = 10.0;  // localization radius, inactive by default
  Scalar m_tilde = 1e6;            // velocity-variation bound, inactive by default

  void validate() const;  // throws BadConfig / InfeasiblePoint
  ControlPath initial_controls(int k) const {
    return ControlPath::sample(Mesh(T, k), u_init, b_init, tau);
  }
};

// Structured config ingestion (JSON). Throws BadConfig on malformed input.
Scenario scenario_from_json_file(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

}  // namespace sweep
