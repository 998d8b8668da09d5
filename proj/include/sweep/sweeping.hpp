#pragma once

// Catch-up time stepping for the polyhedral sweeping inclusion
// xdot in -N(x; C(u(t), b(t))), plus feasibility verification and empirical
// convergence studies.

#include "sweep/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sweep {

struct EmptySetAt : std::runtime_error {
  int node;
  Vector ray;
  EmptySetAt(int j, Vector r)
      : std::runtime_error("moving set is empty at node " + std::to_string(j)),
        node(j), ray(std::move(r)) {}
};

struct DiscontinuityDetected : std::runtime_error {
  int node;
  Scalar jump;
  Scalar threshold;
  DiscontinuityDetected(int j, Scalar jmp, Scalar thr)
      : std::runtime_error("state jump " + std::to_string(jmp) + " at node " +
                           std::to_string(j) + " exceeds guard " + std::to_string(thr)),
        node(j), jump(jmp), threshold(thr) {}
};

struct CatchUpOptions {
  // A step is flagged as a discontinuity when
  //   ||x_{j+1} - x_j|| > jump_guard * h * (1 + per-step control variation).
  // Any O(1) jump then trips the guard on fine meshes while velocities up to
  // jump_guard remain admissible.
  Scalar jump_guard = 10.0;
  Scalar feas_tol = kActivityTol;
};

// Implicit catch-up: x_{j+1} = projection of x_j onto C(u(t_{j+1}), b(t_{j+1})).
// The stored eta row j holds the projection multipliers divided by h, so
// (x_{j+1}-x_j)/h = -sum_i eta_{ji} u_i(t_{j+1}).
StatePath catch_up(const Vector& x0, const ControlPath& ctrl, const CatchUpOptions& opts = {});

enum class EtaSide { Implicit, ExplicitSide };  // test eta against t_{j+1} or t_j data

struct FeasibilityReport {
  bool ok = false;
  Scalar max_violation = 0.0;       // state-constraint violation over all nodes
  Scalar max_complementarity = 0.0; // eta_i * slack_i residual over intervals
  Scalar max_cone_residual = 0.0;   // velocity-representation residual
  Scalar min_eta = 0.0;
  std::vector<Scalar> node_violation;
};

FeasibilityReport verify_feasible(const StatePath& state, const ControlPath& ctrl,
                                  Scalar tol = kActivityTol, EtaSide side = EtaSide::Implicit);

struct ConvergenceRow {
  int k;
  Scalar error;  // sup-norm distance to the reference trajectory
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<Scalar> orders;  // log2(e(k)/e(2k)) between consecutive rows
};

// Integrates the given control law on each mesh in k_list and reports sup-norm
// state errors against the analytic reference (when given) or a Richardson
// reference computed on a mesh k_ref.
ConvergenceTable convergence_study(const ControlFunction& uf, const OffsetFunction& bf,
                                   const Vector& x0, Scalar T, const std::vector<int>& k_list,
                                   const std::optional<StateFunction>& analytic,
                                   int k_ref = 1600, Scalar tau = 0.0);

}  // namespace sweep
