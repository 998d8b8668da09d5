#pragma once

// Discrete approximation problems on the uniform mesh: constraint assembly,
// Bolza cost evaluation, the reduced-space local solver (state eliminated
// through the catch-up integrator), and closed-form strategy evaluation for
// the two-dimensional box example.

#include "sweep/scenario.hpp"

namespace sweep {

struct InfeasibleInitial : std::runtime_error {
  Scalar violation;
  explicit InfeasibleInitial(Scalar v)
      : std::runtime_error("x0 violates C(u(0), b(0)) by " + std::to_string(v)),
        violation(v) {}
};

struct SolverStalled : std::runtime_error {
  explicit SolverStalled(Scalar best)
      : std::runtime_error("solver stalled, best cost " + std::to_string(best)) {}
};

struct DiscreteTriple {
  ControlPath ctrl;
  StatePath state;
};

struct ConstraintInfo {
  enum class Kind { Dynamics, Endpoint, NormEquality, NormBox };
  Kind kind;
  int node;
  int face;  // -1 when not face-indexed
};

struct DiscreteProblem {
  Mesh mesh;
  std::vector<ConstraintInfo> constraints;
  std::function<Scalar(const DiscreteTriple&)> cost;
  int count(ConstraintInfo::Kind kind) const;
};

DiscreteProblem build(const Scenario& sc, int k);  // throws InfeasibleInitial

// J_k = phi(x_k) + h * sum_j l(t_j, z_j, dz_j/h). With a reference triple on
// the same mesh the proximity integrals and the four velocity-variation
// penalty terms (radius eps, bound m_tilde) are added; piecewise-linear
// references integrate exactly.
Scalar cost_Jk(const DiscreteTriple& z, const Scenario& sc,
               const DiscreteTriple* reference = nullptr);

struct SolveResult {
  enum class Status { Converged, MeshConverged, Stalled };
  Status status = Status::Stalled;
  DiscreteTriple triple;
  Scalar cost = 0.0;
  Scalar grad_norm = 0.0;
  std::vector<std::pair<int, Scalar>> trace;  // accepted iterates
};

// Reduced-space local minimization: decision variables are the offset nodes
// (and direction nodes in free-u mode); the state is eliminated through
// catch_up; gradients by central finite differences; u iterates are
// renormalized onto the norm-constraint set after every step. Falls back to a
// compass pattern search when the cost catalog is nonsmooth.
SolveResult solve_reduced(const Scenario& sc, int k, const ControlPath& init);

enum class Strategy { Simultaneous, Alternating, Single };

// Numerically integrated cost of the named pushing strategy on the
// two-dimensional box data (x0 = (1,1), phi = ||x||^2/2, l3 = ||bdot||^2/2).
Scalar evaluate_strategy(Strategy strategy, Scalar theta, const Vector& beta, int fine_k = 2000);

}  // namespace sweep
