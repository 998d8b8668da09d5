#include "sweep/discrete_ocp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sweep {

int DiscreteProblem::count(ConstraintInfo::Kind kind) const {
  int c = 0;
  for (const auto& ci : constraints)
    if (ci.kind == kind) ++c;
  return c;
}

DiscreteProblem build(const Scenario& sc, int k) {
  if (k < 2) throw BadConfig("need k >= 2");
  try {
    sc.validate();
  } catch (const InfeasiblePoint& e) {
    throw InfeasibleInitial(e.violation);
  }
  DiscreteProblem prob;
  prob.mesh = Mesh(sc.T, k);
  for (int j = 0; j < k; ++j)
    prob.constraints.push_back({ConstraintInfo::Kind::Dynamics, j, -1});
  for (Index i = 0; i < sc.m; ++i)
    prob.constraints.push_back({ConstraintInfo::Kind::Endpoint, k, static_cast<int>(i)});
  if (sc.mode == ControlMode::FreeU) {
    const auto [j_lo, j_hi] = index_tau(prob.mesh, sc.tau);
    for (int j = 0; j <= k; ++j) {
      const bool eq = j >= j_lo && j <= j_hi;
      for (Index i = 0; i < sc.m; ++i)
        prob.constraints.push_back({eq ? ConstraintInfo::Kind::NormEquality
                                       : ConstraintInfo::Kind::NormBox,
                                    j, static_cast<int>(i)});
    }
  }
  const Scenario* scp = &sc;
  prob.cost = [scp](const DiscreteTriple& z) { return cost_Jk(z, *scp); };
  return prob;
}

Scalar cost_Jk(const DiscreteTriple& z, const Scenario& sc, const DiscreteTriple* reference) {
  const Mesh& mesh = z.ctrl.mesh;
  const Scalar h = mesh.h();
  if (z.state.x.rows() != mesh.k + 1) throw ShapeMismatch("state rows disagree with mesh");
  if (reference && !(reference->ctrl.mesh == mesh)) throw MeshMismatch();

  const Index n = z.ctrl.n();
  const Index m = z.ctrl.m();
  Scalar J = sc.cost.terminal.value(z.state.x.row(mesh.k).transpose());
  Vector xj(n), bj(m), xdot(n), bdot(m);
  Matrix dU(m, n);
  for (int j = 0; j < mesh.k; ++j) {
    const Scalar t = mesh.t(j);
    xj = z.state.x.row(j).transpose();
    bj = z.ctrl.b.row(j).transpose();
    xdot = (z.state.x.row(j + 1) - z.state.x.row(j)).transpose() / h;
    bdot = (z.ctrl.b.row(j + 1) - z.ctrl.b.row(j)).transpose() / h;
    dU = (z.ctrl.u[static_cast<size_t>(j + 1)] - z.ctrl.u[static_cast<size_t>(j)]) / h;
    const Eigen::Map<const Vector> udot(dU.data(), dU.size());
    J += h * (sc.cost.l1.value(t, xj, bj) + sc.cost.l2.value(xdot) +
              sc.cost.l3.value(t, udot, bdot));
  }
  if (!reference) return J;

  // localization terms of the discrete problem around a supplied candidate:
  // proximity integrals plus the four velocity-variation penalties
  Scalar prox = 0.0;
  for (int j = 0; j < mesh.k; ++j) {
    const Vector dx = ((z.state.x.row(j + 1) - z.state.x.row(j)) -
                       (reference->state.x.row(j + 1) - reference->state.x.row(j)))
                          .transpose() / h;
    const Vector db = ((z.ctrl.b.row(j + 1) - z.ctrl.b.row(j)) -
                       (reference->ctrl.b.row(j + 1) - reference->ctrl.b.row(j)))
                          .transpose() / h;
    const Matrix du = ((z.ctrl.u[static_cast<size_t>(j + 1)] - z.ctrl.u[static_cast<size_t>(j)]) -
                       (reference->ctrl.u[static_cast<size_t>(j + 1)] -
                        reference->ctrl.u[static_cast<size_t>(j)])) / h;
    prox += h * (dx.squaredNorm() + db.squaredNorm() + du.squaredNorm());
  }
  J += prox;

  const auto dist_sq = [&](Scalar v) {
    const Scalar over = v - sc.m_tilde;
    return over > 0 ? over * over : 0.0;
  };
  const Scalar du0 = (z.ctrl.u[1] - z.ctrl.u[0]).norm() / h;
  const Scalar db0 = (z.ctrl.b.row(1) - z.ctrl.b.row(0)).norm() / h;
  Scalar var_u = 0.0, var_b = 0.0;
  for (int j = 0; j + 2 <= mesh.k; ++j) {
    var_u += (z.ctrl.u[static_cast<size_t>(j + 2)] - 2.0 * z.ctrl.u[static_cast<size_t>(j + 1)] +
              z.ctrl.u[static_cast<size_t>(j)]).norm() / h;
    var_b += (z.ctrl.b.row(j + 2) - 2.0 * z.ctrl.b.row(j + 1) + z.ctrl.b.row(j)).norm() / h;
  }
  J += dist_sq(du0) + dist_sq(db0) + dist_sq(var_u) + dist_sq(var_b);
  return J;
}

namespace {

// Decision-variable packing for the reduced problem. Variables are the
// per-interval velocity increments h * w_j = b_{j+1} - b_j (and the direction
// increments in free-u mode); node values are recovered by cumulative sums.
// In these coordinates the running-cost Hessian is near-identity, which keeps
// the quasi-Newton iteration well conditioned on fine meshes.
struct Packing {
  Index m, n;
  int k;
  bool free_u;
  Index size() const {
    return static_cast<Index>(k) * m + (free_u ? static_cast<Index>(k) * m * n : 0);
  }
  // first node whose polyhedron a coordinate perturbation touches
  int node_of(Index var) const {
    if (var < static_cast<Index>(k) * m) return static_cast<int>(var / m) + 1;
    const Index uvar = var - static_cast<Index>(k) * m;
    return static_cast<int>(uvar / (m * n)) + 1;
  }
};

void unpack(const Vector& theta, const Packing& pk, ControlPath& ctrl) {
  const Scalar h = ctrl.mesh.h();
  for (int j = 1; j <= pk.k; ++j)
    for (Index i = 0; i < pk.m; ++i)
      ctrl.b(j, i) = ctrl.b(j - 1, i) + h * theta(static_cast<Index>(j - 1) * pk.m + i);
  if (pk.free_u) {
    const Index at0 = static_cast<Index>(pk.k) * pk.m;
    for (int j = 1; j <= pk.k; ++j) {
      Matrix& U = ctrl.u[static_cast<size_t>(j)];
      const Matrix& Uprev = ctrl.u[static_cast<size_t>(j - 1)];
      for (Index i = 0; i < pk.m; ++i)
        for (Index c = 0; c < pk.n; ++c)
          U(i, c) = Uprev(i, c) +
                    h * theta(at0 + static_cast<Index>(j - 1) * pk.m * pk.n + i * pk.n + c);
    }
  }
}

Vector pack(const ControlPath& ctrl, const Packing& pk) {
  const Scalar h = ctrl.mesh.h();
  Vector theta(pk.size());
  for (int j = 1; j <= pk.k; ++j)
    for (Index i = 0; i < pk.m; ++i)
      theta(static_cast<Index>(j - 1) * pk.m + i) = (ctrl.b(j, i) - ctrl.b(j - 1, i)) / h;
  if (pk.free_u) {
    const Index at0 = static_cast<Index>(pk.k) * pk.m;
    for (int j = 1; j <= pk.k; ++j) {
      const Matrix& U = ctrl.u[static_cast<size_t>(j)];
      const Matrix& Uprev = ctrl.u[static_cast<size_t>(j - 1)];
      for (Index i = 0; i < pk.m; ++i)
        for (Index c = 0; c < pk.n; ++c)
          theta(at0 + static_cast<Index>(j - 1) * pk.m * pk.n + i * pk.n + c) =
              (U(i, c) - Uprev(i, c)) / h;
    }
  }
  return theta;
}

// Renormalize direction rows onto the norm-constraint set: exactly unit on
// the equality range, norm clamped into [1/2, 3/2] outside.
void renormalize(ControlPath& ctrl) {
  const auto [j_lo, j_hi] = index_tau(ctrl.mesh, ctrl.tau);
  for (int j = 0; j <= ctrl.mesh.k; ++j) {
    Matrix& U = ctrl.u[static_cast<size_t>(j)];
    for (Index i = 0; i < U.rows(); ++i) {
      const Scalar nrm = U.row(i).norm();
      if (nrm < 1e-12) continue;
      if (j >= j_lo && j <= j_hi) {
        U.row(i) /= nrm;
      } else {
        const Scalar target = std::clamp(nrm, 0.5, 1.5);
        U.row(i) *= target / nrm;
      }
    }
  }
}

// Resimulate the catch-up recursion from a given interval onward, reusing the
// prefix of the state.
void resim_from(const ControlPath& ctrl, const CatchUpOptions& opts, StatePath& state,
                int from_node) {
  (void)opts;
  const Mesh& mesh = ctrl.mesh;
  const Scalar h = mesh.h();
  const Index n = ctrl.n();
  const Index m = ctrl.m();
  Vector x = state.x.row(std::max(0, from_node - 1)).transpose();
  Vector z(n), eta(m), brow(m);
  for (int j = std::max(0, from_node - 1); j < mesh.k; ++j) {
    brow = ctrl.b.row(j + 1).transpose();
    try {
      project_into(ctrl.u[static_cast<size_t>(j + 1)], brow, x, z, eta);
    } catch (const EmptySetError& e) {
      throw EmptySetAt(j + 1, e.ray);
    }
    state.eta.row(j) = (eta / h).transpose();
    x = z;
    state.x.row(j + 1) = x.transpose();
  }
}

struct ReducedObjective {
  const Scenario& sc;
  Packing pk;
  ControlPath ctrl;   // scratch, node 0 pinned
  StatePath state;    // scratch

  // candidate evaluation with the norm constraint enforced (pattern search)
  Scalar eval_on_manifold(const Vector& theta) {
    unpack(theta, pk, ctrl);
    if (pk.free_u) renormalize(ctrl);
    resim_from(ctrl, sc.integrator, state, 1);
    DiscreteTriple z{ctrl, state};
    return cost_Jk(z, sc);
  }

  // Remove the component of the u-gradient normal to the unit sphere on the
  // equality range (those directions are killed by renormalization, so they
  // carry no descent information).
  void project_tangent(const Vector& theta, Vector& g) const {
    if (!pk.free_u) return;
    const auto [j_lo, j_hi] = index_tau(ctrl.mesh, ctrl.tau);
    const Index at0 = static_cast<Index>(pk.k) * pk.m;
    for (int j = 1; j <= pk.k; ++j) {
      if (j < j_lo || j > j_hi) continue;
      for (Index i = 0; i < pk.m; ++i) {
        const Index base = at0 + static_cast<Index>(j - 1) * pk.m * pk.n + i * pk.n;
        Vector row(pk.n), grow(pk.n);
        for (Index c = 0; c < pk.n; ++c) {
          row(c) = theta(base + c);
          grow(c) = g(base + c);
        }
        const Scalar nrm = row.norm();
        if (nrm < 1e-12) continue;
        row /= nrm;
        grow -= grow.dot(row) * row;
        for (Index c = 0; c < pk.n; ++c) g(base + c) = grow(c);
      }
    }
  }

  Scalar eval(const Vector& theta, int from_node = 1) {
    unpack(theta, pk, ctrl);
    resim_from(ctrl, sc.integrator, state, from_node);
    DiscreteTriple z{ctrl, state};
    return cost_Jk(z, sc);
  }

  // u coordinates on the equality range with n = 1 have a trivial tangent
  // space: renormalization undoes any move, so their projected gradient is
  // identically zero and the finite differences can be skipped.
  bool frozen_u_var(Index v) const {
    if (!pk.free_u || pk.n > 1) return false;
    const Index at0 = static_cast<Index>(pk.k) * pk.m;
    if (v < at0) return false;
    // cumulative coordinates touch every node from node_of(v) to k, so the
    // whole suffix must lie in the unit-norm equality range
    const int node = pk.node_of(v);
    const auto [j_lo, j_hi] = index_tau(ctrl.mesh, ctrl.tau);
    return node >= j_lo && j_hi == pk.k;
  }

  Vector gradient(const Vector& theta, Scalar base_scale) {
    Vector g(theta.size());
    const Scalar step0 = sc.solver.fd_step;
    Vector th = theta;
    for (Index v = 0; v < theta.size(); ++v) {
      if (frozen_u_var(v)) {
        g(v) = 0.0;
        continue;
      }
      const Scalar step = step0 * std::max(base_scale, std::abs(theta(v)));
      const int node = pk.node_of(v);
      th(v) = theta(v) + step;
      const Scalar fp = eval(th, node);
      th(v) = theta(v) - step;
      const Scalar fm = eval(th, node);
      th(v) = theta(v);
      // restore the base suffix so the next coordinate's anchor row is clean
      eval(th, node);
      g(v) = (fp - fm) / (2 * step);
    }
    return g;
  }
};

SolveResult compass_search(const Scenario& sc, ReducedObjective& obj, Vector theta,
                           std::vector<std::pair<int, Scalar>> trace, Scalar f0) {
  Scalar step = 0.05 * std::max(1.0, theta.cwiseAbs().maxCoeff());
  Scalar f = f0;
  int iter = static_cast<int>(trace.size());
  const long budget = 50000 + 200L * theta.size();
  long evals = 0;
  while (step > 1e-8 && evals < budget) {
    bool improved = false;
    // smallest-index coordinate order; first strict improvement wins
    for (Index v = 0; v < theta.size() && !improved; ++v) {
      if (obj.frozen_u_var(v)) continue;
      for (const Scalar dir : {+1.0, -1.0}) {
        Vector th = theta;
        th(v) += dir * step;
        const Scalar ft = obj.eval_on_manifold(th);
        ++evals;
        if (ft < f - 1e-14) {
          theta = th;
          f = ft;
          improved = true;
          trace.emplace_back(++iter, f);
          break;
        }
      }
    }
    if (!improved) step /= 2;
  }
  SolveResult out;
  out.status = step <= 1e-8 ? SolveResult::Status::MeshConverged : SolveResult::Status::Stalled;
  out.cost = obj.eval_on_manifold(theta);
  out.triple = DiscreteTriple{obj.ctrl, obj.state};
  out.trace = std::move(trace);
  return out;
}

}  // namespace

SolveResult solve_reduced(const Scenario& sc, int k, const ControlPath& init) {
  sc.validate();
  if (!(init.mesh == Mesh(sc.T, k))) throw MeshMismatch();

  ReducedObjective obj{sc,
                       Packing{sc.m, sc.n, k, sc.mode == ControlMode::FreeU},
                       init,
                       StatePath{}};
  obj.ctrl.tau = sc.tau;
  renormalize(obj.ctrl);
  obj.state.mesh = init.mesh;
  obj.state.x.resize(k + 1, sc.n);
  obj.state.eta = Matrix::Zero(k, sc.m);
  obj.state.x.row(0) = sc.x0.transpose();
  {
    const auto P0 = obj.ctrl.polyhedron(0);
    if (sc.m > 0) {
      const Scalar viol = (P0.U * sc.x0 - P0.b).maxCoeff();
      if (viol > kActivityTol) throw InfeasibleInitial(viol);
    }
  }

  Vector theta = pack(obj.ctrl, obj.pk);
  Scalar f = obj.eval(theta);
  std::vector<std::pair<int, Scalar>> trace{{0, f}};

  if (!sc.cost.smooth()) return compass_search(sc, obj, theta, std::move(trace), f);

  // L-BFGS with Armijo backtracking on the projected finite-difference gradient
  const Scalar base_scale = 1.0;
  const int mem = 25;
  std::deque<Vector> s_hist, y_hist;
  Vector g = obj.gradient(theta, base_scale);
  obj.project_tangent(theta, g);
  SolveResult out;

  for (int iter = 1; iter <= sc.solver.max_iter; ++iter) {
    if (g.norm() <= sc.solver.tol) {
      out.status = SolveResult::Status::Converged;
      break;
    }
    // two-loop recursion
    Vector q = g;
    std::vector<Scalar> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      const Scalar rho = 1.0 / y_hist[static_cast<size_t>(i)].dot(s_hist[static_cast<size_t>(i)]);
      alpha[static_cast<size_t>(i)] = rho * s_hist[static_cast<size_t>(i)].dot(q);
      q -= alpha[static_cast<size_t>(i)] * y_hist[static_cast<size_t>(i)];
    }
    if (!s_hist.empty()) {
      const Scalar gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const Scalar rho = 1.0 / y_hist[i].dot(s_hist[i]);
      const Scalar beta = rho * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector d = -q;
    if (d.dot(g) > -1e-14 * d.norm() * g.norm()) d = -g;  // keep descent

    Scalar step = 1.0;
    Scalar f_new = f;
    Vector theta_new = theta;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      step = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        theta_new = theta + step * d;
        f_new = obj.eval(theta_new);
        if (f_new <= f + 1e-4 * step * g.dot(d)) {
          accepted = true;
          break;
        }
        step /= 2;
      }
      if (!accepted && attempt == 0 && !s_hist.empty()) {
        // contact kinks can invalidate the quasi-Newton model; retry steepest
        s_hist.clear();
        y_hist.clear();
        d = -g;
      }
    }
    if (!accepted) {
      // gradient information is exhausted; finish with the pattern search
      return compass_search(sc, obj, theta, std::move(trace), f);
    }
    if (obj.pk.free_u) {
      unpack(theta_new, obj.pk, obj.ctrl);
      renormalize(obj.ctrl);
      theta_new = pack(obj.ctrl, obj.pk);
      f_new = obj.eval(theta_new);
    }
    Vector g_new = obj.gradient(theta_new, base_scale);
    obj.project_tangent(theta_new, g_new);
    const Vector s = theta_new - theta;
    const Vector y = g_new - g;
    if (y.dot(s) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > mem) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    theta = theta_new;
    f = std::min(f, f_new);
    g = g_new;
    trace.emplace_back(iter, f);
    if (iter == sc.solver.max_iter) out.status = SolveResult::Status::Stalled;
  }
  if (g.norm() <= sc.solver.tol) out.status = SolveResult::Status::Converged;

  obj.eval(theta, 1);
  out.triple = DiscreteTriple{obj.ctrl, obj.state};
  out.cost = f;
  out.grad_norm = g.norm();
  out.trace = std::move(trace);
  if (out.status == SolveResult::Status::Stalled) {
    // hand the best iterate to the pattern search before giving up
    return compass_search(sc, obj, theta, std::move(out.trace), f);
  }
  return out;
}

Scalar evaluate_strategy(Strategy strategy, Scalar theta, const Vector& beta, int fine_k) {
  if (beta.size() != 2) throw BadConfig("strategy beta must have two components");
  if (!(theta > 0) || theta > 1.0) throw BadConfig("strategy needs theta in (0, 1]");

  const auto ramp = [](Scalar t, Scalar t0, Scalar t1, Scalar slope) {
    return slope * (std::clamp(t, t0, t1) - t0);
  };
  OffsetFunction bf;
  switch (strategy) {
    case Strategy::Simultaneous:
    case Strategy::Single:
      bf = [=](Scalar t) {
        Vector b(2);
        b << 1.0 + ramp(t, 0.0, theta, beta(0)), 1.0 + ramp(t, 0.0, theta, beta(1));
        return b;
      };
      break;
    case Strategy::Alternating:
      if (theta > 0.5) throw BadConfig("alternating strategy needs theta <= 1/2");
      bf = [=](Scalar t) {
        Vector b(2);
        b << 1.0 + ramp(t, 0.0, theta, beta(0)),
            1.0 + ramp(t, theta, 2 * theta, beta(1));
        return b;
      };
      break;
  }
  ControlFunction uf = [](Scalar) {
    Matrix U(2, 2);
    U << 1, 0, 0, 1;
    return U;
  };
  Scenario sc;
  sc.id = "strategy";
  sc.n = sc.m = 2;
  sc.T = 1.0;
  sc.x0 = Vector::Constant(2, 1.0);
  sc.cost.terminal = {TerminalCost::Kind::QuadraticHalf, Vector::Zero(2), 1.0};
  sc.cost.l3.kind = L3Term::Kind::Quad;
  sc.cost.l3.wb = 0.5;
  sc.u_init = uf;
  sc.b_init = bf;

  const auto ctrl = ControlPath::sample(Mesh(1.0, fine_k), uf, bf);
  const auto state = catch_up(sc.x0, ctrl);
  return cost_Jk(DiscreteTriple{ctrl, state}, sc);
}

}  // namespace sweep
