#include "sweep/sweeping.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

std::pair<int, int> index_tau(const Mesh& mesh, Scalar tau) {
  if (tau < 0 || tau > mesh.T / 2 + 1e-12) throw BadConfig("need 0 <= tau <= T/2");
  int j_lo = mesh.k;
  for (int j = 0; j <= mesh.k; ++j) {
    if (mesh.t(j) >= tau - 1e-12) { j_lo = j; break; }
  }
  int j_hi = 0;
  for (int j = mesh.k; j >= 0; --j) {
    if (mesh.t(j) <= mesh.T - tau + 1e-12) { j_hi = j; break; }
  }
  return {j_lo, j_hi};
}

Matrix ControlPath::u_at(Scalar t) const {
  const Scalar h = mesh.h();
  const int j = std::clamp(static_cast<int>(std::floor(t / h)), 0, mesh.k - 1);
  const Scalar w = (t - mesh.t(j)) / h;
  return (1 - w) * u[static_cast<size_t>(j)] + w * u[static_cast<size_t>(j + 1)];
}

Vector ControlPath::b_at(Scalar t) const {
  const Scalar h = mesh.h();
  const int j = std::clamp(static_cast<int>(std::floor(t / h)), 0, mesh.k - 1);
  const Scalar w = (t - mesh.t(j)) / h;
  return ((1 - w) * b.row(j) + w * b.row(j + 1)).transpose();
}

ControlPath ControlPath::sample(const Mesh& mesh, const ControlFunction& uf,
                                const OffsetFunction& bf, Scalar tau) {
  ControlPath out;
  out.mesh = mesh;
  out.tau = tau;
  out.u.reserve(static_cast<size_t>(mesh.k) + 1);
  for (int j = 0; j <= mesh.k; ++j) out.u.push_back(uf(mesh.t(j)));
  const Index m = out.u.front().rows();
  out.b.resize(mesh.k + 1, m);
  for (int j = 0; j <= mesh.k; ++j) out.b.row(j) = bf(mesh.t(j)).transpose();
  return out;
}

Scalar ControlPath::norm_constraint_violation() const {
  const auto [j_lo, j_hi] = index_tau(mesh, tau);
  Scalar worst = 0.0;
  for (int j = 0; j <= mesh.k; ++j) {
    for (Index i = 0; i < m(); ++i) {
      const Scalar nrm = u[static_cast<size_t>(j)].row(i).norm();
      if (j >= j_lo && j <= j_hi) {
        worst = std::max(worst, std::abs(nrm - 1.0));
      } else {
        worst = std::max(worst, std::max(0.5 - nrm, nrm - 1.5));
      }
    }
  }
  return worst;
}

Vector StatePath::x_at(Scalar t) const {
  const Scalar h = mesh.h();
  const int j = std::clamp(static_cast<int>(std::floor(t / h)), 0, mesh.k - 1);
  const Scalar w = (t - mesh.t(j)) / h;
  return ((1 - w) * x.row(j) + w * x.row(j + 1)).transpose();
}

StatePath catch_up(const Vector& x0, const ControlPath& ctrl, const CatchUpOptions& opts) {
  const Mesh& mesh = ctrl.mesh;
  const Index n = ctrl.n();
  const Index m = ctrl.m();
  const Scalar h = mesh.h();

  {
    const auto P0 = ctrl.polyhedron(0);
    if (m > 0) {
      const Scalar viol = (P0.U * x0 - P0.b).maxCoeff();
      if (viol > opts.feas_tol) throw InfeasiblePoint(viol);
    }
  }

  StatePath out;
  out.mesh = mesh;
  out.x.resize(mesh.k + 1, n);
  out.eta = Matrix::Zero(mesh.k, m);
  out.x.row(0) = x0.transpose();

  Vector x = x0;
  for (int j = 0; j < mesh.k; ++j) {
    const auto P = ctrl.polyhedron(j + 1);
    Projection pr;
    try {
      pr = project(x, P);
    } catch (const EmptySetError& e) {
      throw EmptySetAt(j + 1, e.ray);
    }
    const Scalar jump = (pr.point - x).norm();
    Scalar stepvar = (ctrl.b.row(j + 1) - ctrl.b.row(j)).norm();
    stepvar += (ctrl.u[static_cast<size_t>(j + 1)] - ctrl.u[static_cast<size_t>(j)]).norm();
    const Scalar threshold = opts.jump_guard * h * (1.0 + stepvar);
    if (jump > threshold) throw DiscontinuityDetected(j + 1, jump, threshold);

    out.eta.row(j) = (pr.coeffs.eta / h).transpose();
    x = pr.point;
    out.x.row(j + 1) = x.transpose();
  }
  return out;
}

FeasibilityReport verify_feasible(const StatePath& state, const ControlPath& ctrl, Scalar tol,
                                  EtaSide side) {
  if (!(state.mesh == ctrl.mesh)) throw MeshMismatch();
  const Mesh& mesh = ctrl.mesh;
  const Scalar h = mesh.h();

  FeasibilityReport rep;
  rep.node_violation.resize(static_cast<size_t>(mesh.k) + 1, 0.0);
  rep.min_eta = state.eta.size() > 0 ? state.eta.minCoeff() : 0.0;

  for (int j = 0; j <= mesh.k; ++j) {
    const auto P = ctrl.polyhedron(j);
    const Scalar viol = P.m > 0
        ? (P.U * state.x.row(j).transpose() - P.b).maxCoeff()
        : 0.0;
    rep.node_violation[static_cast<size_t>(j)] = viol;
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  for (int j = 0; j < mesh.k; ++j) {
    const int side_node = (side == EtaSide::Implicit) ? j + 1 : j;
    const auto P = ctrl.polyhedron(side_node);
    const Vector xside = state.x.row(side == EtaSide::Implicit ? j + 1 : j).transpose();
    const Vector eta = state.eta.row(j).transpose();
    const Vector vel = (state.x.row(j + 1) - state.x.row(j)).transpose() / h;
    rep.max_cone_residual =
        std::max(rep.max_cone_residual, (vel + P.U.transpose() * eta).norm());
    for (Index i = 0; i < P.m; ++i) {
      const Scalar slack = P.b(i) - P.U.row(i).dot(xside);
      rep.max_complementarity = std::max(rep.max_complementarity, std::abs(eta(i) * slack));
    }
  }
  rep.ok = rep.max_violation <= tol && rep.min_eta >= -tol &&
           rep.max_complementarity <= tol && rep.max_cone_residual <= tol * 10.0 / h;
  return rep;
}

ConvergenceTable convergence_study(const ControlFunction& uf, const OffsetFunction& bf,
                                   const Vector& x0, Scalar T, const std::vector<int>& k_list,
                                   const std::optional<StateFunction>& analytic, int k_ref,
                                   Scalar tau) {
  for (size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1]) throw BadConfig("k_list must be increasing");

  std::optional<StatePath> richardson;
  std::optional<ControlPath> rich_ctrl;
  if (!analytic) {
    rich_ctrl = ControlPath::sample(Mesh(T, k_ref), uf, bf, tau);
    richardson = catch_up(x0, *rich_ctrl);
  }

  const int fine = 4 * std::max(k_list.back(), 256);
  ConvergenceTable table;
  for (int k : k_list) {
    const auto ctrl = ControlPath::sample(Mesh(T, k), uf, bf, tau);
    const auto path = catch_up(x0, ctrl);
    Scalar err = 0.0;
    for (int q = 0; q <= fine; ++q) {
      const Scalar t = T * (static_cast<Scalar>(q) / fine);
      const Vector ref = analytic ? (*analytic)(t) : richardson->x_at(t);
      err = std::max(err, (path.x_at(t) - ref).norm());
    }
    table.rows.push_back({k, err});
  }
  for (size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const Scalar e1 = table.rows[i].error, e2 = table.rows[i + 1].error;
    const Scalar ratio = static_cast<Scalar>(table.rows[i + 1].k) / table.rows[i].k;
    if (e1 > 0 && e2 > 0) {
      table.orders.push_back(std::log(e1 / e2) / std::log(ratio));
    } else {
      table.orders.push_back(std::numeric_limits<Scalar>::quiet_NaN());
    }
  }
  return table;
}

}  // namespace sweep
