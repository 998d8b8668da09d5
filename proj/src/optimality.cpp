#include "sweep/optimality.hpp"

#include "sweep/lp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sweep {

namespace {

struct Pattern {
  std::vector<std::vector<bool>> active;      // (k+1) x m, per node
  std::vector<std::vector<bool>> active_eta;  // k x m, at the eta side node
  std::vector<std::vector<bool>> pushing;     // k x m
  std::vector<std::pair<int, int>> borderline;  // |margin| in (tol, 10 tol]
};

Scalar face_margin(const DiscreteTriple& z, int j, Index i) {
  return z.ctrl.b(j, i) -
         z.ctrl.u[static_cast<size_t>(j)].row(i).dot(z.state.x.row(j).transpose());
}

Pattern resolve_pattern(const DiscreteTriple& z, Scalar act_tol,
                        EtaSide side = EtaSide::Implicit) {
  const int k = z.ctrl.mesh.k;
  const Index m = z.ctrl.m();
  Pattern pat;
  pat.active.assign(static_cast<size_t>(k) + 1, std::vector<bool>(static_cast<size_t>(m), false));
  pat.active_eta.assign(static_cast<size_t>(k), std::vector<bool>(static_cast<size_t>(m), false));
  pat.pushing.assign(static_cast<size_t>(k), std::vector<bool>(static_cast<size_t>(m), false));
  for (int j = 0; j <= k; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Scalar margin = face_margin(z, j, i);
      pat.active[static_cast<size_t>(j)][static_cast<size_t>(i)] = std::abs(margin) <= act_tol;
      if (std::abs(margin) > act_tol && std::abs(margin) <= 10 * act_tol)
        pat.borderline.emplace_back(j, static_cast<int>(i));
    }
  }
  for (int j = 0; j < k; ++j) {
    const int side_node = side == EtaSide::Implicit ? j + 1 : j;
    for (Index i = 0; i < m; ++i) {
      pat.pushing[static_cast<size_t>(j)][static_cast<size_t>(i)] = z.state.eta(j, i) > act_tol;
      pat.active_eta[static_cast<size_t>(j)][static_cast<size_t>(i)] =
          std::abs(face_margin(z, side_node, i)) <= act_tol;
    }
  }
  return pat;
}

bool all_inactive(const Pattern& pat, int j) {
  for (bool a : pat.active[static_cast<size_t>(j)])
    if (a) return false;
  return true;
}

// Cost-catalog data sampled along the candidate.
struct CostData {
  std::vector<Vector> wx, wb, vu;                    // per interval
  std::vector<std::vector<SubgradRange>> vx, vb;     // per interval
};

CostData sample_cost(const DiscreteTriple& z, const Scenario& sc) {
  const Mesh& mesh = z.ctrl.mesh;
  const Scalar h = mesh.h();
  CostData cd;
  for (int j = 0; j < mesh.k; ++j) {
    const Scalar t = mesh.t(j);
    const Vector xj = z.state.x.row(j).transpose();
    const Vector bj = z.ctrl.b.row(j).transpose();
    const Vector xdot = (z.state.x.row(j + 1) - z.state.x.row(j)).transpose() / h;
    const Vector bdot = (z.ctrl.b.row(j + 1) - z.ctrl.b.row(j)).transpose() / h;
    const Matrix dU =
        (z.ctrl.u[static_cast<size_t>(j + 1)] - z.ctrl.u[static_cast<size_t>(j)]) / h;
    const Vector udot = Eigen::Map<const Vector>(dU.data(), dU.size());
    cd.wx.push_back(sc.cost.l1.grad_x(t, xj));
    cd.wb.push_back(sc.cost.l1.grad_b(t, bj));
    cd.vu.push_back(sc.cost.l3.grad_udot(udot));
    cd.vx.push_back(sc.cost.l2.subgrad(xdot));
    cd.vb.push_back(sc.cost.l3.subgrad_bdot(t, bdot));
  }
  return cd;
}

Scalar range_dist(Scalar v, const SubgradRange& r, Scalar lambda) {
  const Scalar lo = lambda * r.lo, hi = lambda * r.hi;
  if (v < std::min(lo, hi)) return std::min(lo, hi) - v;
  if (v > std::max(lo, hi)) return v - std::max(lo, hi);
  return 0.0;
}

void bump(std::map<std::string, Scalar>& map, const std::string& name, Scalar v) {
  auto& slot = map[name];
  slot = std::max(slot, std::abs(v));
}

}  // namespace

DualCertificate DualCertificate::scaled(Scalar t) const {
  DualCertificate out = *this;
  out.lambda *= t;
  out.px *= t;
  out.pu *= t;
  out.pb *= t;
  out.gamma *= t;
  out.xi *= t;
  out.eta = eta;  // primal multipliers stay with the primal
  return out;
}

CertificateResiduals residuals_thm52(const DiscreteTriple& z, const DualCertificate& cert,
                                     const Scenario& sc, Scalar act_tol, EtaSide side) {
  const Mesh& mesh = z.ctrl.mesh;
  const int k = mesh.k;
  const Scalar h = mesh.h();
  const Index n = z.ctrl.n();
  const Index m = z.ctrl.m();
  const Index nm = n * m;
  const bool free_u = sc.mode == ControlMode::FreeU;

  if (cert.px.rows() != k + 1 || cert.px.cols() != n || cert.pb.rows() != k + 1 ||
      cert.pb.cols() != m || cert.gamma.rows() != k)
    throw ShapeMismatch("certificate shapes disagree with the candidate mesh");
  if (free_u && (cert.pu.rows() != k + 1 || cert.pu.cols() != nm || cert.xi.rows() != k + 1))
    throw ShapeMismatch("certificate u-blocks missing for a free-u scenario");

  const Pattern pat = resolve_pattern(z, act_tol, side);
  const CostData cd = sample_cost(z, sc);
  CertificateResiduals res;
  auto& map = res.by_name;
  for (const char* name : {"dyn", "compl-eta", "adjx", "adjb", "pin-b", "orth", "meas-supp",
                           "trans-x", "trans-b", "selection"})
    map[name] = 0.0;
  if (free_u)
    for (const char* name : {"adju", "pin-u", "trans-u", "xi-box"}) map[name] = 0.0;
  const Scalar lambda = cert.lambda;

  for (int j = 0; j < k; ++j) {
    const Matrix& Uj = z.ctrl.u[static_cast<size_t>(j)];
    const Matrix& Uside =
        z.ctrl.u[static_cast<size_t>(side == EtaSide::Implicit ? j + 1 : j)];
    const Vector xj = z.state.x.row(j).transpose();

    // dyn: velocity representation through eta against the side polyhedron
    {
      Vector resid = (z.state.x.row(j + 1) - z.state.x.row(j)).transpose() / h;
      resid += Uside.transpose() * cert.eta.row(j).transpose();
      bump(map, "dyn", resid.norm());
    }
    // compl-eta against the eta-side polyhedron
    for (Index i = 0; i < m; ++i) {
      bump(map, "compl-eta", std::max(0.0, -cert.eta(j, i)));
      if (!pat.active_eta[static_cast<size_t>(j)][static_cast<size_t>(i)])
        bump(map, "compl-eta", cert.eta(j, i));
    }
    // adjx
    {
      Vector resid = (cert.px.row(j + 1) - cert.px.row(j)).transpose() / h;
      resid -= lambda * cd.wx[static_cast<size_t>(j)];
      resid -= Uj.transpose() * cert.gamma.row(j).transpose();
      bump(map, "adjx", resid.norm());
    }
    // adjb
    for (Index i = 0; i < m; ++i) {
      const Scalar resid = cert.gamma(j, i) - lambda * cd.wb[static_cast<size_t>(j)](i) +
                           (cert.pb(j + 1, i) - cert.pb(j, i)) / h;
      bump(map, "adjb", resid);
    }
    // pin-b with the stored selection, plus selection validity
    for (Index i = 0; i < m; ++i) {
      bump(map, "pin-b", cert.pb(j + 1, i) - lambda * cert.vb(j, i));
      bump(map, "selection",
           range_dist(lambda * cert.vb(j, i), cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)],
                      lambda));
    }
    for (Index c = 0; c < n; ++c)
      bump(map, "selection",
           range_dist(lambda * cert.vx(j, c), cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)],
                      lambda));
    // orth
    for (Index i = 0; i < m; ++i) {
      if (!pat.pushing[static_cast<size_t>(j)][static_cast<size_t>(i)]) continue;
      const Vector s = lambda * cert.vx.row(j).transpose() - cert.px.row(j + 1).transpose();
      bump(map, "orth", Uj.row(i).dot(s));
    }
    // meas-supp
    if (all_inactive(pat, j)) bump(map, "meas-supp", cert.gamma.row(j).norm());

    if (free_u) {
      // pin-u
      Vector resid = cert.pu.row(j + 1).transpose() - lambda * cd.vu[static_cast<size_t>(j)];
      bump(map, "pin-u", resid.norm());
      // adju blockwise
      const Vector sx = lambda * cert.vx.row(j).transpose() - cert.px.row(j + 1).transpose();
      for (Index i = 0; i < m; ++i) {
        Vector block = (cert.pu.row(j + 1).segment(i * n, n) -
                        cert.pu.row(j).segment(i * n, n)).transpose() / h;
        block -= (2.0 / h) * cert.xi(j, i) * Uj.row(i).transpose();
        block -= cert.gamma(j, i) * xj;
        block += cert.eta(j, i) * sx;
        bump(map, "adju", block.norm());
      }
    }
  }

  // terminal block
  {
    const Matrix& Uk = z.ctrl.u[static_cast<size_t>(k)];
    const Vector xk = z.state.x.row(k).transpose();
    Vector resid = cert.px.row(k).transpose() + lambda * sc.cost.terminal.gradient(xk);
    resid += Uk.transpose() * cert.pb.row(k).transpose();
    bump(map, "trans-x", resid.norm());
    for (Index i = 0; i < m; ++i) {
      bump(map, "trans-b", std::max(0.0, -cert.pb(k, i)));
      if (!pat.active[static_cast<size_t>(k)][static_cast<size_t>(i)])
        bump(map, "trans-b", cert.pb(k, i));
      bump(map, "compl-eta", cert.eta(k, i) - cert.pb(k, i));
    }
    if (free_u) {
      for (Index i = 0; i < m; ++i) {
        Vector block = cert.pu.row(k).segment(i * n, n).transpose();
        block += cert.pb(k, i) * xk;
        block += 2.0 * cert.xi(k, i) * Uk.row(i).transpose();
        bump(map, "trans-u", block.norm());
      }
    }
  }

  // xi sign conditions on the relaxed index ranges
  if (free_u) {
    const auto [j_lo, j_hi] = index_tau(mesh, z.ctrl.tau);
    for (int j = 0; j <= k; ++j) {
      if (j >= j_lo && j <= j_hi) continue;  // equality range: xi free
      for (Index i = 0; i < m; ++i) {
        const Scalar nrm = z.ctrl.u[static_cast<size_t>(j)].row(i).norm();
        if (std::abs(nrm - 0.5) <= 1e-9) {
          bump(map, "xi-box", std::max(0.0, cert.xi(j, i)));
        } else if (std::abs(nrm - 1.5) <= 1e-9) {
          bump(map, "xi-box", std::max(0.0, -cert.xi(j, i)));
        } else {
          bump(map, "xi-box", cert.xi(j, i));
        }
      }
    }
  }

  for (const auto& [name, v] : map) res.max_residual = std::max(res.max_residual, v);

  res.nontrivial_magnitude = lambda + cert.pb.row(0).norm();
  if (free_u) res.nontrivial_magnitude += cert.pu.row(0).norm();
  res.nontrivial = res.nontrivial_magnitude > 1e-9;
  res.enhanced_nontrivial =
      lambda + cert.px.row(k).norm() + cert.pb.row(k).norm() +
          (free_u ? cert.pu.row(k).norm() : 0.0) >
      1e-9;

  // Remark-6.2-style degenerate pattern: lambda = 0, vanishing adjoint except
  // at the initial node, dual mass concentrated at t = 0
  Scalar interior_p = 0.0;
  for (int j = 1; j <= k; ++j) {
    interior_p = std::max(interior_p, cert.px.row(j).norm() + cert.pb.row(j).norm() +
                                          (free_u ? cert.pu.row(j).norm() : 0.0));
  }
  Scalar mass0 = h * cert.gamma.row(0).norm();
  Scalar interior_mass = 0.0;
  for (int j = 1; j < k; ++j) interior_mass += h * cert.gamma.row(j).norm();
  if (free_u) {
    mass0 += cert.xi.row(0).norm();
    for (int j = 1; j <= k; ++j) interior_mass += cert.xi.row(j).norm();
  }
  const Scalar head = cert.pb.row(0).norm() + (free_u ? cert.pu.row(0).norm() : 0.0) + mass0;
  res.degenerate = lambda <= 1e-9 && interior_p <= 1e-7 * std::max(1.0, head) &&
                   interior_mass <= 1e-7 * std::max(1.0, head) && head > 1e-9;
  return res;
}

// ---------------------------------------------------------------------------
// certificate reconstruction
// ---------------------------------------------------------------------------

namespace {

// Sparse row under construction.
struct Row {
  std::vector<std::pair<Index, Scalar>> terms;
  Scalar rhs = 0.0;
  char rel = '=';
  std::string group;
};

struct CertSystem {
  // variable layout
  bool lambda_fixed = false;
  Scalar lambda_value = 1.0;
  bool free_u = false;
  Index n = 0, m = 0, nm = 0;
  int k = 0;
  Scalar h = 0.0;
  Index var_count = 0;
  Index v_lambda = -1, v_px = -1, v_pu = -1, v_pb = -1, v_gamma = -1, v_xi = -1;
  Matrix sx_var, sb_var;  // k x {n,m}: handle of the box variable or -1
  std::vector<Row> rows;

  Index px(int j, Index c) const { return v_px + static_cast<Index>(j) * n + c; }
  Index pu(int j, Index c) const { return v_pu + static_cast<Index>(j) * nm + c; }
  Index pb(int j, Index i) const { return v_pb + static_cast<Index>(j) * m + i; }
  Index gm(int j, Index i) const { return v_gamma + static_cast<Index>(j) * m + i; }
  Index xi(int j, Index i) const { return v_xi + static_cast<Index>(j) * m + i; }

  void add_lambda(Row& r, Scalar coeff) const {
    if (lambda_fixed) {
      r.rhs -= coeff * lambda_value;
    } else if (coeff != 0.0) {
      r.terms.emplace_back(v_lambda, coeff);
    }
  }
};

CertSystem build_system(const DiscreteTriple& z, const Scenario& sc, const Pattern& pat,
                        const CostData& cd, const LambdaMode& mode) {
  const Mesh& mesh = z.ctrl.mesh;
  CertSystem S;
  S.lambda_fixed = mode.fixed;
  S.lambda_value = mode.value;
  S.free_u = sc.mode == ControlMode::FreeU;
  S.n = z.ctrl.n();
  S.m = z.ctrl.m();
  S.nm = S.n * S.m;
  S.k = mesh.k;
  S.h = mesh.h();

  Index at = 0;
  if (!S.lambda_fixed) S.v_lambda = at++;
  S.v_px = at;
  at += static_cast<Index>(S.k + 1) * S.n;
  S.v_pb = at;
  at += static_cast<Index>(S.k + 1) * S.m;
  S.v_gamma = at;
  at += static_cast<Index>(S.k) * S.m;
  if (S.free_u) {
    S.v_pu = at;
    at += static_cast<Index>(S.k + 1) * S.nm;
    S.v_xi = at;
    at += static_cast<Index>(S.k + 1) * S.m;
  }
  S.sx_var = Matrix::Constant(S.k, S.n, -1);
  S.sb_var = Matrix::Constant(S.k, S.m, -1);
  for (int j = 0; j < S.k; ++j) {
    for (Index c = 0; c < S.n; ++c)
      if (!cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)].singleton())
        S.sx_var(j, c) = static_cast<Scalar>(at++);
    for (Index i = 0; i < S.m; ++i)
      if (!cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)].singleton())
        S.sb_var(j, i) = static_cast<Scalar>(at++);
  }
  S.var_count = at;

  const auto add_sx = [&](Row& r, int j, Index c, Scalar coeff) {
    // contribution coeff * (lambda v^x_j(c))
    const Scalar handle = S.sx_var(j, c);
    if (handle >= 0) {
      r.terms.emplace_back(static_cast<Index>(handle), coeff);
    } else {
      S.add_lambda(r, coeff * cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)].mid());
    }
  };
  const auto add_sb = [&](Row& r, int j, Index i, Scalar coeff) {
    const Scalar handle = S.sb_var(j, i);
    if (handle >= 0) {
      r.terms.emplace_back(static_cast<Index>(handle), coeff);
    } else {
      S.add_lambda(r, coeff * cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)].mid());
    }
  };

  for (int j = 0; j < S.k; ++j) {
    const Matrix& Uj = z.ctrl.u[static_cast<size_t>(j)];
    const Vector xj = z.state.x.row(j).transpose();

    for (Index c = 0; c < S.n; ++c) {  // adjx
      Row r;
      r.group = "adjx";
      r.terms.emplace_back(S.px(j + 1, c), 1.0);
      r.terms.emplace_back(S.px(j, c), -1.0);
      S.add_lambda(r, -S.h * cd.wx[static_cast<size_t>(j)](c));
      for (Index i = 0; i < S.m; ++i) r.terms.emplace_back(S.gm(j, i), -S.h * Uj(i, c));
      S.rows.push_back(std::move(r));
    }
    for (Index i = 0; i < S.m; ++i) {  // adjb, scaled by h for conditioning
      Row r;
      r.group = "adjb";
      r.terms.emplace_back(S.gm(j, i), S.h);
      S.add_lambda(r, -S.h * cd.wb[static_cast<size_t>(j)](i));
      r.terms.emplace_back(S.pb(j + 1, i), 1.0);
      r.terms.emplace_back(S.pb(j, i), -1.0);
      S.rows.push_back(std::move(r));
    }
    for (Index i = 0; i < S.m; ++i) {  // pin-b
      Row r;
      r.group = "pin-b";
      r.terms.emplace_back(S.pb(j + 1, i), 1.0);
      add_sb(r, j, i, -1.0);
      S.rows.push_back(std::move(r));
    }
    for (Index i = 0; i < S.m; ++i) {  // orth on pushing faces
      if (!pat.pushing[static_cast<size_t>(j)][static_cast<size_t>(i)]) continue;
      Row r;
      r.group = "orth";
      for (Index c = 0; c < S.n; ++c) {
        add_sx(r, j, c, Uj(i, c));
        r.terms.emplace_back(S.px(j + 1, c), -Uj(i, c));
      }
      S.rows.push_back(std::move(r));
    }
    if (all_inactive(pat, j)) {  // meas-supp
      for (Index i = 0; i < S.m; ++i) {
        Row r;
        r.group = "meas-supp";
        r.terms.emplace_back(S.gm(j, i), 1.0);
        S.rows.push_back(std::move(r));
      }
    }
    if (S.free_u) {
      for (Index c = 0; c < S.nm; ++c) {  // pin-u
        Row r;
        r.group = "pin-u";
        r.terms.emplace_back(S.pu(j + 1, c), 1.0);
        S.add_lambda(r, -cd.vu[static_cast<size_t>(j)](c));
        S.rows.push_back(std::move(r));
      }
      for (Index i = 0; i < S.m; ++i) {  // adju, scaled by h for conditioning
        for (Index c = 0; c < S.n; ++c) {
          Row r;
          r.group = "adju";
          r.terms.emplace_back(S.pu(j + 1, i * S.n + c), 1.0);
          r.terms.emplace_back(S.pu(j, i * S.n + c), -1.0);
          r.terms.emplace_back(S.xi(j, i), -2.0 * Uj(i, c));
          r.terms.emplace_back(S.gm(j, i), -S.h * xj(c));
          const Scalar etaji = z.state.eta(j, i);
          if (etaji != 0.0) {
            add_sx(r, j, c, S.h * etaji);
            r.terms.emplace_back(S.px(j + 1, c), -S.h * etaji);
          }
          S.rows.push_back(std::move(r));
        }
      }
    }
  }

  // box couplings for the nonsmooth selections: lo * lambda <= s <= hi * lambda
  for (int j = 0; j < S.k; ++j) {
    const auto couple = [&](Scalar handle, const SubgradRange& rg) {
      if (handle < 0) return;
      const Index v = static_cast<Index>(handle);
      Row up;
      up.group = "pin-b";  // the couplings belong to the pin conditions
      up.rel = '<';
      up.terms.emplace_back(v, 1.0);
      S.add_lambda(up, -rg.hi);
      S.rows.push_back(std::move(up));
      Row dn;
      dn.group = "pin-b";
      dn.rel = '>';
      dn.terms.emplace_back(v, 1.0);
      S.add_lambda(dn, -rg.lo);
      S.rows.push_back(std::move(dn));
    };
    for (Index c = 0; c < S.n; ++c)
      couple(S.sx_var(j, c), cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)]);
    for (Index i = 0; i < S.m; ++i)
      couple(S.sb_var(j, i), cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)]);
  }

  // terminal conditions
  {
    const Matrix& Uk = z.ctrl.u[static_cast<size_t>(S.k)];
    const Vector xk = z.state.x.row(S.k).transpose();
    const Vector phi_grad = sc.cost.terminal.gradient(xk);
    for (Index c = 0; c < S.n; ++c) {
      Row r;
      r.group = "trans-x";
      r.terms.emplace_back(S.px(S.k, c), 1.0);
      S.add_lambda(r, phi_grad(c));
      for (Index i = 0; i < S.m; ++i) r.terms.emplace_back(S.pb(S.k, i), Uk(i, c));
      S.rows.push_back(std::move(r));
    }
    for (Index i = 0; i < S.m; ++i) {
      Row pos;
      pos.group = "trans-b";
      pos.rel = '>';
      pos.terms.emplace_back(S.pb(S.k, i), 1.0);
      S.rows.push_back(std::move(pos));
      if (!pat.active[static_cast<size_t>(S.k)][static_cast<size_t>(i)]) {
        Row zero;
        zero.group = "trans-b";
        zero.terms.emplace_back(S.pb(S.k, i), 1.0);
        S.rows.push_back(std::move(zero));
      }
    }
    if (S.free_u) {
      for (Index i = 0; i < S.m; ++i) {
        for (Index c = 0; c < S.n; ++c) {
          Row r;
          r.group = "trans-u";
          r.terms.emplace_back(S.pu(S.k, i * S.n + c), 1.0);
          r.terms.emplace_back(S.pb(S.k, i), xk(c));
          r.terms.emplace_back(S.xi(S.k, i), 2.0 * Uk(i, c));
          S.rows.push_back(std::move(r));
        }
      }
    }
  }

  // xi sign structure outside the unit-norm equality range
  if (S.free_u) {
    const auto [j_lo, j_hi] = index_tau(mesh, z.ctrl.tau);
    for (int j = 0; j <= S.k; ++j) {
      if (j >= j_lo && j <= j_hi) continue;
      for (Index i = 0; i < S.m; ++i) {
        const Scalar nrm = z.ctrl.u[static_cast<size_t>(j)].row(i).norm();
        Row r;
        r.group = "xi-box";
        r.terms.emplace_back(S.xi(j, i), 1.0);
        if (std::abs(nrm - 0.5) <= 1e-9) {
          r.rel = '<';
        } else if (std::abs(nrm - 1.5) <= 1e-9) {
          r.rel = '>';
        } else {
          r.rel = '=';
        }
        S.rows.push_back(std::move(r));
      }
    }
  }
  return S;
}

lp::Problem to_lp(const CertSystem& S, const std::set<std::string>& excluded,
                  const Vector& objective) {
  Index nrows = 0;
  for (const auto& r : S.rows)
    if (!excluded.count(r.group)) ++nrows;
  lp::Problem p = lp::Problem::sized(nrows, S.var_count);
  Index at = 0;
  for (const auto& r : S.rows) {
    if (excluded.count(r.group)) continue;
    for (const auto& [v, c] : r.terms) p.A(at, v) += c;
    p.b(at) = r.rhs;
    p.rel[static_cast<size_t>(at)] = r.rel;
    ++at;
  }
  // adjoint and selection variables live at O(1) after normalization; the
  // measure densities carry atom-scale mass O(1/h)
  const Scalar pbox = 50.0;
  const Scalar gbox = 50.0 * (1.0 + 1.0 / S.h);
  p.lo.setConstant(-pbox);
  p.hi.setConstant(pbox);
  for (int j = 0; j < S.k; ++j) {
    for (Index i = 0; i < S.m; ++i) {
      p.lo(S.gm(j, i)) = -gbox;
      p.hi(S.gm(j, i)) = gbox;
    }
  }
  if (!S.lambda_fixed) {
    p.lo(S.v_lambda) = 0.0;
    p.hi(S.v_lambda) = 1.0;
  }
  p.c = objective;
  return p;
}

DualCertificate extract(const CertSystem& S, const DiscreteTriple& z, const CostData& cd,
                        const Vector& sol) {
  DualCertificate cert;
  cert.lambda = S.lambda_fixed ? S.lambda_value : sol(S.v_lambda);
  cert.px.resize(S.k + 1, S.n);
  cert.pb.resize(S.k + 1, S.m);
  cert.gamma.resize(S.k, S.m);
  cert.pu.resize(S.k + 1, S.free_u ? S.nm : 0);
  cert.xi = Matrix::Zero(S.k + 1, S.free_u ? S.m : 0);
  for (int j = 0; j <= S.k; ++j) {
    for (Index c = 0; c < S.n; ++c) cert.px(j, c) = sol(S.px(j, c));
    for (Index i = 0; i < S.m; ++i) cert.pb(j, i) = sol(S.pb(j, i));
    if (S.free_u) {
      for (Index c = 0; c < S.nm; ++c) cert.pu(j, c) = sol(S.pu(j, c));
      for (Index i = 0; i < S.m; ++i) cert.xi(j, i) = sol(S.xi(j, i));
    }
  }
  for (int j = 0; j < S.k; ++j)
    for (Index i = 0; i < S.m; ++i) cert.gamma(j, i) = sol(S.gm(j, i));

  cert.eta.resize(S.k + 1, S.m);
  for (int j = 0; j < S.k; ++j) cert.eta.row(j) = z.state.eta.row(j);
  cert.eta.row(S.k) = cert.pb.row(S.k);

  cert.wx.resize(S.k, S.n);
  cert.wb.resize(S.k, S.m);
  cert.wu = Matrix::Zero(S.k, S.free_u ? S.nm : 0);
  cert.vx.resize(S.k, S.n);
  cert.vb.resize(S.k, S.m);
  cert.vu.resize(S.k, S.free_u ? S.nm : 0);
  for (int j = 0; j < S.k; ++j) {
    cert.wx.row(j) = cd.wx[static_cast<size_t>(j)].transpose();
    cert.wb.row(j) = cd.wb[static_cast<size_t>(j)].transpose();
    if (S.free_u) cert.vu.row(j) = cd.vu[static_cast<size_t>(j)].transpose();
    for (Index c = 0; c < S.n; ++c) {
      const Scalar handle = S.sx_var(j, c);
      cert.vx(j, c) = handle >= 0 && cert.lambda > 1e-12
                          ? sol(static_cast<Index>(handle)) / cert.lambda
                          : cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)].mid();
    }
    for (Index i = 0; i < S.m; ++i) {
      const Scalar handle = S.sb_var(j, i);
      cert.vb(j, i) = handle >= 0 && cert.lambda > 1e-12
                          ? sol(static_cast<Index>(handle)) / cert.lambda
                          : cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)].mid();
    }
  }
  return cert;
}

// lambda + |q^u(0)| + |q^b(0)| + |p(T)| + int|gamma| + int|xi| = 1
void normalize(DualCertificate& cert, Scalar h) {
  const Index last = cert.px.rows() - 1;
  Scalar total = cert.lambda + cert.pb.row(0).norm() + cert.pb.row(last).norm() +
                 cert.px.row(last).norm();
  if (cert.pu.cols() > 0) total += cert.pu.row(0).norm() + cert.pu.row(last).norm();
  for (Index j = 0; j < cert.gamma.rows(); ++j) total += h * cert.gamma.row(j).norm();
  if (cert.xi.cols() > 0)
    for (Index j = 0; j < cert.xi.rows(); ++j) total += cert.xi.row(j).norm();
  if (total > 1e-14) cert = cert.scaled(1.0 / total);
}

std::vector<std::string> greedy_iis(const CertSystem& S) {
  // deletion filter over condition groups; a group stays only if removing it
  // makes the system feasible
  const std::vector<std::string> order = {"xi-box", "meas-supp", "orth",  "adjx",
                                          "adju",   "adjb",      "pin-u", "pin-b",
                                          "trans-x", "trans-u",  "trans-b"};
  std::set<std::string> excluded;
  const Vector zero_obj = Vector::Zero(S.var_count);
  const auto feasible = [&](const std::set<std::string>& ex) {
    const auto r = lp::solve(to_lp(S, ex, zero_obj));
    return r.status == lp::Status::Optimal;
  };
  if (feasible(excluded)) return {};
  for (const auto& g : order) {
    auto trial = excluded;
    trial.insert(g);
    if (!feasible(trial)) excluded = trial;  // still infeasible without g: drop g
  }
  std::vector<std::string> core;
  for (const auto& g : order)
    if (!excluded.count(g)) core.push_back(g);
  return core;
}

}  // namespace

CertificateSearch solve_certificate(const DiscreteTriple& z, const Scenario& sc,
                                    const LambdaMode& mode, Scalar act_tol, EtaSide side) {
  const Pattern base_pat = resolve_pattern(z, act_tol, side);
  const CostData cd = sample_cost(z, sc);
  const Scalar h = z.ctrl.mesh.h();

  // borderline-activity branching, capped at 64 pattern variants
  std::vector<Pattern> patterns{base_pat};
  if (!base_pat.borderline.empty() &&
      base_pat.borderline.size() <= 6) {
    const auto& bl = base_pat.borderline;
    const unsigned combos = 1u << bl.size();
    patterns.clear();
    for (unsigned mask = 0; mask < combos && patterns.size() < 64; ++mask) {
      Pattern p = base_pat;
      for (size_t t = 0; t < bl.size(); ++t) {
        const auto [j, i] = bl[t];
        p.active[static_cast<size_t>(j)][static_cast<size_t>(i)] = (mask >> t) & 1u;
      }
      patterns.push_back(std::move(p));
    }
  }

  CertificateSearch best;
  bool have_best = false;
  for (const auto& pat : patterns) {
    CertificateSearch out;
    CertSystem S = build_system(z, sc, pat, cd, mode);
    const std::set<std::string> none;

    if (mode.fixed) {
      const auto r = lp::solve(to_lp(S, none, Vector::Zero(S.var_count)));
      if (r.status != lp::Status::Optimal) {
        out.conflict = greedy_iis(S);
        out.feasible = false;
      } else {
        DualCertificate cert = extract(S, z, cd, r.z);
        const auto res = residuals_thm52(z, cert, sc, act_tol, side);
        out.feasible = res.nontrivial;
        out.lambda_max = cert.lambda;
        out.degenerate = res.degenerate;
        out.enhanced_nontrivial = res.enhanced_nontrivial;
        out.cert = std::move(cert);
      }
    } else {
      // stage 1: the largest admissible lambda
      Vector obj = Vector::Zero(S.var_count);
      obj(S.v_lambda) = 1.0;
      const auto rmax = lp::solve(to_lp(S, none, obj));
      if (rmax.status != lp::Status::Optimal) {
        out.conflict = greedy_iis(S);
        have_best = true;
        best = out;
        continue;
      }
      out.lambda_max = rmax.z(S.v_lambda);

      // stage 2: the largest achievable endpoint-adjoint component
      Scalar p_end = 0.0;
      for (Index c = 0; c < S.n + S.m; ++c) {
        const Index var = c < S.n ? S.px(S.k, c) : S.pb(S.k, c - S.n);
        for (const Scalar sgn : {1.0, -1.0}) {
          Vector o = Vector::Zero(S.var_count);
          o(var) = sgn;
          const auto r = lp::solve(to_lp(S, none, o));
          if (r.status == lp::Status::Optimal) p_end = std::max(p_end, r.objective);
        }
      }
      out.p_end_max = p_end;

      if (out.lambda_max > 1e-6) {
        DualCertificate cert = extract(S, z, cd, rmax.z);
        normalize(cert, h);
        const auto res = residuals_thm52(z, cert, sc, act_tol, side);
        out.feasible = res.nontrivial;
        out.degenerate = res.degenerate;
        out.enhanced_nontrivial = res.enhanced_nontrivial;
        out.cert = std::move(cert);
      } else {
        // lambda is forced to zero: look for a nontrivial head p_0
        bool found = false;
        std::vector<Index> head_vars;
        for (Index i = 0; i < S.m; ++i) head_vars.push_back(S.pb(0, i));
        if (S.free_u)
          for (Index c = 0; c < S.nm; ++c) head_vars.push_back(S.pu(0, c));
        for (const Index var : head_vars) {
          for (const Scalar sgn : {1.0, -1.0}) {
            Vector o = Vector::Zero(S.var_count);
            o(var) = sgn;
            const auto r = lp::solve(to_lp(S, none, o));
            if (r.status == lp::Status::Optimal && r.objective > 1e-6) {
              DualCertificate cert = extract(S, z, cd, r.z);
              normalize(cert, h);
              const auto res = residuals_thm52(z, cert, sc, act_tol, side);
              out.feasible = res.nontrivial;
              out.degenerate = res.degenerate;
              out.enhanced_nontrivial = res.enhanced_nontrivial;
              out.cert = std::move(cert);
              found = true;
              break;
            }
          }
          if (found) break;
        }
        if (!found) out.conflict = greedy_iis(build_system(z, sc, pat, cd,
                                                           LambdaMode::fixed_mode(1.0)));
      }

      // the candidate fails the enhanced nontriviality requirement outright
      // when every admissible certificate has lambda = 0 and p(T) = 0; the
      // conclusion needs the strict-inactivity precondition at t = 0
      bool strict0 = true;
      for (Index i = 0; i < S.m; ++i)
        if (face_margin(z, 0, i) <= 10 * act_tol) strict0 = false;
      out.not_optimal = strict0 && out.lambda_max <= 1e-6 && out.p_end_max <= 1e-6;
    }

    if (!have_best || (out.feasible && !best.feasible) ||
        (out.feasible && best.feasible && !best.enhanced_nontrivial &&
         out.enhanced_nontrivial)) {
      best = out;
      have_best = true;
    }
    if (best.feasible && best.enhanced_nontrivial) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// continuous checkers
// ---------------------------------------------------------------------------

ContinuousCertificate ContinuousCertificate::scaled(Scalar t) const {
  ContinuousCertificate out = *this;
  out.lambda *= t;
  out.px *= t;
  out.pu *= t;
  out.pb *= t;
  out.qx *= t;
  out.qu *= t;
  out.qb *= t;
  out.gamma_density *= t;
  out.xi_density *= t;
  for (auto& a : out.gamma_atoms) a.mass *= t;
  for (auto& a : out.xi_atoms) a.mass *= t;
  return out;
}

namespace {

int atom_node(const MeasureAtom& a, const Mesh& mesh) {
  const int j = static_cast<int>(std::lround(a.t / mesh.h()));
  if (j < 0 || j > mesh.k || std::abs(mesh.t(j) - a.t) > 1e-9 * std::max(1.0, mesh.T))
    throw BadConfig("measure atoms must sit on grid nodes");
  return j;
}

// integral of f over [t_j, T] against (density, atoms); f sampled per node
Vector measure_integral(const Mesh& mesh, const Matrix& density,
                        const std::vector<MeasureAtom>& atoms, int j,
                        const std::function<Vector(int, Index)>& f) {
  const Index m = density.cols();
  const Index dim = f(0, 0).size();
  Vector out = Vector::Zero(dim);
  for (int l = j; l < mesh.k; ++l)
    for (Index i = 0; i < m; ++i) out += mesh.h() * density(l, i) * f(l, i);
  for (const auto& a : atoms) {
    const int node = atom_node(a, mesh);
    if (node >= j)
      for (Index i = 0; i < m; ++i) out += a.mass(i) * f(node, i);
  }
  return out;
}

CertificateResiduals continuous_residuals(const DiscreteTriple& z,
                                          const ContinuousCertificate& cert, const Scenario& sc,
                                          bool with_u, Scalar act_tol) {
  const Mesh& mesh = z.ctrl.mesh;
  const int k = mesh.k;
  const Scalar h = mesh.h();
  const Index n = z.ctrl.n();
  const Index m = z.ctrl.m();

  if (cert.px.rows() != k + 1 || cert.pb.rows() != k + 1 || cert.gamma_density.rows() != k)
    throw ShapeMismatch("continuous certificate shapes disagree with the grid");
  if (with_u && (cert.pu.rows() != k + 1 || cert.qu.rows() != k + 1))
    throw ShapeMismatch("u blocks missing in the continuous certificate");
  for (const auto& a : cert.gamma_atoms)
    if (a.mass.size() != m) throw BadConfig("gamma atom mass has wrong size");
  for (const auto& a : cert.xi_atoms)
    if (a.mass.size() != m) throw BadConfig("xi atom mass has wrong size");

  const Pattern pat = resolve_pattern(z, act_tol);
  const CostData cd = sample_cost(z, sc);
  CertificateResiduals res;
  auto& map = res.by_name;
  for (const char* name : {"dyn", "compl-eta", "orth", "adj-p", "pin-qb", "q-ident-x",
                           "q-ident-b", "trans-x", "trans-b", "nonatomic-gamma", "selection"})
    map[name] = 0.0;
  if (with_u)
    for (const char* name : {"pin-qu", "q-ident-u", "trans-u", "nonatomic-xi"}) map[name] = 0.0;
  const Scalar lambda = cert.lambda;

  // q reconstruction identity at every node
  for (int j = 0; j <= k; ++j) {
    const auto u_row = [&](int l, Index i) {
      return Vector(z.ctrl.u[static_cast<size_t>(l)].row(i).transpose());
    };
    const Vector Ix = measure_integral(mesh, cert.gamma_density, cert.gamma_atoms, j, u_row);
    bump(map, "q-ident-x", (cert.qx.row(j).transpose() - cert.px.row(j).transpose() + Ix).norm());

    const auto ones = [&](int, Index i) {
      Vector e = Vector::Zero(m);
      e(i) = 1.0;
      return e;
    };
    const Vector Ib = measure_integral(mesh, cert.gamma_density, cert.gamma_atoms, j, ones);
    bump(map, "q-ident-b", (cert.qb.row(j).transpose() - cert.pb.row(j).transpose() - Ib).norm());

    if (with_u) {
      const auto xblock = [&](int l, Index i) {
        Vector v = Vector::Zero(n * m);
        v.segment(i * n, n) = z.state.x.row(l).transpose();
        return v;
      };
      const auto ublock = [&](int l, Index i) {
        Vector v = Vector::Zero(n * m);
        v.segment(i * n, n) = z.ctrl.u[static_cast<size_t>(l)].row(i).transpose();
        return v;
      };
      Vector Iu = measure_integral(mesh, cert.gamma_density, cert.gamma_atoms, j, xblock);
      Iu += 2.0 * measure_integral(mesh, cert.xi_density, cert.xi_atoms, j, ublock);
      bump(map, "q-ident-u",
           (cert.qu.row(j).transpose() - cert.pu.row(j).transpose() + Iu).norm());
    }
  }

  for (int j = 0; j < k; ++j) {
    const Matrix& Uj = z.ctrl.u[static_cast<size_t>(j)];
    // dyn and compl-eta on the certificate's eta
    {
      Vector resid = (z.state.x.row(j + 1) - z.state.x.row(j)).transpose() / h;
      resid += Uj.transpose() * cert.eta.row(j).transpose();
      bump(map, "dyn", resid.norm());
    }
    for (Index i = 0; i < m; ++i) {
      bump(map, "compl-eta", std::max(0.0, -cert.eta(j, i)));
      if (!pat.active[static_cast<size_t>(j)][static_cast<size_t>(i)])
        bump(map, "compl-eta", cert.eta(j, i));
    }
    // orth with the interval value of q^x (left limit at the right node)
    const Vector sx = lambda * cert.vx.row(j).transpose() - cert.qx.row(j + 1).transpose();
    for (Index i = 0; i < m; ++i) {
      if (cert.eta(j, i) > act_tol) bump(map, "orth", Uj.row(i).dot(sx));
    }
    // adjoint dynamics of p
    {
      Vector rx = (cert.px.row(j + 1) - cert.px.row(j)).transpose() / h -
                  lambda * cd.wx[static_cast<size_t>(j)];
      bump(map, "adj-p", rx.norm());
      Vector rb = (cert.pb.row(j + 1) - cert.pb.row(j)).transpose() / h -
                  lambda * cd.wb[static_cast<size_t>(j)];
      bump(map, "adj-p", rb.norm());
      if (with_u) {
        for (Index i = 0; i < m; ++i) {
          Vector ru = (cert.pu.row(j + 1).segment(i * n, n) -
                       cert.pu.row(j).segment(i * n, n)).transpose() / h;
          ru += cert.eta(j, i) * sx;  // [-eta, lambda v^x - q^x] block
          bump(map, "adj-p", ru.norm());
        }
      }
    }
    // velocity pins of q
    for (Index i = 0; i < m; ++i) {
      bump(map, "pin-qb",
           range_dist(cert.qb(j + 1, i), cd.vb[static_cast<size_t>(j)][static_cast<size_t>(i)],
                      lambda));
    }
    if (with_u) {
      Vector ru = cert.qu.row(j + 1).transpose() - lambda * cd.vu[static_cast<size_t>(j)];
      bump(map, "pin-qu", ru.norm());
    }
    for (Index c = 0; c < n; ++c)
      bump(map, "selection",
           range_dist(lambda * cert.vx(j, c), cd.vx[static_cast<size_t>(j)][static_cast<size_t>(c)],
                      lambda));
  }

  // transversality
  {
    const Matrix& Uk = z.ctrl.u[static_cast<size_t>(k)];
    const Vector xk = z.state.x.row(k).transpose();
    Vector rx = cert.px.row(k).transpose() + lambda * sc.cost.terminal.gradient(xk);
    rx += Uk.transpose() * cert.pb.row(k).transpose();
    bump(map, "trans-x", rx.norm());
    for (Index i = 0; i < m; ++i) {
      bump(map, "trans-b", std::max(0.0, -cert.pb(k, i)));
      if (!pat.active[static_cast<size_t>(k)][static_cast<size_t>(i)])
        bump(map, "trans-b", cert.pb(k, i));
    }
    if (with_u) {
      for (Index i = 0; i < m; ++i) {
        const Vector g = cert.pu.row(k).segment(i * n, n).transpose() + cert.pb(k, i) * xk;
        const Vector ui = Uk.row(i).transpose();
        const Scalar unorm2 = ui.squaredNorm();
        const Vector proj = unorm2 > 0 ? Vector(g - (g.dot(ui) / unorm2) * ui) : g;
        bump(map, "trans-u", proj.norm());
      }
    }
  }

  // measure nonatomicity over 2h windows of strictly inactive times
  const auto window_mass = [&](const Matrix& density, const std::vector<MeasureAtom>& atoms,
                               int j) {
    const Scalar lo = mesh.t(j) - 2 * h, hi = mesh.t(j) + 2 * h;
    Scalar mass = 0.0;
    for (int l = 0; l < k; ++l) {
      if (mesh.t(l + 1) < lo || mesh.t(l) > hi) continue;
      mass += h * density.row(l).cwiseAbs().sum();
    }
    for (const auto& a : atoms)
      if (a.t >= lo - 1e-12 && a.t <= hi + 1e-12) mass += a.mass.cwiseAbs().sum();
    return mass;
  };
  for (int j = 0; j <= k; ++j) {
    bool strictly_inactive = true;
    for (Index i = 0; i < m; ++i)
      if (face_margin(z, j, i) <= act_tol) strictly_inactive = false;
    if (strictly_inactive)
      bump(map, "nonatomic-gamma", window_mass(cert.gamma_density, cert.gamma_atoms, j));
  }
  if (with_u) {
    const auto [j_lo, j_hi] = index_tau(mesh, z.ctrl.tau);
    for (int j = 0; j <= k; ++j) {
      if (j >= j_lo && j <= j_hi) continue;  // only the relaxed endpoint ranges
      bool interior = true;
      for (Index i = 0; i < m; ++i) {
        const Scalar nrm = z.ctrl.u[static_cast<size_t>(j)].row(i).norm();
        if (nrm <= 0.5 + 1e-9 || nrm >= 1.5 - 1e-9) interior = false;
      }
      if (interior) bump(map, "nonatomic-xi", window_mass(cert.xi_density, cert.xi_atoms, j));
    }
  }

  for (const auto& [name, v] : map) res.max_residual = std::max(res.max_residual, v);

  const Scalar q0 = cert.qx.row(0).norm() + cert.qb.row(0).norm() +
                    (with_u ? cert.qu.row(0).norm() : 0.0);
  const Scalar pT = cert.px.row(k).norm() + cert.pb.row(k).norm() +
                    (with_u ? cert.pu.row(k).norm() : 0.0);
  res.nontrivial_magnitude = lambda + q0 + pT;
  res.nontrivial = res.nontrivial_magnitude > 1e-9;
  res.enhanced_nontrivial = lambda + pT > 1e-9;

  // degenerate pattern: lambda = 0, p identically zero, measures vanish except
  // for mass sitting at t = 0
  Scalar pall = 0.0;
  for (int j = 0; j <= k; ++j)
    pall = std::max(pall, cert.px.row(j).norm() + cert.pb.row(j).norm() +
                              (with_u ? cert.pu.row(j).norm() : 0.0));
  Scalar mass0 = 0.0, interior_mass = 0.0;
  interior_mass += h * cert.gamma_density.cwiseAbs().sum() + h * cert.xi_density.cwiseAbs().sum();
  for (const auto& a : cert.gamma_atoms)
    (atom_node(a, mesh) == 0 ? mass0 : interior_mass) += a.mass.cwiseAbs().sum();
  for (const auto& a : cert.xi_atoms)
    (atom_node(a, mesh) == 0 ? mass0 : interior_mass) += a.mass.cwiseAbs().sum();
  res.degenerate = lambda <= 1e-9 && pall <= 1e-8 && mass0 > 1e-9 &&
                   interior_mass <= 1e-7 * std::max(1.0, mass0);
  return res;
}

}  // namespace

CertificateResiduals residuals_thm61(const DiscreteTriple& z, const ContinuousCertificate& cert,
                                     const Scenario& sc, Scalar act_tol) {
  return continuous_residuals(z, cert, sc, true, act_tol);
}

CertificateResiduals residuals_thm63(const DiscreteTriple& z, const ContinuousCertificate& cert,
                                     const Scenario& sc, Scalar act_tol) {
  if (sc.mode != ControlMode::FixedU)
    throw BadConfig("fixed-normals conditions need a fixed-u scenario");
  return continuous_residuals(z, cert, sc, false, act_tol);
}

}  // namespace sweep
