#include "sweep/oracle.hpp"

#include "sweep/lp.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

namespace {

// A pattern assigns each active face a local state along the stratum:
// pushing (active, multiplier > 0), boundary contact (active, multiplier 0),
// or locally inactive. Nearby points of the graph refine boundary faces into
// any of the three states; pushing and inactive faces keep their state.
enum class FaceState { Push, Boundary, Inactive };

struct LocalFrame {
  // variable layout inside the tangent LPs:
  // dx (n) | dA rows for active faces (a*n) | db for active faces (a) |
  // dv (n) | deta (one per pushing face of the branch)
  std::vector<int> active;
  Index n = 0;
};

// s_i(d) = A_i dx + dA_i xbar - db_i, gradients frozen at the base point.
void add_activity_row(lp::Problem& prob, Index row, const LocalFrame& fr,
                      const CoderivQuery& q, int face_pos) {
  const int i = fr.active[static_cast<size_t>(face_pos)];
  const Index n = fr.n;
  for (Index c = 0; c < n; ++c) prob.A(row, c) = q.Abar(i, c);
  const Index dA_at = n + static_cast<Index>(face_pos) * n;
  for (Index c = 0; c < n; ++c) prob.A(row, dA_at + c) = q.xbar(c);
  const Index db_at = n + static_cast<Index>(fr.active.size()) * n + static_cast<Index>(face_pos);
  prob.A(row, db_at) = -1.0;
}

// One branch cone adjoining the stratum: boundary faces are refined into the
// given states. Faces that are inactive at the stratum level are locally
// strictly inactive, so they put no row into the tangent cone at all; a
// boundary face refined to inactive contributes the one-sided row instead.
// Returns false when the probe pairing can be made positive (probe not in
// this branch's polar).
bool polar_pass(const CoderivQuery& q, const LocalFrame& fr,
                const std::vector<FaceState>& stratum, const std::vector<FaceState>& branch,
                const Vector& anchor_eta, const CoderivPiece::Covector& probe, Scalar tol) {
  const Index n = fr.n;
  const Index a = static_cast<Index>(fr.active.size());
  std::vector<int> push_pos;      // positions with a deta variable
  std::vector<bool> push_signed;  // true when deta >= 0 (anchor at zero)
  for (size_t k = 0; k < fr.active.size(); ++k) {
    if (branch[k] == FaceState::Push) {
      push_pos.push_back(static_cast<int>(k));
      // multipliers strictly positive along the stratum move both ways; a
      // boundary face lifted to pushing can only grow from zero
      push_signed.push_back(stratum[k] == FaceState::Boundary);
    }
  }
  const Index nd = n + a * n + a + n + static_cast<Index>(push_pos.size());

  Index face_rows = 0;
  for (size_t k = 0; k < branch.size(); ++k)
    if (!(stratum[k] == FaceState::Inactive)) ++face_rows;
  lp::Problem prob = lp::Problem::sized(static_cast<Index>(face_rows) + n, nd);

  Index row = 0;
  for (size_t k = 0; k < branch.size(); ++k) {
    if (stratum[k] == FaceState::Inactive) continue;  // strictly inactive nearby
    add_activity_row(prob, row, fr, q, static_cast<int>(k));
    prob.rel[static_cast<size_t>(row)] = branch[k] == FaceState::Inactive ? '<' : '=';
    prob.b(row) = 0.0;
    ++row;
  }
  // dv + sum_push (anchor_eta_k dA_k + deta_k A_k) = 0
  const Index dv_at = n + a * n + a;
  const Index deta_at = dv_at + n;
  for (Index r = 0; r < n; ++r) {
    prob.A(row, dv_at + r) = 1.0;
    for (size_t pk = 0; pk < push_pos.size(); ++pk) {
      const int pos = push_pos[pk];
      const int i = fr.active[static_cast<size_t>(pos)];
      const Index dA_at = n + static_cast<Index>(pos) * n;
      prob.A(row, dA_at + r) += anchor_eta(pos);
      prob.A(row, deta_at + static_cast<Index>(pk)) += q.Abar(i, r);
    }
    prob.rel[static_cast<size_t>(row)] = '=';
    prob.b(row) = 0.0;
    ++row;
  }
  for (size_t pk = 0; pk < push_pos.size(); ++pk)
    if (push_signed[pk]) prob.lo(deta_at + static_cast<Index>(pk)) = 0.0;

  // objective: the probe pairing <(w, -u), d>, maximized over the cone
  // intersected with a unit box
  prob.c.setZero();
  for (Index c = 0; c < n; ++c) prob.c(c) = probe.wx(c);
  for (size_t k = 0; k < fr.active.size(); ++k) {
    const int i = fr.active[k];
    const Index dA_at = n + static_cast<Index>(k) * n;
    for (Index c = 0; c < n; ++c) prob.c(dA_at + c) = probe.wA(i, c);
    prob.c(n + a * n + static_cast<Index>(k)) = probe.wb(i);
  }
  for (Index c = 0; c < n; ++c) prob.c(dv_at + c) = -q.u(c);

  for (Index j = 0; j < nd; ++j) {
    prob.lo(j) = std::max(prob.lo(j), -1.0);
    prob.hi(j) = 1.0;
  }
  const auto r = lp::solve(prob);
  if (r.status != lp::Status::Optimal) return false;  // numerically dead branch
  return r.objective <= tol;
}

// Anchor multipliers for the pushing set compatible with the probe: eta >= 0
// supported on the pushing faces, A^T eta = -vbar, and for every pushing face
// eta_k u = q_k xbar - w_{A,k} (the dA-pairing a conormal covector must meet).
bool solve_anchor(const CoderivQuery& q, const LocalFrame& fr, const std::vector<int>& push_pos,
                  const CoderivPiece::Covector& probe, Scalar tol, Vector& anchor) {
  const Index n = fr.n;
  const Index np = static_cast<Index>(push_pos.size());
  anchor = Vector::Zero(static_cast<Index>(fr.active.size()));
  const Vector qv = -probe.wb;

  lp::Problem prob = lp::Problem::sized(n + np * n, np);
  for (Index r = 0; r < n; ++r) {
    for (Index k = 0; k < np; ++k) {
      const int i = fr.active[static_cast<size_t>(push_pos[static_cast<size_t>(k)])];
      prob.A(r, k) = q.Abar(i, r);
    }
    prob.b(r) = -q.vbar(r);
    prob.rel[static_cast<size_t>(r)] = '=';
  }
  Index row = n;
  for (Index k = 0; k < np; ++k) {
    const int i = fr.active[static_cast<size_t>(push_pos[static_cast<size_t>(k)])];
    const Vector rhs = qv(i) * q.xbar - probe.wA.row(i).transpose();
    for (Index r = 0; r < n; ++r) {
      prob.A(row, k) = q.u(r);
      prob.b(row) = rhs(r);
      prob.rel[static_cast<size_t>(row)] = '=';
      ++row;
    }
  }
  prob.lo.setZero();
  const auto res = lp::solve(prob, tol);
  if (res.status != lp::Status::Optimal) return false;
  for (Index k = 0; k < np; ++k)
    anchor(push_pos[static_cast<size_t>(k)]) = std::max(0.0, res.z(k));
  return true;
}

}  // namespace

bool oracle_graph_normals(const CoderivQuery& q, const CoderivPiece::Covector& probe,
                          Scalar tol) {
  if (q.n() > 3 || q.m() > 3) throw DimensionTooLarge();
  q.validate();
  const Scalar scale = std::max(1.0, probe.norm());
  const Scalar ptol = tol * scale;

  LocalFrame fr;
  fr.active = q.active();
  fr.n = q.n();

  // faces inactive at the base never constrain nearby graph points, so a
  // normal has no components there
  for (Index i = 0; i < q.m(); ++i) {
    if (std::find(fr.active.begin(), fr.active.end(), static_cast<int>(i)) != fr.active.end())
      continue;
    if (probe.wA.row(i).norm() > ptol || std::abs(probe.wb(i)) > ptol) return false;
  }

  const int a = static_cast<int>(fr.active.size());
  std::vector<FaceState> assign(static_cast<size_t>(a));
  // enumerate all pushing/boundary/inactive assignments of the active faces
  const int total = static_cast<int>(std::pow(3, a));
  for (int code = 0; code < total; ++code) {
    int c = code;
    std::vector<int> push_pos;
    for (int k = 0; k < a; ++k) {
      assign[static_cast<size_t>(k)] = static_cast<FaceState>(c % 3);
      if (assign[static_cast<size_t>(k)] == FaceState::Push) push_pos.push_back(k);
      c /= 3;
    }
    // the stratum must reach the base point: the pushing cone has to carry
    // -vbar, and pushing faces must stay orthogonal to u for the pairing
    Vector anchor;
    if (!solve_anchor(q, fr, push_pos, probe, 1e-9 * scale, anchor)) continue;

    // tangent of the whole graph at a stratum-generic point: union over
    // refinements of the boundary faces; the polar is the intersection
    std::vector<int> boundary_pos;
    for (int k = 0; k < a; ++k)
      if (assign[static_cast<size_t>(k)] == FaceState::Boundary) boundary_pos.push_back(k);
    const int refinements = static_cast<int>(std::pow(3, boundary_pos.size()));
    bool pass = true;
    for (int rc = 0; rc < refinements && pass; ++rc) {
      std::vector<FaceState> branch = assign;
      int r = rc;
      for (int bp : boundary_pos) {
        branch[static_cast<size_t>(bp)] = static_cast<FaceState>(r % 3);
        r /= 3;
      }
      pass = polar_pass(q, fr, assign, branch, anchor, probe, ptol);
    }
    if (pass) return true;
  }
  return false;
}

}  // namespace sweep
