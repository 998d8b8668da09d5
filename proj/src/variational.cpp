#include "sweep/variational.hpp"

#include "sweep/lp.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

std::vector<int> CoderivQuery::active() const {
  std::vector<int> idx;
  for (Index i = 0; i < m(); ++i)
    if (std::abs(Abar.row(i).dot(xbar) - bbar(i)) <= tol) idx.push_back(static_cast<int>(i));
  return idx;
}

void CoderivQuery::validate() const {
  if (Abar.rows() != m() || Abar.cols() != n() || vbar.size() != n() || u.size() != n())
    throw ShapeMismatch("coderivative query dimensions disagree");
  const Vector g = Abar * xbar - bbar;
  if (m() > 0 && g.maxCoeff() > tol) throw InfeasiblePoint(g.maxCoeff());
  // vbar in F = -N(x;C): -vbar must decompose over the active rows
  MovingPolyhedron P{Abar, bbar};
  const auto d = normal_cone_coeffs(xbar, P, -vbar, tol);
  if (!d.member) throw NoMultiplier();
}

OrthantCoderiv dstar_orthant(const Vector& alpha, const Vector& beta, const Vector& gamma,
                             Scalar tol) {
  const Index m = alpha.size();
  if (beta.size() != m || gamma.size() != m) throw ShapeMismatch("orthant argument sizes");
  for (Index i = 0; i < m; ++i) {
    if (alpha(i) > tol || beta(i) < -tol || std::abs(alpha(i) * beta(i)) > tol)
      throw NotInGraph();
  }
  OrthantCoderiv out;
  for (Index i = 0; i < m; ++i) {
    if (std::abs(beta(i)) > tol && std::abs(gamma(i)) > tol) {
      out.empty = true;
      out.sign.clear();
      return out;
    }
  }
  out.sign.resize(static_cast<size_t>(m), QSign::Free);
  for (Index i = 0; i < m; ++i) {
    const bool corner = std::abs(alpha(i)) <= tol && std::abs(beta(i)) <= tol;
    if (alpha(i) < -tol || (corner && gamma(i) < -tol)) {
      out.sign[static_cast<size_t>(i)] = QSign::Zero;
    } else if (corner && gamma(i) > tol) {
      out.sign[static_cast<size_t>(i)] = QSign::NonNeg;
    }
  }
  return out;
}

namespace {

// Indices the orthogonality filter allows to carry positive multipliers.
std::vector<int> filtered_support(const CoderivQuery& q) {
  std::vector<int> allowed;
  for (int i : q.active())
    if (std::abs(q.Abar.row(i).dot(q.u)) <= q.tol) allowed.push_back(i);
  return allowed;
}

// Solve A_S^T p_S = -vbar over a support subset, least squares.
bool support_solution(const CoderivQuery& q, const std::vector<int>& S, Vector& pS,
                      Scalar* resid = nullptr) {
  Matrix M(q.n(), static_cast<Index>(S.size()));
  for (size_t k = 0; k < S.size(); ++k) M.col(static_cast<Index>(k)) = q.Abar.row(S[k]).transpose();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  pS = cod.solve(-q.vbar);
  const Scalar r = (M * pS + q.vbar).norm();
  if (resid) *resid = r;
  return r <= 1e-9 * std::max(1.0, q.vbar.norm());
}

void push_unique(std::vector<Vector>& list, const Vector& v, Scalar tol = 1e-9) {
  for (const auto& w : list)
    if ((w - v).norm() <= tol * std::max(1.0, v.norm())) return;
  list.push_back(v);
}

}  // namespace

PSet pset(const CoderivQuery& q) {
  q.validate();
  PSet out;
  const std::vector<int> act = q.active();

  // feasibility of the unfiltered multiplier system decides NoMultiplier
  {
    MovingPolyhedron P{q.Abar, q.bbar};
    if (!normal_cone_coeffs(q.xbar, P, -q.vbar, q.tol).member) throw NoMultiplier();
  }

  const std::vector<int> allowed = filtered_support(q);

  if (check_licq(q.xbar, MovingPolyhedron{q.Abar, q.bbar}, q.tol)) {
    out.unique = true;
    Vector pS;
    if (!act.empty() && support_solution(q, act, pS)) {
      // LICQ: the multiplier over the active rows is the unique one
      Vector p = Vector::Zero(q.m());
      bool sign_ok = true;
      for (size_t k = 0; k < act.size(); ++k) {
        if (pS(static_cast<Index>(k)) < -1e-9) sign_ok = false;
        p(act[k]) = std::max(0.0, pS(static_cast<Index>(k)));
      }
      if (!sign_ok) throw NoMultiplier();
      for (Index i = 0; i < q.m(); ++i) {
        const bool ok = std::abs(q.Abar.row(i).dot(q.u)) <= q.tol;
        if (p(i) > 1e-9 && !ok) {
          out.empty = true;  // orthogonality fails at the unique multiplier
          return out;
        }
      }
      out.vertices.push_back(p);
    } else if (q.vbar.norm() <= 1e-12) {
      out.vertices.push_back(Vector::Zero(q.m()));
    } else {
      throw NoMultiplier();
    }
    return out;
  }

  // general case: vertices of {p >= 0 on allowed, 0 elsewhere, A^T p = -vbar}
  // via basic solutions over support subsets
  const int a = static_cast<int>(allowed.size());
  for (unsigned mask = 0; mask < (1u << a); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < a; ++i)
      if (mask & (1u << i)) S.push_back(allowed[static_cast<size_t>(i)]);
    if (static_cast<Index>(S.size()) > q.n()) continue;
    Vector pS;
    if (mask == 0) {
      if (q.vbar.norm() <= 1e-12) push_unique(out.vertices, Vector::Zero(q.m()));
      continue;
    }
    if (!support_solution(q, S, pS)) continue;
    if (pS.minCoeff() < -1e-9) continue;
    Vector p = Vector::Zero(q.m());
    for (size_t k = 0; k < S.size(); ++k) p(S[k]) = std::max(0.0, pS(static_cast<Index>(k)));
    push_unique(out.vertices, p);
  }
  // recession generators: normalized nonnegative null combinations
  for (unsigned mask = 1; mask < (1u << a); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < a; ++i)
      if (mask & (1u << i)) S.push_back(allowed[static_cast<size_t>(i)]);
    Matrix M(q.n(), static_cast<Index>(S.size()));
    for (size_t k = 0; k < S.size(); ++k) M.col(static_cast<Index>(k)) = q.Abar.row(S[k]).transpose();
    Eigen::FullPivLU<Matrix> lu(M);
    const Matrix null = lu.kernel();
    if (null.cols() == 0 || (null.cols() == 1 && null.norm() < 1e-12)) continue;
    for (Index c = 0; c < null.cols(); ++c) {
      Vector dir = null.col(c);
      if (dir.norm() < 1e-12) continue;
      if (dir.maxCoeff() <= 1e-12) dir = -dir;
      if (dir.minCoeff() < -1e-9) continue;  // not a nonnegative ray
      Vector r = Vector::Zero(q.m());
      for (size_t k = 0; k < S.size(); ++k) r(S[k]) = dir(static_cast<Index>(k));
      r /= r.norm();
      push_unique(out.rays, r);
    }
  }
  out.empty = out.vertices.empty();
  return out;
}

std::vector<QSign> qset(const Vector& p, const CoderivQuery& q) {
  std::vector<QSign> sign(static_cast<size_t>(q.m()), QSign::Zero);
  const std::vector<int> act = q.active();
  for (int i : act) {
    const Scalar au = q.Abar.row(i).dot(q.u);
    if (std::abs(au) <= q.tol) {
      sign[static_cast<size_t>(i)] = QSign::Free;
    } else if (au < 0 && p(i) <= q.tol) {
      sign[static_cast<size_t>(i)] = QSign::NonNeg;
    } else {
      // active with au > 0 forces p_i = 0 (orthogonality) and q_i = 0
      sign[static_cast<size_t>(i)] = QSign::Zero;
    }
  }
  return sign;
}

Vector CoderivPiece::Covector::flat() const {
  Vector out(wx.size() + wA.size() + wb.size());
  out.head(wx.size()) = wx;
  Index at = wx.size();
  for (Index i = 0; i < wA.rows(); ++i) {
    out.segment(at, wA.cols()) = wA.row(i).transpose();
    at += wA.cols();
  }
  out.tail(wb.size()) = wb;
  return out;
}

CoderivPiece::Covector CoderivPiece::apply(const Vector& q) const {
  Covector w;
  w.wx = Abar.transpose() * q;
  w.wA.resize(Abar.rows(), Abar.cols());
  for (Index i = 0; i < Abar.rows(); ++i)
    w.wA.row(i) = (q(i) * xbar - p(i) * u).transpose();
  w.wb = -q;
  return w;
}

Coderivative dstar_F(const CoderivQuery& q) {
  q.validate();
  MovingPolyhedron P{q.Abar, q.bbar};
  if (!check_plicq(q.xbar, P, q.tol))
    throw QualificationFailure("PLICQ fails at the base point");

  Coderivative out;
  out.exact = check_licq(q.xbar, P, q.tol);
  const PSet ps = pset(q);
  if (ps.empty) {
    out.empty = true;
    return out;
  }
  for (const auto& p : ps.vertices) {
    CoderivPiece piece;
    piece.p = p;
    piece.qsign = qset(p, q);
    piece.Abar = q.Abar;
    piece.xbar = q.xbar;
    piece.u = q.u;
    out.pieces.push_back(std::move(piece));
  }
  return out;
}

bool coderiv_member(const Coderivative& cod, const CoderivQuery& q,
                    const CoderivPiece::Covector& w, Scalar tol) {
  if (cod.empty || cod.pieces.empty()) return false;
  const Scalar scale = std::max(1.0, w.norm());

  // q is pinned by the b-slot of the covector
  const Vector qv = -w.wb;
  const auto& sign = cod.pieces.front().qsign;  // pattern is p-independent
  for (Index i = 0; i < q.m(); ++i) {
    switch (sign[static_cast<size_t>(i)]) {
      case QSign::Zero:
        if (std::abs(qv(i)) > tol * scale) return false;
        break;
      case QSign::NonNeg:
        if (qv(i) < -tol * scale) return false;
        break;
      case QSign::Free:
        break;
    }
  }
  if ((q.Abar.transpose() * qv - w.wx).norm() > tol * scale) return false;

  // existence of p in the filtered multiplier set with
  // p_i u = q_i xbar - w_{A,i} for every face
  const std::vector<int> allowed = filtered_support(q);
  std::vector<bool> ok(static_cast<size_t>(q.m()), false);
  for (int i : allowed) ok[static_cast<size_t>(i)] = true;
  // faces that cannot carry p must already match with p_i = 0
  for (Index i = 0; i < q.m(); ++i) {
    if (!ok[static_cast<size_t>(i)]) {
      const Vector need = qv(i) * q.xbar - w.wA.row(i).transpose();
      if (need.norm() > tol * scale) return false;
    }
  }
  lp::Problem prob = lp::Problem::sized(q.n() + static_cast<Index>(allowed.size()) * q.n(),
                                        static_cast<Index>(allowed.size()));
  // A^T p = -vbar
  for (Index r = 0; r < q.n(); ++r) {
    for (size_t k = 0; k < allowed.size(); ++k)
      prob.A(r, static_cast<Index>(k)) = q.Abar(allowed[k], r);
    prob.b(r) = -q.vbar(r);
    prob.rel[static_cast<size_t>(r)] = '=';
  }
  // p_i u = q_i xbar - w_{A,i}
  Index row = q.n();
  for (size_t k = 0; k < allowed.size(); ++k) {
    const int i = allowed[k];
    const Vector rhs = qv(i) * q.xbar - w.wA.row(i).transpose();
    for (Index r = 0; r < q.n(); ++r) {
      prob.A(row, static_cast<Index>(k)) = q.u(r);
      prob.b(row) = rhs(r);
      prob.rel[static_cast<size_t>(row)] = '=';
      ++row;
    }
  }
  prob.lo.setZero();
  const auto r = lp::solve(prob, 1e-9 * scale);
  return r.status == lp::Status::Optimal;
}

}  // namespace sweep
