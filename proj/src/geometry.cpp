#include "sweep/geometry.hpp"

#include "sweep/lp.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sweep {

MovingPolyhedron::MovingPolyhedron(Matrix U_, Vector b_, bool unit_rows)
    : n(U_.cols()), m(U_.rows()), U(std::move(U_)), b(std::move(b_)) {
  if (b.size() != m) throw ShapeMismatch("offset count must match row count");
  if (!U.allFinite() || !b.allFinite()) throw BadConfig("polyhedron data must be finite");
  if (unit_rows) {
    for (Index i = 0; i < m; ++i) {
      if (std::abs(U.row(i).norm() - 1.0) > 1e-12)
        throw BadConfig("unit_rows set but row " + std::to_string(i) + " is not unit");
    }
  }
}

bool ActiveSet::contains(int i) const {
  return std::find(indices.begin(), indices.end(), i) != indices.end();
}

ActiveSet active_set(const Vector& x, const MovingPolyhedron& P, Scalar tol) {
  if (!x.allFinite()) throw BadConfig("query point must be finite");
  if (tol < 0) throw BadConfig("activity tolerance must be nonnegative");
  const Vector g = P.U * x - P.b;
  const Scalar worst = P.m > 0 ? g.maxCoeff() : 0.0;
  if (worst > tol) throw InfeasiblePoint(worst);
  ActiveSet out;
  out.tol = tol;
  for (Index i = 0; i < P.m; ++i)
    if (std::abs(g(i)) <= tol) out.indices.push_back(static_cast<int>(i));
  return out;
}

namespace {

struct MarginPoint {
  Vector x;
  Scalar margin;
};

// Feasible start: max-margin LP over x, margin capped at 1. The variable box
// around y grows until the intersection is nonempty; emptiness is certified
// by a Farkas ray once the largest box still fails.
MarginPoint max_margin_point(const MovingPolyhedron& P, const Vector& y) {
  const Scalar scale = 1.0 + y.cwiseAbs().maxCoeff() +
                       (P.m > 0 ? P.b.cwiseAbs().maxCoeff() : 0.0);
  for (const Scalar radius : {10.0 * scale, 1e3 * scale, 1e6 * scale}) {
    lp::Problem prob = lp::Problem::sized(P.m, P.n + 1);
    for (Index i = 0; i < P.m; ++i) {
      prob.A.block(i, 0, 1, P.n) = P.U.row(i);
      prob.A(i, P.n) = 1.0;
      prob.b(i) = P.b(i);
    }
    prob.c(P.n) = 1.0;
    prob.lo.head(P.n) = y.array() - radius;
    prob.hi.head(P.n) = y.array() + radius;
    prob.lo(P.n) = -2.0 * radius;
    prob.hi(P.n) = 1.0;
    auto r = lp::solve(prob);
    if (r.status == lp::Status::Optimal && r.z(P.n) >= -1e-9)
      return {r.z.head(P.n), r.z(P.n)};
  }
  const Vector ray = lp::farkas_ray(P.U, P.b);
  if (ray.cwiseAbs().maxCoeff() > 0) throw EmptySetError(ray);
  throw std::runtime_error("max-margin LP failed without an infeasibility certificate");
}

// Projection of y onto the affine set {U_S z = b_S}, with multipliers for
// y - z = U_S^T eta. Solved fresh from y so iteration drift cannot
// accumulate into the KKT residuals.
struct EqualityProjection {
  Vector z;
  Vector eta;      // one entry per row of S
  Scalar eq_resid; // ||U_S z - b_S||, nonzero when the system is inconsistent
};

EqualityProjection project_eq(const Vector& y, const Matrix& US, const Vector& bS) {
  EqualityProjection out;
  if (US.rows() == 0) {
    out.z = y;
    out.eta = Vector(0);
    out.eq_resid = 0.0;
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(US);
  out.z = y - cod.pseudoInverse() * (US * y - bS);
  Eigen::CompleteOrthogonalDecomposition<Matrix> codT(Matrix(US.transpose()));
  out.eta = codT.solve(y - out.z);
  out.eq_resid = (US * out.z - bS).norm();
  return out;
}

// Exhaustive working-set search; correct for any m but exponential, so kept
// as the fallback when the active-set iteration hits its cap.
bool project_exhaustive(const Vector& y, const MovingPolyhedron& P, Projection& out) {
  const Scalar feas_tol = 1e-9 * std::max(1.0, y.norm());
  const int m = static_cast<int>(P.m);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  bool found = false;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) S.push_back(i);
    Matrix US(S.size(), P.n);
    Vector bS(S.size());
    for (size_t k = 0; k < S.size(); ++k) {
      US.row(static_cast<Index>(k)) = P.U.row(S[k]);
      bS(static_cast<Index>(k)) = P.b(S[k]);
    }
    const auto ep = project_eq(y, US, bS);
    if (ep.eq_resid > feas_tol) continue;
    if (!S.empty() && ep.eta.minCoeff() < -1e-10) continue;
    if (P.m > 0 && (P.U * ep.z - P.b).maxCoeff() > feas_tol) continue;
    const Scalar d = (ep.z - y).norm();
    if (d < best - 1e-12) {
      best = d;
      out.point = ep.z;
      out.coeffs.eta = Vector::Zero(P.m);
      for (size_t k = 0; k < S.size(); ++k)
        out.coeffs.eta(S[k]) = std::max(0.0, ep.eta(static_cast<Index>(k)));
      found = true;
    }
  }
  return found;
}

}  // namespace

namespace {

// Exhaustive KKT search over working subsets; any subset whose equality
// projection is feasible with nonnegative multipliers is the projection.
// Cheap for the m <= 4 hot path of the integrator.
bool project_small(const Vector& y, const Matrix& U, const Vector& b, Projection& out) {
  const Index m = U.rows();
  const Index n = U.cols();
  const Scalar scale = std::max(1.0, y.norm());
  const Scalar feas_tol = 1e-11 * scale;

  Matrix G(m, m);  // Gram matrix of the rows
  const Matrix Ut = U.transpose();
  G.noalias() = U * Ut;
  const Vector g = U * y - b;  // violations

  int best_size = -1;
  Scalar best_dist = std::numeric_limits<Scalar>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    Index sz = 0;
    int idx[8];
    for (Index i = 0; i < m; ++i)
      if (mask & (1u << i)) idx[sz++] = static_cast<int>(i);
    if (sz > n) continue;

    Vector etaS(sz);
    if (sz > 0) {
      Matrix GS(sz, sz);
      Vector gS(sz);
      for (Index r = 0; r < sz; ++r) {
        gS(r) = g(idx[r]);
        for (Index c = 0; c < sz; ++c) GS(r, c) = G(idx[r], idx[c]);
      }
      // solve GS eta = gS; reject near-singular subsets
      Eigen::PartialPivLU<Matrix> lu(GS);
      etaS = lu.solve(gS);
      if ((GS * etaS - gS).norm() > 1e-9 * scale) continue;
      if (etaS.minCoeff() < -1e-11) continue;
    }
    Vector z = y;
    for (Index r = 0; r < sz; ++r) z -= etaS(r) * Ut.col(idx[r]);
    bool feasible = true;
    for (Index i = 0; i < m; ++i) {
      if (U.row(i).dot(z) - b(i) > feas_tol) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const Scalar dist = (z - y).norm();
    if (dist < best_dist - 1e-12) {
      best_dist = dist;
      best_size = static_cast<int>(sz);
      out.point = z;
      out.coeffs.eta = Vector::Zero(m);
      for (Index r = 0; r < sz; ++r) out.coeffs.eta(idx[r]) = std::max(0.0, etaS(r));
    }
  }
  return best_size >= 0;
}

}  // namespace

Projection project(const Vector& y, const MovingPolyhedron& P) {
  Projection out;
  out.coeffs.eta = Vector::Zero(P.m);
  if (P.m == 0) {
    out.point = y;
    return out;
  }
  if (P.m == 1) {  // single face: closed form
    const Scalar g = P.U.row(0).dot(y) - P.b(0);
    if (g <= 0.0) {
      out.point = y;
      return out;
    }
    const Scalar nn = P.U.row(0).squaredNorm();
    out.coeffs.eta(0) = g / nn;
    out.point = y - out.coeffs.eta(0) * P.U.row(0).transpose();
    return out;
  }
  if ((P.U * y - P.b).maxCoeff() <= 0.0) {  // feasible input, exact idempotence
    out.point = y;
    return out;
  }
  if (P.m <= 4 && project_small(y, P.U, P.b, out)) return out;

  Vector x = max_margin_point(P, y).x;
  const Scalar scale = std::max(1.0, y.norm());
  const Scalar on_tol = 1e-9 * scale;
  std::vector<int> W;
  {
    const Vector g = P.U * x - P.b;
    for (Index i = 0; i < P.m; ++i)
      if (g(i) > -on_tol) W.push_back(static_cast<int>(i));
  }

  const auto gather = [&](const std::vector<int>& S, Matrix& US, Vector& bS) {
    US.resize(static_cast<Index>(S.size()), P.n);
    bS.resize(static_cast<Index>(S.size()));
    for (size_t k = 0; k < S.size(); ++k) {
      US.row(static_cast<Index>(k)) = P.U.row(S[k]);
      bS(static_cast<Index>(k)) = P.b(S[k]);
    }
  };

  const int max_iter = 40 * static_cast<int>(P.m + P.n) + 80;
  int bland_after = max_iter / 2;
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    Matrix US;
    Vector bS;
    gather(W, US, bS);
    const auto ep = project_eq(y, US, bS);

    const bool target_feasible =
        ep.eq_resid <= on_tol && (P.U * ep.z - P.b).maxCoeff() <= on_tol;
    if (target_feasible) {
      int drop = -1;
      if (!W.empty()) {
        if (iter < bland_after) {
          Scalar most_negative = -1e-10;
          for (size_t k = 0; k < W.size(); ++k)
            if (ep.eta(static_cast<Index>(k)) < most_negative) {
              most_negative = ep.eta(static_cast<Index>(k));
              drop = static_cast<int>(k);
            }
        } else {  // Bland: smallest face index with negative multiplier
          for (size_t k = 0; k < W.size(); ++k)
            if (ep.eta(static_cast<Index>(k)) < -1e-10) { drop = static_cast<int>(k); break; }
        }
      }
      if (drop < 0) {
        out.point = ep.z;
        for (size_t k = 0; k < W.size(); ++k)
          out.coeffs.eta(W[k]) = std::max(0.0, ep.eta(static_cast<Index>(k)));
        return out;
      }
      x = ep.z;
      W.erase(W.begin() + drop);
      continue;
    }

    // step from x toward the equality target until blocked;
    // ties in the ratio test broken by smallest face index
    const Vector d = ep.z - x;
    Scalar alpha = 1.0;
    int blocker = -1;
    for (Index i = 0; i < P.m; ++i) {
      if (std::find(W.begin(), W.end(), static_cast<int>(i)) != W.end()) continue;
      const Scalar du = P.U.row(i).dot(d);
      if (du > 1e-13 * scale) {
        const Scalar slack = P.b(i) - P.U.row(i).dot(x);
        const Scalar a = std::max(0.0, slack / du);
        if (a < alpha - 1e-12 || (a < alpha + 1e-12 && blocker >= 0 && i < blocker)) {
          alpha = std::min(alpha, a);
          blocker = static_cast<int>(i);
        }
      }
    }
    x += alpha * d;
    if (blocker >= 0 && alpha < 1.0 - 1e-12) {
      W.insert(std::upper_bound(W.begin(), W.end(), blocker), blocker);
    } else if (blocker < 0 && alpha >= 1.0 - 1e-12) {
      // reached an infeasible equality target without a blocker: the working
      // set is inconsistent, drop its last face
      if (!W.empty()) W.pop_back();
    }
  }

  if (P.m <= 16 && project_exhaustive(y, P, out)) return out;
  throw std::runtime_error("projection active-set did not terminate");
}

void project_into(const Matrix& U, const Vector& b, const Vector& y, Vector& z, Vector& eta) {
  const Index m = U.rows();
  eta.setZero();
  if (m == 0) {
    z = y;
    return;
  }
  if (m == 1) {
    const Scalar g = U.row(0).dot(y) - b(0);
    if (g <= 0.0) {
      z = y;
      return;
    }
    const Scalar nn = U.row(0).squaredNorm();
    eta(0) = g / nn;
    z = y;
    z.noalias() -= eta(0) * U.row(0).transpose();
    return;
  }
  bool feasible = true;
  for (Index i = 0; i < m; ++i) {
    if (U.row(i).dot(y) > b(i)) {
      feasible = false;
      break;
    }
  }
  if (feasible) {
    z = y;
    return;
  }
  Projection pr;
  if (m <= 4 && project_small(y, U, b, pr)) {
    z = pr.point;
    eta = pr.coeffs.eta;
    return;
  }
  pr = project(y, MovingPolyhedron{U, b});
  z = pr.point;
  eta = pr.coeffs.eta;
}

Vector nnls(const Matrix& M_rows, const Vector& v, Scalar* residual) {
  // Lawson-Hanson on min || M_rows^T eta - v ||, eta >= 0.
  const Index m = M_rows.rows();
  Vector eta = Vector::Zero(m);
  if (m == 0) {
    if (residual) *residual = v.norm();
    return eta;
  }
  const Matrix Mt = M_rows.transpose();  // n x m
  std::vector<bool> passive(static_cast<size_t>(m), false);
  Vector w = M_rows * (v - Mt * eta);

  const int max_outer = 6 * static_cast<int>(m) + 30;
  for (int outer = 0; outer < max_outer; ++outer) {
    int enter = -1;
    Scalar best = 1e-12 * std::max(1.0, v.norm());
    for (Index i = 0; i < m; ++i)
      if (!passive[static_cast<size_t>(i)] && w(i) > best) { best = w(i); enter = static_cast<int>(i); }
    if (enter < 0) break;
    passive[static_cast<size_t>(enter)] = true;

    for (int inner = 0; inner < max_outer; ++inner) {
      std::vector<int> Pidx;
      for (Index i = 0; i < m; ++i)
        if (passive[static_cast<size_t>(i)]) Pidx.push_back(static_cast<int>(i));
      Matrix Mp(Mt.rows(), Pidx.size());
      for (size_t k = 0; k < Pidx.size(); ++k) Mp.col(static_cast<Index>(k)) = Mt.col(Pidx[k]);
      const Vector zP = Mp.colPivHouseholderQr().solve(v);

      bool all_pos = true;
      for (Index k = 0; k < zP.size(); ++k)
        if (zP(k) <= 1e-13) { all_pos = false; break; }
      if (all_pos) {
        eta.setZero();
        for (size_t k = 0; k < Pidx.size(); ++k) eta(Pidx[k]) = zP(static_cast<Index>(k));
        break;
      }
      // step back to the boundary, smallest ratio
      Scalar alpha = std::numeric_limits<Scalar>::infinity();
      for (size_t k = 0; k < Pidx.size(); ++k) {
        const Scalar zk = zP(static_cast<Index>(k));
        if (zk <= 1e-13) {
          const Scalar ek = eta(Pidx[k]);
          const Scalar a = ek / (ek - zk);
          alpha = std::min(alpha, a);
        }
      }
      for (size_t k = 0; k < Pidx.size(); ++k) {
        const Index i = Pidx[k];
        eta(i) += alpha * (zP(static_cast<Index>(k)) - eta(i));
        if (eta(i) <= 1e-13) {
          eta(i) = 0.0;
          passive[static_cast<size_t>(i)] = false;
        }
      }
    }
    w = M_rows * (v - Mt * eta);
  }
  if (residual) *residual = (Mt * eta - v).norm();
  return eta;
}

ConeDecomposition normal_cone_coeffs(const Vector& x, const MovingPolyhedron& P, const Vector& v,
                                     Scalar tol) {
  const ActiveSet act = active_set(x, P, tol);
  ConeDecomposition out;
  out.coeffs.eta = Vector::Zero(P.m);
  if (act.indices.empty()) {
    out.distance = v.norm();
    out.member = out.distance <= 1e-9;
    return out;
  }
  Matrix Ua(act.indices.size(), P.n);
  for (size_t k = 0; k < act.indices.size(); ++k)
    Ua.row(static_cast<Index>(k)) = P.U.row(act.indices[k]);
  Scalar resid = 0.0;
  const Vector eta_a = nnls(Ua, v, &resid);
  out.distance = resid;
  out.member = resid <= 1e-9;
  if (out.member) {
    for (size_t k = 0; k < act.indices.size(); ++k)
      out.coeffs.eta(act.indices[k]) = eta_a(static_cast<Index>(k));
  }
  return out;
}

bool check_licq(const Vector& x, const MovingPolyhedron& P, Scalar tol) {
  const ActiveSet act = active_set(x, P, tol);
  if (act.indices.empty()) return true;
  Matrix Ua(act.indices.size(), P.n);
  for (size_t k = 0; k < act.indices.size(); ++k)
    Ua.row(static_cast<Index>(k)) = P.U.row(act.indices[k]);
  Eigen::JacobiSVD<Matrix> svd(Ua);
  const auto& sv = svd.singularValues();
  const Scalar thresh = 1e-10 * sv(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return rank == static_cast<Index>(act.indices.size());
}

bool check_plicq(const Vector& x, const MovingPolyhedron& P, Scalar tol) {
  const ActiveSet act = active_set(x, P, tol);
  if (act.indices.empty()) return true;
  // feasibility of: sum alpha_i u_i = 0, alpha >= 0, sum alpha_i = 1
  const Index a = static_cast<Index>(act.indices.size());
  lp::Problem prob = lp::Problem::sized(P.n + 1, a);
  for (Index k = 0; k < a; ++k)
    prob.A.block(0, k, P.n, 1) = P.U.row(act.indices[static_cast<size_t>(k)]).transpose();
  prob.A.row(P.n).setOnes();
  for (Index r = 0; r < P.n + 1; ++r) prob.rel[static_cast<size_t>(r)] = '=';
  prob.b.setZero();
  prob.b(P.n) = 1.0;
  prob.lo.setZero();
  const auto r = lp::solve(prob);
  return r.status != lp::Status::Optimal;  // PLICQ holds iff the LP is infeasible
}

std::optional<Vector> slater_point(const MovingPolyhedron& P) {
  if (P.m == 0) return Vector::Zero(P.n);
  // throws EmptySetError when C is empty
  const MarginPoint mp = max_margin_point(P, Vector::Zero(P.n));
  if (mp.margin > 1e-9) return mp.x;
  return std::nullopt;
}

}  // namespace sweep
