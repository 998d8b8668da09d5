#pragma once

// Dense two-phase simplex, small-problem oriented. Everything downstream
// (constraint qualifications, coderivative membership, certificate
// reconstruction) reduces to LPs of a few hundred rows at most, so a dense
// tableau with Bland anti-cycling is the robustness/complexity sweet spot.

#include "sweep/types.hpp"

#include <limits>
#include <vector>

namespace sweep::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

template <typename S = Scalar>
struct ProblemT {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Mat A;                  // rows x vars
  Vec b;
  std::vector<char> rel;  // per row: '<', '=', '>'
  Vec c;                  // maximize c^T z
  Vec lo, hi;             // elementwise bounds, +-inf allowed

  static ProblemT sized(Index rows, Index vars) {
    ProblemT p;
    const S inf = std::numeric_limits<S>::infinity();
    p.A = Mat::Zero(rows, vars);
    p.b = Vec::Zero(rows);
    p.rel.assign(static_cast<size_t>(rows), '<');
    p.c = Vec::Zero(vars);
    p.lo = Vec::Constant(vars, -inf);
    p.hi = Vec::Constant(vars, inf);
    return p;
  }
};

template <typename S = Scalar>
struct ResultT {
  Status status = Status::Infeasible;
  Eigen::Matrix<S, Eigen::Dynamic, 1> z;
  S objective = S(0);
};

namespace detail {

// Tableau simplex on max c^T s, A s = b, s >= 0, b >= 0 assumed canonical.
template <typename S>
Status run_simplex(Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& T,
                   std::vector<Index>& basis, Index ncols, S tol) {
  const Index m = T.rows() - 1;
  const Index obj = m;
  const Index rhs = ncols;
  const long max_iter = 200 * (m + ncols) + 2000;
  const long bland_after = 10 * (m + ncols) + 50;

  for (long iter = 0; iter < max_iter; ++iter) {
    // entering column
    Index enter = -1;
    if (iter < bland_after) {
      S best = -tol;
      for (Index j = 0; j < ncols; ++j)
        if (T(obj, j) < best) { best = T(obj, j); enter = j; }
    } else {
      for (Index j = 0; j < ncols; ++j)
        if (T(obj, j) < -tol) { enter = j; break; }
    }
    if (enter < 0) return Status::Optimal;

    // ratio test, smallest-index ties
    Index leave = -1;
    S best_ratio = std::numeric_limits<S>::infinity();
    for (Index i = 0; i < m; ++i) {
      const S a = T(i, enter);
      if (a > S(1e-11)) {
        const S ratio = T(i, rhs) / a;
        if (ratio < best_ratio - S(1e-12) ||
            (ratio < best_ratio + S(1e-12) && (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return Status::Unbounded;

    // pivot
    const S piv = T(leave, enter);
    T.row(leave) /= piv;
    for (Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const S f = T(i, enter);
      if (f != S(0)) T.row(i) -= f * T.row(leave);
    }
    basis[leave] = enter;
  }
  return Status::IterLimit;
}

}  // namespace detail

// Bounded-variable LP via substitution into standard form. Row duals are not
// exposed; infeasibility certificates are produced by a second explicit LP
// where callers need one (see farkas_ray below).
template <typename S = Scalar>
ResultT<S> solve(const ProblemT<S>& prob, S tol = S(1e-9)) {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const S inf = std::numeric_limits<S>::infinity();
  const Index nv = prob.A.cols();
  const Index nr = prob.A.rows();

  // variable mapping: z_j = shift_j + sign_j * s_{col_j} (- s_{col_j + 1} when split)
  struct VarMap { Index col; S shift; S sign; bool split; };
  std::vector<VarMap> vmap(static_cast<size_t>(nv));
  Index ncols = 0;
  Index extra_rows = 0;
  for (Index j = 0; j < nv; ++j) {
    const S lo = prob.lo(j), hi = prob.hi(j);
    if (lo > hi) return {Status::Infeasible, Vec(), S(0)};
    if (std::isfinite(lo)) {
      vmap[j] = {ncols++, lo, S(1), false};
      if (std::isfinite(hi)) ++extra_rows;
    } else if (std::isfinite(hi)) {
      vmap[j] = {ncols++, hi, S(-1), false};
    } else {
      vmap[j] = {ncols, S(0), S(1), true};
      ncols += 2;
    }
  }

  const Index rows = nr + extra_rows;
  Mat A = Mat::Zero(rows, ncols);
  Vec b = Vec::Zero(rows);
  std::vector<char> rel(static_cast<size_t>(rows), '<');
  Vec c = Vec::Zero(ncols);

  for (Index j = 0; j < nv; ++j) {
    const auto& vm = vmap[j];
    for (Index i = 0; i < nr; ++i) {
      const S a = prob.A(i, j);
      if (a == S(0)) continue;
      A(i, vm.col) += a * vm.sign;
      if (vm.split) A(i, vm.col + 1) -= a;
    }
    c(vm.col) += prob.c(j) * vm.sign;
    if (vm.split) c(vm.col + 1) -= prob.c(j);
  }
  for (Index i = 0; i < nr; ++i) {
    b(i) = prob.b(i);
    rel[static_cast<size_t>(i)] = prob.rel[static_cast<size_t>(i)];
    for (Index j = 0; j < nv; ++j) b(i) -= prob.A(i, j) * vmap[j].shift;
  }
  // upper-bound rows for doubly bounded vars
  {
    Index r = nr;
    for (Index j = 0; j < nv; ++j) {
      if (std::isfinite(prob.lo(j)) && std::isfinite(prob.hi(j))) {
        A(r, vmap[j].col) = S(1);
        b(r) = prob.hi(j) - prob.lo(j);
        rel[static_cast<size_t>(r)] = '<';
        ++r;
      }
    }
  }

  // canonical form: b >= 0
  for (Index i = 0; i < rows; ++i) {
    if (b(i) < S(0)) {
      A.row(i) = -A.row(i);
      b(i) = -b(i);
      auto& rl = rel[static_cast<size_t>(i)];
      rl = (rl == '<') ? '>' : (rl == '>') ? '<' : '=';
    }
  }

  // slacks / surplus / artificials
  Index nslack = 0, nart = 0;
  for (auto r : rel) {
    if (r == '<') ++nslack;
    else if (r == '>') { ++nslack; ++nart; }
    else ++nart;
  }
  const Index total = ncols + nslack + nart;
  Mat T = Mat::Zero(rows + 1, total + 1);
  T.block(0, 0, rows, ncols) = A;
  T.col(total).head(rows) = b;
  std::vector<Index> basis(static_cast<size_t>(rows), -1);

  Index scol = ncols, acol = ncols + nslack;
  std::vector<Index> art_rows;
  for (Index i = 0; i < rows; ++i) {
    const char r = rel[static_cast<size_t>(i)];
    if (r == '<') {
      T(i, scol) = S(1);
      basis[static_cast<size_t>(i)] = scol;
      ++scol;
    } else if (r == '>') {
      T(i, scol) = S(-1);
      ++scol;
      T(i, acol) = S(1);
      basis[static_cast<size_t>(i)] = acol;
      art_rows.push_back(i);
      ++acol;
    } else {
      T(i, acol) = S(1);
      basis[static_cast<size_t>(i)] = acol;
      art_rows.push_back(i);
      ++acol;
    }
  }

  ResultT<S> out;
  // phase 1: maximize -sum(artificials)
  if (nart > 0) {
    for (Index j = ncols + nslack; j < total; ++j) T(rows, j) = S(1);
    for (Index i : art_rows) T.row(rows) -= T.row(i);
    const Status st = detail::run_simplex(T, basis, total, tol);
    if (st == Status::IterLimit) { out.status = st; return out; }
    if (T(rows, total) < -tol * S(10)) { out.status = Status::Infeasible; return out; }
    // drive basic artificials out, drop redundant rows by zeroing them
    for (Index i = 0; i < rows; ++i) {
      if (basis[static_cast<size_t>(i)] >= ncols + nslack) {
        Index piv = -1;
        for (Index j = 0; j < ncols + nslack; ++j)
          if (std::abs(T(i, j)) > S(1e-9)) { piv = j; break; }
        if (piv >= 0) {
          const S p = T(i, piv);
          T.row(i) /= p;
          for (Index r2 = 0; r2 <= rows; ++r2) {
            if (r2 == i) continue;
            const S f = T(r2, piv);
            if (f != S(0)) T.row(r2) -= f * T.row(i);
          }
          basis[static_cast<size_t>(i)] = piv;
        }
      }
    }
  }

  // lock artificial columns
  for (Index i = 0; i <= rows; ++i)
    for (Index j = ncols + nslack; j < total; ++j) T(i, j) = S(0);

  // phase 2 objective row
  T.row(rows).setZero();
  for (Index j = 0; j < ncols; ++j) T(rows, j) = -c(j);
  for (Index i = 0; i < rows; ++i) {
    const Index bj = basis[static_cast<size_t>(i)];
    if (bj >= 0 && bj < ncols && c(bj) != S(0)) T.row(rows) += c(bj) * T.row(i);
  }
  const Status st = detail::run_simplex(T, basis, ncols + nslack, tol);
  if (st != Status::Optimal) { out.status = st; return out; }

  Vec s = Vec::Zero(ncols);
  for (Index i = 0; i < rows; ++i) {
    const Index bj = basis[static_cast<size_t>(i)];
    if (bj >= 0 && bj < ncols) s(bj) = T(i, total);
  }
  out.z = Vec(nv);
  for (Index j = 0; j < nv; ++j) {
    const auto& vm = vmap[j];
    S v = vm.shift + vm.sign * s(vm.col);
    if (vm.split) v -= s(vm.col + 1);
    out.z(j) = v;
  }
  out.objective = prob.c.dot(out.z);
  out.status = Status::Optimal;
  return out;
}

using Problem = ProblemT<Scalar>;
using Result = ResultT<Scalar>;

// Certified infeasibility ray for {U x <= b}: y >= 0, y^T U = 0, y^T b < 0.
// Solved as its own LP over y with sum(y) = 1.
inline Vector farkas_ray(const Matrix& U, const Vector& b) {
  const Index m = U.rows(), n = U.cols();
  Problem p = Problem::sized(n + 1, m);
  for (Index j = 0; j < n; ++j) {
    p.A.row(j) = U.col(j).transpose();
    p.rel[static_cast<size_t>(j)] = '=';
    p.b(j) = 0.0;
  }
  p.A.row(n).setOnes();
  p.rel[static_cast<size_t>(n)] = '=';
  p.b(n) = 1.0;
  p.c = -b;  // maximize -y^T b
  p.lo.setZero();
  auto r = solve(p);
  if (r.status == lp::Status::Optimal && r.objective > 1e-9) return r.z;
  return Vector::Zero(m);
}

}  // namespace sweep::lp
