#pragma once

// Polyhedral sets C(u,b) = { x : <u_i, x> <= b_i }, Euclidean projection with
// multiplier extraction, normal-cone coefficient recovery, and the LICQ/PLICQ
// diagnostics used by the rest of the toolkit.

#include "sweep/types.hpp"

#include <optional>
#include <vector>

namespace sweep {

struct MovingPolyhedron {
  Index n = 0;  // state dimension
  Index m = 0;  // number of faces
  Matrix U;     // m x n, one normal direction per row
  Vector b;     // m offsets

  MovingPolyhedron() = default;
  MovingPolyhedron(Matrix U_, Vector b_, bool unit_rows = false);

  Vector margins(const Vector& x) const { return b - U * x; }  // >= 0 inside
};

struct ActiveSet {
  std::vector<int> indices;  // 0-based face indices
  Scalar tol = kActivityTol;

  bool contains(int i) const;
};

struct ConeCoefficients {
  Vector eta;  // one multiplier per face, zero off the active set
};

struct Projection {
  Vector point;
  ConeCoefficients coeffs;
  int iterations = 0;
};

// Exactly the faces with |<u_i,x> - b_i| <= tol. Throws InfeasiblePoint if x
// violates a face beyond tol.
ActiveSet active_set(const Vector& x, const MovingPolyhedron& P, Scalar tol = kActivityTol);

// Euclidean projection of y onto P via a primal active-set QP. The returned
// multipliers satisfy z - y = -sum_i eta_i u_i, eta >= 0, with complementarity
// on the faces of P. Throws EmptySetError (with Farkas ray) when P is empty.
Projection project(const Vector& y, const MovingPolyhedron& P);

struct NotMember {
  Scalar distance;  // Euclidean distance from v to cone{u_i : i active}
};

// Recover eta >= 0 supported on the active set at x with v = sum eta_i u_i,
// or report the distance from v to that cone. Throws InfeasiblePoint if x is
// outside P beyond tol.
struct ConeDecomposition {
  bool member = false;
  ConeCoefficients coeffs;
  Scalar distance = 0.0;  // zero when member
};
ConeDecomposition normal_cone_coeffs(const Vector& x, const MovingPolyhedron& P, const Vector& v,
                                     Scalar tol = kActivityTol);

// Linear independence of the active rows (SVD rank, threshold 1e-10 * sigma_max).
bool check_licq(const Vector& x, const MovingPolyhedron& P, Scalar tol = kActivityTol);

// Positive linear independence: no alpha >= 0, sum alpha_i = 1 with
// sum alpha_i u_i = 0 over the active rows. Decided by LP feasibility.
bool check_plicq(const Vector& x, const MovingPolyhedron& P, Scalar tol = kActivityTol);

// A point with strictly positive margin on every face (max-margin LP), or
// nullopt when the polyhedron has no strict interior. Throws EmptySetError
// when the polyhedron itself is empty.
std::optional<Vector> slater_point(const MovingPolyhedron& P);

// Nonnegative least squares min ||M^T eta - v||, eta >= 0 (Lawson-Hanson).
// Exposed for reuse by the variational module.
Vector nnls(const Matrix& M_rows, const Vector& v, Scalar* residual = nullptr);

// Allocation-lean projection for hot loops: writes the projected point and
// multipliers into caller-owned buffers (sized n and m).
void project_into(const Matrix& U, const Vector& b, const Vector& y, Vector& z, Vector& eta);

}  // namespace sweep
