#pragma once

// Uniform time meshes and the piecewise-linear control/state grid functions
// that live on them.

#include "sweep/geometry.hpp"
#include "sweep/types.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace sweep {

struct Mesh {
  Scalar T = 1.0;
  int k = 1;

  Mesh() = default;
  Mesh(Scalar horizon, int steps) : T(horizon), k(steps) {
    if (!(T > 0) || k < 1) throw BadConfig("mesh needs T > 0 and k >= 1");
  }
  Scalar h() const { return T / k; }
  Scalar t(int j) const { return j == k ? T : T * (static_cast<Scalar>(j) / k); }
  bool operator==(const Mesh& o) const { return T == o.T && k == o.k; }
};

// j_lo = smallest j with t_j >= tau, j_hi = largest j with t_j <= T - tau.
// Between the two, the unit-norm constraint on control rows is an equality.
std::pair<int, int> index_tau(const Mesh& mesh, Scalar tau);

using ControlFunction = std::function<Matrix(Scalar)>;  // t -> m x n rows
using OffsetFunction = std::function<Vector(Scalar)>;   // t -> m offsets
using StateFunction = std::function<Vector(Scalar)>;    // t -> n state

struct ControlPath {
  Mesh mesh;
  std::vector<Matrix> u;  // k+1 nodes, each m x n
  Matrix b;               // (k+1) x m
  Scalar tau = 0.0;

  Index n() const { return u.empty() ? 0 : u.front().cols(); }
  Index m() const { return b.cols(); }

  MovingPolyhedron polyhedron(int j) const { return {u[static_cast<size_t>(j)], b.row(j).transpose()}; }
  Matrix u_at(Scalar t) const;   // piecewise-linear interpolation
  Vector b_at(Scalar t) const;

  static ControlPath sample(const Mesh& mesh, const ControlFunction& uf, const OffsetFunction& bf,
                            Scalar tau = 0.0);

  // norm constraints of the relaxed problem: unit rows on [tau, T-tau],
  // norms in [1/2, 3/2] outside. Returns the worst violation.
  Scalar norm_constraint_violation() const;
};

struct StatePath {
  Mesh mesh;
  Matrix x;    // (k+1) x n
  Matrix eta;  // k x m, per-interval multipliers (velocity scale)

  Vector x_at(Scalar t) const;  // piecewise-linear interpolation
};

}  // namespace sweep
