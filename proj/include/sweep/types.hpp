#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sweep {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr Scalar kActivityTol = 1e-8;   // default face-activity tolerance, state units
inline constexpr Scalar kStationarityTol = 1e-10;

// Errors shared across modules. Each carries the offending quantity where
// one exists so callers can report without re-deriving it.

struct InfeasiblePoint : std::runtime_error {
  Scalar violation;
  explicit InfeasiblePoint(Scalar v)
      : std::runtime_error("point violates a face by " + std::to_string(v)), violation(v) {}
};

struct EmptySetError : std::runtime_error {
  // Farkas ray y >= 0 with y^T U = 0 and y^T b < 0 certifying infeasibility.
  Vector ray;
  explicit EmptySetError(Vector r)
      : std::runtime_error("polyhedron is empty"), ray(std::move(r)) {}
};

struct MeshMismatch : std::runtime_error {
  MeshMismatch() : std::runtime_error("mesh mismatch between paths") {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionTooLarge : std::runtime_error {
  DimensionTooLarge() : std::runtime_error("oracle restricted to n <= 3, m <= 3") {}
};

struct QualificationFailure : std::runtime_error {
  explicit QualificationFailure(const std::string& what) : std::runtime_error(what) {}
};

struct BadConfig : std::runtime_error {
  explicit BadConfig(const std::string& what) : std::runtime_error(what) {}
};

template <typename T>
int sgn(T v, T tol = T(0)) {
  if (v > tol) return 1;
  if (v < -tol) return -1;
  return 0;
}

}  // namespace sweep
