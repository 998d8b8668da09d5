#pragma once

// Bolza cost catalog: terminal term phi plus a running cost split as
// l = l1(t, z) + l2(xdot) + l3(t, udot, bdot). Each catalog entry knows its
// value and its (sub)gradients; nonsmooth entries report interval bounds that
// the certificate LP turns into box variables.

#include "sweep/types.hpp"

#include <functional>

namespace sweep {

using VecRef = Eigen::Ref<const Vector>;

// closed interval of admissible subgradient values for one component
struct SubgradRange {
  Scalar lo = 0.0;
  Scalar hi = 0.0;
  bool singleton() const { return hi - lo <= 1e-14; }
  Scalar mid() const { return (lo + hi) / 2; }
};

struct TerminalCost {
  enum class Kind { None, Quadratic, QuadraticHalf };
  Kind kind = Kind::None;
  Vector center;       // defaults to the origin when empty
  Scalar weight = 1.0; // Quadratic: w * ||x - c||^2

  Scalar value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

// l1(t, z): catalog {zero, tracking (b - r(t))^2 summed with weight,
// quadratic state term w * ||x - c||^2}
struct L1Term {
  enum class Kind { Zero, TrackingB, QuadX };
  Kind kind = Kind::Zero;
  Scalar weight = 1.0;
  std::function<Vector(Scalar)> b_ref;  // r(t), size m (TrackingB)
  Vector center;                        // QuadX

  Scalar value(Scalar t, const VecRef& x, const VecRef& b) const;
  Vector grad_x(Scalar t, const Vector& x) const;
  Vector grad_b(Scalar t, const Vector& b) const;
};

// l2(xdot): {zero, w * ||xdot||^2, w * sum |xdot_i|}
struct L2Term {
  enum class Kind { Zero, Quad, Abs };
  Kind kind = Kind::Zero;
  Scalar weight = 0.0;

  Scalar value(const VecRef& xdot) const;
  std::vector<SubgradRange> subgrad(const Vector& xdot, Scalar kink_tol = 1e-9) const;
  bool smooth() const { return kind != Kind::Abs; }
};

// l3(t, udot, bdot): {zero, wu * ||udot||^2 + wb * ||bdot||^2,
// w * sum |bdot_i - sigma_i(t)| with affine shift sigma(t) = s0 + s1 t}
struct L3Term {
  enum class Kind { Zero, Quad, AbsShiftedB };
  Kind kind = Kind::Zero;
  Scalar wu = 0.0;
  Scalar wb = 0.0;
  Scalar weight = 0.0;  // AbsShiftedB
  Vector shift0, shift1;

  Scalar value(Scalar t, const VecRef& udot_flat, const VecRef& bdot) const;
  Vector grad_udot(const Vector& udot_flat) const;
  std::vector<SubgradRange> subgrad_bdot(Scalar t, const Vector& bdot,
                                         Scalar kink_tol = 1e-9) const;
  bool smooth() const { return kind != Kind::AbsShiftedB; }
};

struct CostSpec {
  TerminalCost terminal;
  L1Term l1;
  L2Term l2;
  L3Term l3;

  bool smooth() const { return l2.smooth() && l3.smooth(); }
};

}  // namespace sweep
