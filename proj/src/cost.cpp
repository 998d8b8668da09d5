#include "sweep/cost.hpp"

#include <cmath>

namespace sweep {

namespace {
Vector centered(const VecRef& x, const Vector& center) {
  return center.size() == 0 ? Vector(x) : Vector(x - center);
}
}  // namespace

Scalar TerminalCost::value(const Vector& x) const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::Quadratic: return weight * centered(x, center).squaredNorm();
    case Kind::QuadraticHalf: return 0.5 * centered(x, center).squaredNorm();
  }
  return 0.0;
}

Vector TerminalCost::gradient(const Vector& x) const {
  switch (kind) {
    case Kind::None: return Vector::Zero(x.size());
    case Kind::Quadratic: return 2.0 * weight * centered(x, center);
    case Kind::QuadraticHalf: return centered(x, center);
  }
  return Vector::Zero(x.size());
}

Scalar L1Term::value(Scalar t, const VecRef& x, const VecRef& b) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::TrackingB: return weight * (b - b_ref(t)).squaredNorm();
    case Kind::QuadX: return weight * centered(x, center).squaredNorm();
  }
  return 0.0;
}

Vector L1Term::grad_x(Scalar t, const Vector& x) const {
  (void)t;
  if (kind == Kind::QuadX) return 2.0 * weight * centered(x, center);
  return Vector::Zero(x.size());
}

Vector L1Term::grad_b(Scalar t, const Vector& b) const {
  if (kind == Kind::TrackingB) return 2.0 * weight * (b - b_ref(t));
  return Vector::Zero(b.size());
}

Scalar L2Term::value(const VecRef& xdot) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Quad: return weight * xdot.squaredNorm();
    case Kind::Abs: return weight * xdot.cwiseAbs().sum();
  }
  return 0.0;
}

std::vector<SubgradRange> L2Term::subgrad(const Vector& xdot, Scalar kink_tol) const {
  std::vector<SubgradRange> out(static_cast<size_t>(xdot.size()));
  for (Index i = 0; i < xdot.size(); ++i) {
    Scalar g = 0.0;
    switch (kind) {
      case Kind::Zero: break;
      case Kind::Quad: g = 2.0 * weight * xdot(i); break;
      case Kind::Abs:
        if (std::abs(xdot(i)) <= kink_tol) {
          out[static_cast<size_t>(i)] = {-weight, weight};
          continue;
        }
        g = weight * (xdot(i) > 0 ? 1.0 : -1.0);
        break;
    }
    out[static_cast<size_t>(i)] = {g, g};
  }
  return out;
}

Scalar L3Term::value(Scalar t, const VecRef& udot_flat, const VecRef& bdot) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Quad: return wu * udot_flat.squaredNorm() + wb * bdot.squaredNorm();
    case Kind::AbsShiftedB: {
      const Vector sigma = shift0 + t * shift1;
      return weight * (bdot - sigma).cwiseAbs().sum();
    }
  }
  return 0.0;
}

Vector L3Term::grad_udot(const Vector& udot_flat) const {
  if (kind == Kind::Quad) return 2.0 * wu * udot_flat;
  return Vector::Zero(udot_flat.size());
}

std::vector<SubgradRange> L3Term::subgrad_bdot(Scalar t, const Vector& bdot,
                                               Scalar kink_tol) const {
  std::vector<SubgradRange> out(static_cast<size_t>(bdot.size()));
  for (Index i = 0; i < bdot.size(); ++i) {
    Scalar g = 0.0;
    switch (kind) {
      case Kind::Zero: break;
      case Kind::Quad: g = 2.0 * wb * bdot(i); break;
      case Kind::AbsShiftedB: {
        const Scalar s = bdot(i) - (shift0(i) + t * shift1(i));
        if (std::abs(s) <= kink_tol) {
          out[static_cast<size_t>(i)] = {-weight, weight};
          continue;
        }
        g = weight * (s > 0 ? 1.0 : -1.0);
        break;
      }
    }
    out[static_cast<size_t>(i)] = {g, g};
  }
  return out;
}

}  // namespace sweep
