#pragma once

// Second-order generalized differentiation for the polyhedral normal-cone
// mapping F(x,A,b) = -N(x; {z : Az <= b}): the orthant coderivative formula,
// the multiplier sets P(u) and sign-pattern sets Q(p), and the coderivative
// of F assembled as a finite list of sign-patterned affine pieces.

#include "sweep/geometry.hpp"
#include "sweep/types.hpp"

#include <vector>

namespace sweep {

struct NotInGraph : std::runtime_error {
  NotInGraph() : std::runtime_error("(alpha, beta) is not in gph N_{R^m_-}") {}
};

struct NoMultiplier : std::runtime_error {
  NoMultiplier() : std::runtime_error("A^T p = -v has no admissible multiplier; v not in F") {}
};

enum class QSign { Zero, NonNeg, Free };

// Base point on the graph of the constraint system plus the coderivative
// argument u. vbar must lie in F(xbar, Abar, bbar); this is certified on
// construction through the normal-cone coefficients of -vbar.
struct CoderivQuery {
  Vector xbar;
  Matrix Abar;
  Vector bbar;
  Vector vbar;
  Vector u;
  Scalar tol = kActivityTol;

  Index n() const { return xbar.size(); }
  Index m() const { return bbar.size(); }
  std::vector<int> active() const;
  void validate() const;  // throws ShapeMismatch / InfeasiblePoint / NoMultiplier
};

// Coderivative of the normal cone to the nonpositive orthant, evaluated by
// the closed-form index rule. Result is either empty or the sign pattern
// {eta_i = 0 on I1, eta_i >= 0 on I2, free elsewhere}.
struct OrthantCoderiv {
  bool empty = false;
  std::vector<QSign> sign;
};
OrthantCoderiv dstar_orthant(const Vector& alpha, const Vector& beta, const Vector& gamma,
                             Scalar tol = 1e-12);

// P(u): admissible multipliers p with p in N_{R^m_-}(A xbar - bbar),
// A^T p = -vbar, filtered by the orthogonality requirement u _|_ A_i whenever
// p_i > 0 (read per multiplier). Under LICQ the set is a single point.
struct PSet {
  bool empty = false;        // orthogonality filter left nothing
  bool unique = false;       // LICQ: single multiplier
  std::vector<Vector> vertices;
  std::vector<Vector> rays;  // nonzero only without PLICQ
};
PSet pset(const CoderivQuery& q);

// Q(p): per-face sign pattern of the admissible q multipliers.
std::vector<QSign> qset(const Vector& p, const CoderivQuery& q);

// One piece of the coderivative: all covectors
//   ( A^T q, { q_i xbar - p_i u }_i, -q )  with q obeying the sign pattern.
struct CoderivPiece {
  Vector p;
  std::vector<QSign> qsign;
  Matrix Abar;
  Vector xbar;
  Vector u;

  // w laid out as (w_x | rows w_A | w_b)
  struct Covector {
    Vector wx;
    Matrix wA;  // m x n
    Vector wb;
    Vector flat() const;
    Scalar norm() const { return flat().norm(); }
  };
  Covector apply(const Vector& q) const;
};

struct Coderivative {
  bool exact = false;  // equality mode (LICQ); otherwise upper inclusion only
  bool empty = false;  // the orthogonality condition emptied P(u)
  std::vector<CoderivPiece> pieces;
};

// Assembles the coderivative pieces. Requires PLICQ at the base point.
Coderivative dstar_F(const CoderivQuery& q);

// Membership of a candidate covector in the assembled union (small LP in p).
bool coderiv_member(const Coderivative& cod, const CoderivQuery& q,
                    const CoderivPiece::Covector& w, Scalar tol = 1e-7);

}  // namespace sweep
