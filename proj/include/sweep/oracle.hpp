#pragma once

// Validation oracle for the coderivative of F(x,A,b) = -N(x; {Az <= b}):
// decides membership of (w, -u) in the limiting normal cone to gph F at the
// base point by enumerating activity/complementarity patterns near it,
// building each pattern's polyhedral region in local first-order coordinates
// (rows frozen pattern-wise), computing regular normal cones by tangent-cone
// polarity LPs, and taking the union over patterns whose closure contains the
// base point. Deliberately independent of the dstar_F code path.

#include "sweep/variational.hpp"

namespace sweep {

bool oracle_graph_normals(const CoderivQuery& q, const CoderivPiece::Covector& probe,
                          Scalar tol = 1e-7);

}  // namespace sweep
