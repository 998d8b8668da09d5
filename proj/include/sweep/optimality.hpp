#pragma once

// Dual certificates for the discrete and continuous necessary optimality
// conditions: residual evaluation, LP-based reconstruction with an
// irreducible-conflict report on failure, and the degenerate-pattern flag.

#include "sweep/discrete_ocp.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sweep {

// Dual data of the discrete conditions. p rows are indexed by node; gamma by
// interval. Subgradient selections are stored explicitly so the residual
// checker can re-validate them against the cost catalog.
struct DualCertificate {
  Scalar lambda = 0.0;
  Matrix px;     // (k+1) x n
  Matrix pu;     // (k+1) x (n*m), zero-width in fixed-u mode
  Matrix pb;     // (k+1) x m
  Matrix gamma;  // k x m
  Matrix xi;     // (k+1) x m, zero-width in fixed-u mode
  Matrix eta;    // (k+1) x m, last row mirrors pb row k
  Matrix wx, wu, wb;  // k x {n, n*m, m}
  Matrix vx, vu, vb;  // k x {n, n*m, m}

  DualCertificate scaled(Scalar t) const;
};

struct CertificateResiduals {
  std::map<std::string, Scalar> by_name;
  Scalar max_residual = 0.0;        // excludes the nontriviality magnitude
  bool nontrivial = false;          // lambda + |p^u_0| + |p^b_0| != 0
  Scalar nontrivial_magnitude = 0.0;
  bool enhanced_nontrivial = false; // (lambda, p_k) != 0
  bool degenerate = false;          // Remark-6.2-style mass at t = 0
};

// Named residuals of the discrete conditions at tolerance-resolved activity
// patterns: dyn, compl-eta, adjx, adju, adjb, pin-u, pin-b, orth, meas-supp,
// trans-x, trans-u, trans-b, xi-box, selection. The side flag picks the
// polyhedron the interval multipliers are tested against: Implicit matches
// catch-up output (t_{j+1}), ExplicitSide the stated discrete conditions (t_j).
CertificateResiduals residuals_thm52(const DiscreteTriple& z, const DualCertificate& cert,
                                     const Scenario& sc, Scalar act_tol = kActivityTol,
                                     EtaSide side = EtaSide::Implicit);

struct LambdaMode {
  bool fixed = false;
  Scalar value = 1.0;
  static LambdaMode free_mode() { return {false, 1.0}; }
  static LambdaMode fixed_mode(Scalar v) { return {true, v}; }
};

struct CertificateSearch {
  bool feasible = false;                 // nontrivial certificate found
  std::optional<DualCertificate> cert;   // normalized when found
  Scalar lambda_max = 0.0;               // over the linear condition system
  Scalar p_end_max = 0.0;                // largest achievable |p_k| component
  bool degenerate = false;
  bool enhanced_nontrivial = false;
  bool not_optimal = false;  // no certificate can meet (lambda, p(T)) != 0
  std::vector<std::string> conflict;  // irreducible conflicting condition set
};

// Solves the discrete conditions for (lambda, p, gamma, xi) as LPs with the
// primal activity pattern linearized at act_tol; borderline activity within
// 10x act_tol is branched over (capped at 64 branches).
CertificateSearch solve_certificate(const DiscreteTriple& z, const Scenario& sc,
                                    const LambdaMode& mode = LambdaMode::free_mode(),
                                    Scalar act_tol = kActivityTol,
                                    EtaSide side = EtaSide::Implicit);

// Measures as per-interval densities plus finite atom lists on grid nodes.
struct MeasureAtom {
  Scalar t;
  Vector mass;  // one entry per face
};

struct ContinuousCertificate {
  Scalar lambda = 0.0;
  Matrix px, pu, pb;            // adjoint arc at nodes
  Matrix qx, qu, qb;            // left-continuous representative at nodes
  Matrix gamma_density;         // k x m
  Matrix xi_density;            // k x m
  std::vector<MeasureAtom> gamma_atoms;
  std::vector<MeasureAtom> xi_atoms;
  Matrix eta;                   // k x m
  Matrix wx, wu, wb, vx, vu, vb;

  ContinuousCertificate scaled(Scalar t) const;
};

// Grid-evaluated residuals of the continuous conditions: the primal-dual
// dynamic relationships, the q reconstruction identity, transversality,
// measure nonatomicity over 2h neighborhoods of strictly inactive times,
// and both nontriviality variants.
CertificateResiduals residuals_thm61(const DiscreteTriple& z, const ContinuousCertificate& cert,
                                     const Scenario& sc, Scalar act_tol = kActivityTol);

// Fixed-normals variant: u equations removed, reduced q identity.
CertificateResiduals residuals_thm63(const DiscreteTriple& z, const ContinuousCertificate& cert,
                                     const Scenario& sc, Scalar act_tol = kActivityTol);

}  // namespace sweep
