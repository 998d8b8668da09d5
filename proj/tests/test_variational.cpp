#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweep/oracle.hpp"
#include "sweep/variational.hpp"

#include <random>

using namespace sweep;

namespace {

// Scalar pushing base point: one face -x <= b active with multiplier eta > 0.
CoderivQuery scalar_pushing(double eta, double u) {
  CoderivQuery q;
  q.xbar = Vector::Constant(1, 0.5);
  q.Abar = Matrix::Constant(1, 1, -1.0);
  q.bbar = Vector::Constant(1, -0.5);
  q.vbar = Vector::Constant(1, eta);  // F = -N = {eta >= 0 direction +1}
  q.u = Vector::Constant(1, u);
  return q;
}

struct RandomInstance {
  CoderivQuery q;
  Coderivative cod;
};

// Random base points with linearly independent active rows; the coderivative
// argument u is orthogonalized against the positive-multiplier rows half the
// time so that nonempty piece lists actually occur.
std::optional<RandomInstance> make_instance(std::mt19937_64& rng, bool require_licq) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Index n = 1 + static_cast<Index>(rng() % 3);
  const Index m = 1 + static_cast<Index>(rng() % 3);
  Matrix A(m, n);
  for (Index i = 0; i < m; ++i) {
    Vector row(n);
    do {
      for (Index j = 0; j < n; ++j) row(j) = gauss(rng);
    } while (row.norm() < 1e-2);
    A.row(i) = row / row.norm();
  }
  Vector x(n);
  for (Index j = 0; j < n; ++j) x(j) = gauss(rng);

  const Index na = 1 + static_cast<Index>(rng() % std::min(n, m));
  Vector b(m);
  for (Index i = 0; i < m; ++i) b(i) = A.row(i).dot(x) + (i < na ? 0.0 : 0.3 + unif(rng));

  MovingPolyhedron P{A, b};
  if (require_licq) {
    if (!check_licq(x, P)) return std::nullopt;
  } else {
    if (!check_plicq(x, P)) return std::nullopt;
  }

  Vector eta = Vector::Zero(m);
  for (Index i = 0; i < na; ++i)
    if (unif(rng) < 0.7) eta(i) = unif(rng) + 0.1;
  const Vector v = -(A.transpose() * eta);

  Vector u(n);
  for (Index j = 0; j < n; ++j) u(j) = gauss(rng);
  const double mode = unif(rng);
  if (mode < 0.25) {
    u.setZero();
  } else if (mode < 0.75) {
    // orthogonalize against the support rows
    std::vector<int> supp;
    for (Index i = 0; i < m; ++i)
      if (eta(i) > 0) supp.push_back(static_cast<int>(i));
    if (!supp.empty()) {
      Matrix S(supp.size(), n);
      for (size_t k = 0; k < supp.size(); ++k) S.row(static_cast<Index>(k)) = A.row(supp[k]);
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(S);
      u -= cod.pseudoInverse() * (S * u);
      if (u.norm() > 1e-10) u /= u.norm();
    }
  }

  RandomInstance inst;
  inst.q.xbar = x;
  inst.q.Abar = A;
  inst.q.bbar = b;
  inst.q.vbar = v;
  inst.q.u = u;
  try {
    inst.cod = dstar_F(inst.q);
  } catch (const QualificationFailure&) {
    return std::nullopt;
  } catch (const NoMultiplier&) {
    return std::nullopt;
  }
  return inst;
}

// Degenerate-but-qualified base points: three unit rows inside an open
// half-plane of R^2 are positively independent yet linearly dependent.
std::optional<RandomInstance> make_plicq_only_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const double base = 2 * M_PI * unif(rng);
  Matrix A(3, 2);
  for (int i = 0; i < 3; ++i) {
    const double ang = base + (unif(rng) - 0.5) * 2.6;  // spread < pi
    A.row(i) << std::cos(ang), std::sin(ang);
  }
  Vector x(2);
  x << gauss(rng), gauss(rng);
  const Vector b = A * x;  // all three faces active

  MovingPolyhedron P{A, b};
  if (!check_plicq(x, P) || check_licq(x, P)) return std::nullopt;

  Vector eta = Vector::Zero(3);
  for (int i = 0; i < 3; ++i)
    if (unif(rng) < 0.6) eta(i) = unif(rng);
  const Vector v = -(A.transpose() * eta);

  Vector u = Vector::Zero(2);
  if (unif(rng) < 0.5 && eta.maxCoeff() == 0.0) {
    u << gauss(rng), gauss(rng);  // free u only when no support row blocks it
  }

  RandomInstance inst;
  inst.q.xbar = x;
  inst.q.Abar = A;
  inst.q.bbar = b;
  inst.q.vbar = v;
  inst.q.u = u;
  try {
    inst.cod = dstar_F(inst.q);
  } catch (const QualificationFailure&) {
    return std::nullopt;
  } catch (const NoMultiplier&) {
    return std::nullopt;
  }
  return inst;
}

CoderivPiece::Covector sample_member(std::mt19937_64& rng, const Coderivative& cod) {
  std::normal_distribution<double> gauss;
  const auto& piece = cod.pieces[rng() % cod.pieces.size()];
  Vector q(piece.p.size());
  for (Index i = 0; i < q.size(); ++i) {
    switch (piece.qsign[static_cast<size_t>(i)]) {
      case QSign::Zero: q(i) = 0.0; break;
      case QSign::NonNeg: q(i) = std::abs(gauss(rng)); break;
      case QSign::Free: q(i) = gauss(rng); break;
    }
  }
  return piece.apply(q);
}

CoderivPiece::Covector random_covector(std::mt19937_64& rng, Index n, Index m) {
  std::normal_distribution<double> gauss;
  CoderivPiece::Covector w;
  w.wx = Vector::Zero(n);
  w.wA = Matrix::Zero(m, n);
  w.wb = Vector::Zero(m);
  for (Index i = 0; i < n; ++i) w.wx(i) = gauss(rng);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) w.wA(i, j) = gauss(rng);
  for (Index i = 0; i < m; ++i) w.wb(i) = gauss(rng);
  return w;
}

}  // namespace

TEST_CASE("orthant coderivative index rule") {
  SUBCASE("beta_i gamma_i != 0 empties the set") {
    Vector a = Vector::Zero(2), be(2), g(2);
    be << 1, 0;
    g << 1, 0;
    auto r = dstar_orthant(a, be, g);
    CHECK(r.empty);
  }
  SUBCASE("strictly negative alpha pins eta to zero") {
    Vector a(2), be = Vector::Zero(2), g(2);
    a << -1, -1;
    g << 0.4, -3.0;
    auto r = dstar_orthant(a, be, g);
    REQUIRE_FALSE(r.empty);
    CHECK(r.sign[0] == QSign::Zero);
    CHECK(r.sign[1] == QSign::Zero);
  }
  SUBCASE("corner splits by the sign of gamma") {
    Vector a = Vector::Zero(2), be = Vector::Zero(2), g(2);
    g << 1, -1;
    auto r = dstar_orthant(a, be, g);
    REQUIRE_FALSE(r.empty);
    CHECK(r.sign[0] == QSign::NonNeg);
    CHECK(r.sign[1] == QSign::Zero);
  }
  SUBCASE("precondition is enforced") {
    Vector a(1), be(1), g(1);
    a << 0.5;  // alpha must be <= 0
    be << 0;
    g << 0;
    CHECK_THROWS_AS(dstar_orthant(a, be, g), NotInGraph);
  }
  SUBCASE("emptiness exactly on beta gamma violations, all sign patterns") {
    // exhaust m <= 3 with entries from a small grid
    const double vals_a[] = {-1.0, 0.0};
    const double vals_b[] = {0.0, 1.0};
    const double vals_g[] = {-1.0, 0.0, 1.0};
    for (int m = 1; m <= 3; ++m) {
      const int combos = static_cast<int>(std::pow(2 * 2 * 3, m));
      for (int code = 0; code < combos; ++code) {
        int c = code;
        Vector a(m), be(m), g(m);
        bool in_graph = true;
        for (int i = 0; i < m; ++i) {
          a(i) = vals_a[c % 2];
          c /= 2;
          be(i) = vals_b[c % 2];
          c /= 2;
          g(i) = vals_g[c % 3];
          c /= 3;
          if (a(i) * be(i) != 0.0) in_graph = false;
        }
        if (!in_graph) continue;
        bool expect_empty = false;
        for (int i = 0; i < m; ++i)
          if (be(i) != 0.0 && g(i) != 0.0) expect_empty = true;
        CHECK(dstar_orthant(a, be, g).empty == expect_empty);
      }
    }
  }
}

TEST_CASE("pset behavior") {
  SUBCASE("inactive base with zero velocity gives the zero multiplier") {
    CoderivQuery q;
    q.xbar = Vector::Zero(2);
    q.Abar = Matrix::Identity(2, 2);
    q.bbar = Vector::Constant(2, 1.0);
    q.vbar = Vector::Zero(2);
    q.u = Vector::Constant(2, 0.7);
    auto ps = pset(q);
    REQUIRE(ps.vertices.size() == 1);
    CHECK(ps.vertices[0].norm() == 0.0);
  }
  SUBCASE("scalar pushing example recovers p = eta") {
    const double eta = 0.75;
    auto q = scalar_pushing(eta, 0.0);
    auto ps = pset(q);
    REQUIRE_FALSE(ps.empty);
    REQUIRE(ps.vertices.size() == 1);
    // substitution oracle: A^T p = -vbar
    CHECK(std::abs((-1.0) * ps.vertices[0](0) - (-q.vbar(0))) <= 1e-12);
    CHECK(ps.vertices[0](0) == doctest::Approx(eta));
  }
  SUBCASE("orthogonality violation with a positive multiplier empties P(u)") {
    auto q = scalar_pushing(0.75, 1.0);  // u not orthogonal to the active row
    auto ps = pset(q);
    CHECK(ps.empty);
    CHECK(dstar_F(q).empty);
  }
  SUBCASE("infeasible multiplier system reports NoMultiplier") {
    CoderivQuery q = scalar_pushing(0.75, 0.0);
    q.vbar(0) = -0.4;  // -vbar = +0.4 is not a nonnegative multiple of -1
    CHECK_THROWS_AS(q.validate(), NoMultiplier);
  }
}

TEST_CASE("qset sign classes") {
  SUBCASE("all faces inactive force q = 0") {
    CoderivQuery q;
    q.xbar = Vector::Zero(2);
    q.Abar = Matrix::Identity(2, 2);
    q.bbar = Vector::Constant(2, 1.0);
    q.vbar = Vector::Zero(2);
    q.u = Vector::Constant(2, 1.0);
    auto sign = qset(Vector::Zero(2), q);
    CHECK(sign[0] == QSign::Zero);
    CHECK(sign[1] == QSign::Zero);
  }
  SUBCASE("active face with p = 0 follows the sign of A_i u") {
    auto q = scalar_pushing(0.0, 0.3);  // A_1 u = -0.3 < 0
    auto sign = qset(Vector::Zero(1), q);
    CHECK(sign[0] == QSign::NonNeg);
    q.u(0) = -0.3;  // A_1 u > 0
    sign = qset(Vector::Zero(1), q);
    CHECK(sign[0] == QSign::Zero);
  }
  SUBCASE("active face with positive p and orthogonal u is free") {
    auto q = scalar_pushing(0.6, 0.0);
    auto sign = qset(pset(q).vertices[0], q);
    CHECK(sign[0] == QSign::Free);
  }
}

TEST_CASE("dstar_F structure on the catalog cases") {
  SUBCASE("inactive point collapses to the zero output") {
    CoderivQuery q;
    q.xbar = Vector::Zero(2);
    q.Abar = Matrix::Identity(2, 2);
    q.bbar = Vector::Constant(2, 1.0);
    q.vbar = Vector::Zero(2);
    q.u = Vector{{0.3, -2.0}};
    auto cod = dstar_F(q);
    REQUIRE(cod.pieces.size() == 1);
    for (auto s : cod.pieces[0].qsign) CHECK(s == QSign::Zero);
    // the only member is w = 0
    CoderivPiece::Covector zero = cod.pieces[0].apply(Vector::Zero(2));
    CHECK(coderiv_member(cod, q, zero));
    auto w = zero;
    w.wx(0) = 0.1;
    CHECK_FALSE(coderiv_member(cod, q, w));
  }
  SUBCASE("scalar pushing with u = 0 gives the (-q, q xbar, -q) line") {
    auto q = scalar_pushing(0.9, 0.0);
    auto cod = dstar_F(q);
    REQUIRE(cod.exact);
    REQUIRE(cod.pieces.size() == 1);
    CHECK(cod.pieces[0].qsign[0] == QSign::Free);
    for (double qv : {-1.3, 0.0, 2.4}) {
      const auto w = cod.pieces[0].apply(Vector::Constant(1, qv));
      CHECK(w.wx(0) == doctest::Approx(-qv));
      CHECK(w.wA(0, 0) == doctest::Approx(qv * q.xbar(0)));
      CHECK(w.wb(0) == doctest::Approx(-qv));
      CHECK(coderiv_member(cod, q, w));
      CHECK(oracle_graph_normals(q, w));
    }
  }
  SUBCASE("active face, zero multiplier, A_1 u < 0 gives the half line") {
    auto q = scalar_pushing(0.0, 0.5);  // A_1 u = -0.5 < 0
    auto cod = dstar_F(q);
    REQUIRE(cod.pieces.size() == 1);
    CHECK(cod.pieces[0].qsign[0] == QSign::NonNeg);
    const auto wpos = cod.pieces[0].apply(Vector::Constant(1, 1.1));
    const auto wneg = cod.pieces[0].apply(Vector::Constant(1, -1.1));
    CHECK(coderiv_member(cod, q, wpos));
    CHECK_FALSE(coderiv_member(cod, q, wneg));
    CHECK(oracle_graph_normals(q, wpos));
    CHECK_FALSE(oracle_graph_normals(q, wneg));
  }
  SUBCASE("PLICQ failure is reported") {
    CoderivQuery q;
    q.xbar = Vector::Constant(1, 1.0);
    q.Abar = Matrix(2, 1);
    q.Abar << 1, -1;
    q.bbar = Vector{{1.0, -1.0}};
    q.vbar = Vector::Zero(1);
    q.u = Vector::Zero(1);
    CHECK_THROWS_AS(dstar_F(q), QualificationFailure);
  }
}

TEST_CASE("oracle accepts the zero covector everywhere") {
  std::mt19937_64 rng(11);
  int done = 0;
  while (done < 10) {
    auto inst = make_instance(rng, true);
    if (!inst) continue;
    ++done;
    // the zero covector of the product space pairs probe 0 with u = 0
    CoderivQuery qz = inst->q;
    qz.u.setZero();
    CoderivPiece::Covector zero;
    zero.wx = Vector::Zero(qz.n());
    zero.wA = Matrix::Zero(qz.m(), qz.n());
    zero.wb = Vector::Zero(qz.m());
    CHECK(oracle_graph_normals(qz, zero));
  }
}

TEST_CASE("formula and oracle agree on LICQ instances") {
  std::mt19937_64 rng(101);
  int instances = 0;
  int checked = 0;
  while (instances < 40) {
    auto inst = make_instance(rng, true);
    if (!inst) continue;
    ++instances;
    REQUIRE(inst->cod.exact);
    for (int s = 0; s < 12; ++s) {
      CoderivPiece::Covector w;
      if (!inst->cod.empty && !inst->cod.pieces.empty() && s % 2 == 0) {
        w = sample_member(rng, inst->cod);
      } else {
        w = random_covector(rng, inst->q.n(), inst->q.m());
      }
      const bool formula = coderiv_member(inst->cod, inst->q, w);
      const bool oracle = oracle_graph_normals(inst->q, w);
      CHECK(formula == oracle);
      ++checked;
    }
  }
  CHECK(checked >= 400);
}

TEST_CASE("inclusion holds one-sided on PLICQ-only instances") {
  std::mt19937_64 rng(202);
  int instances = 0;
  int attempts = 0;
  int positives = 0;
  while (instances < 20 && ++attempts < 4000) {
    auto inst = make_plicq_only_instance(rng);
    if (!inst) continue;
    REQUIRE_FALSE(inst->cod.exact);
    ++instances;
    if (inst->cod.empty || inst->cod.pieces.empty()) continue;
    for (int s = 0; s < 10; ++s) {
      const auto w = sample_member(rng, inst->cod);
      if (!coderiv_member(inst->cod, inst->q, w)) continue;
      ++positives;
      CHECK(oracle_graph_normals(inst->q, w));
    }
  }
  CHECK(instances == 20);
  CHECK(positives > 50);
}

TEST_CASE("positive homogeneity of the coderivative") {
  std::mt19937_64 rng(303);
  int instances = 0;
  while (instances < 15) {
    auto inst = make_instance(rng, true);
    if (!inst || inst->cod.empty || inst->cod.pieces.empty()) continue;
    ++instances;
    for (double t : {0.5, 2.0, 7.5}) {
      CoderivQuery scaled = inst->q;
      scaled.u *= t;
      const auto cod_scaled = dstar_F(scaled);
      for (int s = 0; s < 5; ++s) {
        auto w = sample_member(rng, inst->cod);
        CoderivPiece::Covector tw;
        tw.wx = t * w.wx;
        tw.wA = t * w.wA;
        tw.wb = t * w.wb;
        CHECK(coderiv_member(cod_scaled, scaled, tw));
      }
    }
  }
}
