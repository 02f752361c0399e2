#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

#include "boxqp/relaxation.hpp"
#include "boxqp/rng.hpp"

using namespace boxqp;

namespace {

LiftedPoint random_lifted(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  LiftedPoint p;
  p.x = Vector(n);
  p.X = Matrix(n, n);
  for (int i = 0; i < n; ++i) p.x(i) = rng.uniform01();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) p.X(i, j) = p.X(j, i) = rng.uniform01();
  return p;
}

LiftedPoint binary_lift(int n, int mask) {
  LiftedPoint p;
  p.x = Vector(n);
  for (int j = 0; j < n; ++j) p.x(j) = (mask >> j) & 1;
  p.X = p.x * p.x.transpose();
  return p;
}

// Closed-form slack per kind, written independently of LinearConstraint.
double closed_form_slack(const LinearConstraint& c, const LiftedPoint& p) {
  const Vector& x = p.x;
  const Matrix& X = p.X;
  const int i = c.idx[0], j = c.idx[1], t = c.idx[2];
  switch (c.kind) {
    case CutKind::rlt_nonneg: return X(i, j);
    case CutKind::rlt_le_i: return x(i) - X(i, j);
    case CutKind::rlt_le_j: return x(j) - X(i, j);
    case CutKind::rlt_geq_sum: return X(i, j) - x(i) - x(j) + 1.0;
    case CutKind::rlt_diag_le: return x(i) - X(i, i);
    case CutKind::rlt_diag_ge: return X(i, i) - 2.0 * x(i) + 1.0;
    case CutKind::box_lower: return x(i);
    case CutKind::box_upper: return 1.0 - x(i);
    case CutKind::tri_type1:
      return 1.0 - (x(i) + x(j) + x(t) - X(i, j) - X(i, t) - X(j, t));
    case CutKind::tri_type2: return x(i) + X(j, t) - X(i, j) - X(i, t);
    case CutKind::tri_type3: return x(j) + X(i, t) - X(i, j) - X(j, t);
    case CutKind::tri_type4: return x(t) + X(i, j) - X(i, t) - X(j, t);
    default: return 0.0;
  }
}

}  // namespace

TEST_CASE("rlt catalog counts") {
  CHECK(build_rlt_catalog(2).size() == 14);  // 4 pairwise + 6 diagonal + 4 box
  const ConstraintCatalog one = build_rlt_catalog(1);
  CHECK(one.size() == 5);  // 0 pairwise, 3 diagonal, 2 box
  CHECK(one.count(CutKind::box_lower) == 1);
  CHECK(one.count(CutKind::box_upper) == 1);
  CHECK(one.count(CutKind::rlt_nonneg) == 1);
  CHECK(one.count(CutKind::rlt_diag_le) == 1);
  CHECK(one.count(CutKind::rlt_diag_ge) == 1);
}

TEST_CASE("every binary lift is feasible for the catalog and all triangles") {
  const int n = 6;
  const ConstraintCatalog cat = build_rlt_catalog(n);
  for (int mask = 0; mask < (1 << n); ++mask) {
    const LiftedPoint p = binary_lift(n, mask);
    const Matrix Xt = p.bordered();
    for (const auto& row : cat.constraints()) CHECK(row.slack(Xt) >= -1e-12);
    CHECK(separate_triangles(p, 100000, 1e-9).empty());
  }
}

TEST_CASE("every box point lifts feasibly (rank-one lift)") {
  const int n = 5;
  const ConstraintCatalog cat = build_rlt_catalog(n);
  SplitMix64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    LiftedPoint p;
    p.x = Vector(n);
    for (int i = 0; i < n; ++i) p.x(i) = rng.uniform01();
    p.X = p.x * p.x.transpose();
    const Matrix Xt = p.bordered();
    for (const auto& row : cat.constraints()) CHECK(row.slack(Xt) >= -1e-12);
    CHECK(separate_triangles(p, 100000, 1e-9).empty());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Xt, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("constraint evaluation matches closed forms") {
  const LiftedPoint p = random_lifted(5, 11);
  const Matrix Xt = p.bordered();
  ConstraintCatalog cat = build_rlt_catalog(5);
  for (int kind = 0; kind < 4; ++kind)
    cat.add(make_triangle(static_cast<CutKind>(
                              static_cast<int>(CutKind::tri_type1) + kind),
                          0, 2, 4));
  for (const auto& row : cat.constraints())
    CHECK(row.slack(Xt) ==
          doctest::Approx(closed_form_slack(row, p)).epsilon(1e-12));
}

TEST_CASE("separation finds the expected type-1 violation") {
  LiftedPoint p;
  p.x = Vector::Constant(3, 0.5);
  p.X = Matrix::Zero(3, 3);
  p.X.diagonal().setConstant(0.25);
  const auto found = separate_triangles(p, 100000, 1e-6);
  REQUIRE(found.size() == 1);
  CHECK(found[0].cut.kind == CutKind::tri_type1);
  CHECK(found[0].violation == doctest::Approx(0.5));
}

TEST_CASE("separation agrees with direct enumeration on a random point") {
  const int n = 6;
  const LiftedPoint p = random_lifted(n, 77);
  const double tol = 1e-4;

  struct Hit {
    CutKind kind;
    int i, j, t;
    double violation;
  };
  std::vector<Hit> expected;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int t = j + 1; t < n; ++t) {
        const double v1 = p.x(i) + p.x(j) + p.x(t) - p.X(i, j) - p.X(i, t) -
                          p.X(j, t) - 1.0;
        const double v2 = p.X(i, j) + p.X(i, t) - p.x(i) - p.X(j, t);
        const double v3 = p.X(i, j) + p.X(j, t) - p.x(j) - p.X(i, t);
        const double v4 = p.X(i, t) + p.X(j, t) - p.x(t) - p.X(i, j);
        if (v1 > tol) expected.push_back({CutKind::tri_type1, i, j, t, v1});
        if (v2 > tol) expected.push_back({CutKind::tri_type2, i, j, t, v2});
        if (v3 > tol) expected.push_back({CutKind::tri_type3, i, j, t, v3});
        if (v4 > tol) expected.push_back({CutKind::tri_type4, i, j, t, v4});
      }
  std::sort(expected.begin(), expected.end(), [](const Hit& a, const Hit& b) {
    if (a.violation != b.violation) return a.violation > b.violation;
    if (a.kind != b.kind) return a.kind < b.kind;
    return std::array<int, 3>{a.i, a.j, a.t} < std::array<int, 3>{b.i, b.j, b.t};
  });

  const auto found = separate_triangles(p, 100000, tol);
  REQUIRE(found.size() == expected.size());
  for (std::size_t k = 0; k < found.size(); ++k) {
    CHECK(found[k].cut.kind == expected[k].kind);
    CHECK(found[k].cut.idx ==
          std::array<int, 3>{expected[k].i, expected[k].j, expected[k].t});
    CHECK(found[k].violation == doctest::Approx(expected[k].violation));
  }
  // violations are non-increasing down the list
  for (std::size_t k = 1; k < found.size(); ++k)
    CHECK(found[k].violation <= found[k - 1].violation + 1e-15);
}

TEST_CASE("purge drops only slack triangles") {
  LiftedPoint p;
  p.x = Vector::Constant(3, 0.5);
  p.X = Matrix::Constant(3, 3, 0.5);

  ConstraintCatalog cat = build_rlt_catalog(3);
  const std::size_t base = cat.size();
  cat.add(make_triangle(CutKind::tri_type1, 0, 1, 2));  // slack 1, inactive
  cat.add(make_triangle(CutKind::tri_type2, 0, 1, 2));  // slack 0, tight

  const ConstraintCatalog kept = purge_inactive(cat, p, 1e-3);
  CHECK(kept.size() == base + 1);
  CHECK(kept.contains(CutKind::tri_type2, {0, 1, 2}));
  CHECK(!kept.contains(CutKind::tri_type1, {0, 1, 2}));

  // recompute independently: retained == slack <= tol or non-triangle
  const Matrix Xt = p.bordered();
  for (const auto& row : cat.constraints()) {
    const bool should_keep = !is_triangle(row.kind) || row.slack(Xt) <= 1e-3;
    CHECK(kept.contains(row.kind, row.idx) == should_keep);
  }
}

TEST_CASE("purge never removes a violated constraint") {
  const LiftedPoint p = random_lifted(6, 123);
  ConstraintCatalog cat = build_rlt_catalog(6);
  const auto violated = separate_triangles(p, 50, 1e-6);
  for (const auto& vc : violated) cat.add(vc.cut);
  const ConstraintCatalog kept = purge_inactive(cat, p, 1e-3);
  for (const auto& vc : violated) CHECK(kept.contains(vc.cut.kind, vc.cut.idx));
}

TEST_CASE("assemble_model deduplicates and checks rhs conflicts") {
  const Instance inst = generate_spar(3, 100, 5);
  const LinearConstraint tri = make_triangle(CutKind::tri_type1, 0, 1, 2);
  const RelaxationModel model = assemble_model(inst, {tri, tri});
  CHECK(model.catalog.count(CutKind::tri_type1) == 1);

  ConstraintCatalog cat;
  LinearConstraint a = make_box_lower(0);
  LinearConstraint b = make_box_lower(0);
  b.rhs = 0.5;
  cat.add(a);
  CHECK_THROWS_AS(cat.add(b), std::logic_error);
}

TEST_CASE("bordered objective reproduces the instance objective") {
  Matrix Q1(1, 1);
  Q1 << 3;
  Vector c1(1);
  c1 << -2;
  const RelaxationModel m1 = assemble_model(make_instance(Q1, c1));
  CHECK(m1.Qt(0, 0) == 0.0);
  CHECK(m1.Qt(0, 1) == -1.0);
  CHECK(m1.Qt(1, 1) == 1.5);

  const Instance inst = generate_spar(6, 80, 9);
  const RelaxationModel model = assemble_model(inst);
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x(6);
    for (int i = 0; i < 6; ++i) x(i) = rng.uniform01();
    LiftedPoint p{x, x * x.transpose()};
    const double lifted = model.Qt.cwiseProduct(p.bordered()).sum();
    CHECK(lifted == doctest::Approx(evaluate(inst, x) - inst.objective_constant)
                        .epsilon(1e-12));
  }
}

TEST_CASE("catalog dump golden format") {
  ConstraintCatalog cat;
  cat.add(make_rlt_geq_sum(0, 1));
  cat.add(make_triangle(CutKind::tri_type2, 0, 1, 2));
  std::ostringstream out;
  dump_catalog(out, cat);
  CHECK(out.str() ==
        "rlt_geq_sum 0 1 -1 1@(1,2) -1@(0,1) -1@(0,2) >= -1\n"
        "tri_type2 0 1 2 1@(0,1) 1@(2,3) -1@(1,2) -1@(1,3) >= 0\n");
}
