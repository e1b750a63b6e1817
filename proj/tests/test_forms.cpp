#include <cext/forms.hpp>
#include <gtest/gtest.h>

using namespace cext;

namespace {

ComplexPtr single_edge() {
  Mat v(2, 1);
  v << 0, 1;
  return std::make_shared<const OrientedComplex>(OrientedComplex::from_top_simplices(1, v, {make_simplex({0, 1})}));
}

ComplexPtr right_triangle() {
  Mat v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  return std::make_shared<const OrientedComplex>(OrientedComplex::from_top_simplices(2, v, {make_simplex({0, 1, 2})}));
}

}  // namespace

TEST(Mass, UnitEdgeHatFunctions) {
  auto ops = assemble(single_edge());
  Mat m = Mat(ops->mass(0));
  Mat expect(2, 2);
  expect << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
  EXPECT_TRUE(m.isApprox(expect, 1e-14));
  EXPECT_NEAR(Mat(ops->mass(1))(0, 0), 1.0, 1e-14);
}

TEST(Mass, RightTriangleTopForm) {
  auto ops = assemble(right_triangle());
  EXPECT_NEAR(Mat(ops->mass(2))(0, 0), 2.0, 1e-13);
}

TEST(Mass, RightTriangleEdgeMassMatchesQuadrature) {
  // Whitney 1-form mass checked against pointwise evaluation and the exact
  // affine-product rule on the element.
  auto c = right_triangle();
  auto ops = assemble(c);
  WhitneyElement el(c->coords(2, 0));
  const auto faces = subsets(3, 2);
  Mat expect(3, 3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      double acc = 0;
      for (int comp = 0; comp < 2; ++comp) {
        Vec fa(3), fb(3);
        for (int v = 0; v < 3; ++v) {
          fa(v) = el.whitney(faces[a], c->vertices().row(v).transpose())(comp);
          fb(v) = el.whitney(faces[b], c->vertices().row(v).transpose())(comp);
        }
        acc += affine_product_integral(el.volume(), fa, fb);
      }
      expect(static_cast<Index>(a), static_cast<Index>(b)) = acc;
    }
  EXPECT_TRUE(Mat(ops->mass(1)).isApprox(expect, 1e-13));
}

TEST(Mass, WhitneyFormsAreDualToSimplices) {
  // The integral of phi_e over edge e' is delta(e, e').
  auto c = right_triangle();
  WhitneyElement el(c->coords(2, 0));
  const auto faces = subsets(3, 2);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      const Vec p0 = c->vertices().row(faces[b][0]).transpose();
      const Vec p1 = c->vertices().row(faces[b][1]).transpose();
      const Vec mid = 0.5 * (p0 + p1);
      const double integral = el.whitney(faces[a], mid).dot(p1 - p0);
      EXPECT_NEAR(integral, a == b ? 1.0 : 0.0, 1e-14);
    }
}

TEST(Mass, SymmetricPositiveDefinite) {
  for (int dim = 1; dim <= 3; ++dim) {
    auto ops = assemble(build_box_complex(unit_box(dim), dim == 3 ? 0.5 : 0.25, dim));
    for (int k = 0; k <= dim; ++k) {
      const Mat m = Mat(ops->mass(k));
      EXPECT_TRUE(m.isApprox(m.transpose(), 1e-14));
      Eigen::SelfAdjointEigenSolver<Mat> es(m);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << "dim " << dim << " k " << k;
    }
  }
}

TEST(Mass, DegenerateSimplexRejected) {
  Mat v(3, 2);
  v << 0, 0, 1, 0, 2, 0;
  auto c = std::make_shared<const OrientedComplex>(OrientedComplex::from_top_simplices(2, v, {make_simplex({0, 1, 2})}));
  EXPECT_THROW(assemble(c), std::invalid_argument);
}

TEST(Inner, ConstantHasAreaNorm) {
  auto c = build_box_complex(unit_box(2), 0.25, 2);
  auto ops = assemble(c);
  Cochain one(0, c, Vec::Ones(c->count(0)));
  EXPECT_NEAR(inner(*ops, one, one), 1.0, 1e-13);
  auto c3 = build_box_complex(unit_box(3), 0.5, 3);
  auto ops3 = assemble(c3);
  Cochain one3(0, c3, Vec::Ones(c3->count(0)));
  EXPECT_NEAR(inner(*ops3, one3, one3), 1.0, 1e-13);
}

TEST(Inner, SymmetricAndRejectsMismatch) {
  auto c = build_box_complex(unit_box(2), 0.25, 2);
  auto ops = assemble(c);
  std::mt19937_64 rng(3);
  Cochain a(1, c, random_normal(c->count(1), rng)), b(1, c, random_normal(c->count(1), rng));
  EXPECT_NEAR(inner(*ops, a, b), inner(*ops, b, a), 1e-13);
  EXPECT_GT(inner(*ops, a, a), 0.0);
  Cochain z(0, c, Vec::Zero(c->count(0)));
  EXPECT_THROW(inner(*ops, a, z), std::invalid_argument);
  EXPECT_THROW(Cochain(1, c, Vec::Zero(3)), std::invalid_argument);
}

TEST(Coboundary, IntervalHat) {
  auto c = build_box_complex(unit_box(1), 0.5, 1);
  Cochain hat(0, c, Vec::Unit(3, 1));
  const Cochain e = d(hat);
  EXPECT_EQ(e.values(0), 1.0);
  EXPECT_EQ(e.values(1), -1.0);
}

TEST(Coboundary, DDIsZeroAndTopIsZeroObject) {
  auto c = build_box_complex(unit_box(3), 0.5, 3);
  std::mt19937_64 rng(5);
  for (int k = 0; k <= 1; ++k) {
    // Integer data keeps the check exact in floating point.
    Cochain a(k, c, random_normal(c->count(k), rng).array().round().matrix());
    EXPECT_EQ(d(d(a)).values.cwiseAbs().maxCoeff(), 0.0);
  }
  Cochain top(3, c, random_normal(c->count(3), rng));
  EXPECT_TRUE(d(top).is_zero_object());
  Cochain ones(0, c, Vec::Ones(c->count(0)));
  EXPECT_EQ(d(ones).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GraphNorm, Definition) {
  auto c = build_box_complex(unit_box(2), 0.25, 2);
  auto ops = assemble(c);
  std::mt19937_64 rng(7);
  Cochain a(1, c, random_normal(c->count(1), rng));
  const Cochain da = d(a);
  EXPECT_NEAR(graph_norm(*ops, a) * graph_norm(*ops, a), inner(*ops, a, a) + inner(*ops, da, da), 1e-10);
  EXPECT_EQ(graph_norm(*ops, Cochain::zero(1, c)), 0.0);
  Cochain grad(1, c, c->coboundary(0) * random_normal(c->count(0), rng));
  EXPECT_NEAR(graph_norm(*ops, grad), l2_norm(*ops, grad), 1e-12);
}

TEST(RestrictExtend, RoundTripsAndCommutation) {
  auto k = build_box_complex(unit_box(2), 1.0 / 8, 2);
  Difference ext(std::make_shared<Everything>(), std::make_shared<Ball>(Vec::Constant(2, 0.5), 0.3));
  auto map = extract_subcomplex(k, ext);
  auto opsK = assemble(k);
  auto opsA = assemble(map.child);
  std::mt19937_64 rng(11);
  for (int deg = 0; deg <= 2; ++deg) {
    Vec v = random_normal(map.child->count(deg), rng);
    for (Index i : map.child->label(kInterfaceLabel, deg)) v(i) = 0.0;
    Cochain b(deg, map.child, v);
    const Cochain e = extend_by_zero(b, map);
    EXPECT_EQ((restrict_to(e, map).values - v).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(inner(*opsK, e, e), inner(*opsA, b, b), 1e-12 * (1 + inner(*opsA, b, b)));
    // d commutes with zero padding for zero-trace data (integer identity).
    if (deg < 2) EXPECT_EQ((d(e).values - extend_by_zero(d(b), map).values).cwiseAbs().maxCoeff(), 0.0);
    // Restriction commutes with d for any parent data.
    Cochain a(deg, k, random_normal(k->count(deg), rng));
    if (deg < 2) EXPECT_EQ((d(restrict_to(a, map)).values - restrict_to(d(a), map).values).cwiseAbs().maxCoeff(), 0.0);
  }
  Cochain bad(1, map.child, Vec::Ones(map.child->count(1)));
  EXPECT_THROW(extend_by_zero(bad, map), std::invalid_argument);
  Cochain zero = Cochain::zero(1, map.child);
  EXPECT_EQ(extend_by_zero(zero, map).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(TraceLocality, SharedSimplicesAreInterfaceOfBoth) {
  auto k = build_box_complex(unit_box(2), 1.0 / 8, 2);
  Ball disk(Vec::Constant(2, 0.5), 0.3);
  auto om = extract_subcomplex(k, barycenter_selection(*k, disk));
  auto sel = barycenter_selection(*k, disk);
  for (auto& s : sel) s = !s;
  auto a = extract_subcomplex(k, sel);
  for (int deg = 0; deg <= 1; ++deg) {
    IndexList shared, fromOm, fromA;
    for (Index i : om.child->label(kInterfaceLabel, deg)) fromOm.push_back(om.to_parent(deg, i));
    for (Index i : a.child->label(kInterfaceLabel, deg)) fromA.push_back(a.to_parent(deg, i));
    for (Index p = 0; p < k->count(deg); ++p)
      if (om.to_child(deg, p) >= 0 && a.to_child(deg, p) >= 0) shared.push_back(p);
    std::sort(fromOm.begin(), fromOm.end());
    std::sort(fromA.begin(), fromA.end());
    EXPECT_EQ(fromOm, shared);
    EXPECT_EQ(fromA, shared);
  }
}

TEST(Interpolate, AffineFormsExactly) {
  auto c = build_box_complex(unit_box(2), 0.25, 2);
  // 0-form f = 1 + 2x - y and its gradient field: interpolating grad gives D(interp f).
  auto f = [](const Vec& x) { return Vec::Constant(1, 1 + 2 * x(0) - x(1)); };
  auto g = [](const Vec&) { Vec v(2); v << 2, -1; return v; };
  const Cochain f0 = interpolate(c, 0, f);
  const Cochain g1 = interpolate(c, 1, g);
  EXPECT_LT((d(f0).values - g1.values).cwiseAbs().maxCoeff(), 1e-13);
  // 2-form x dx^dy integrates to the first moment over each triangle (up to orientation).
  auto w = [](const Vec& x) { return Vec::Constant(1, x(0)); };
  const Cochain w2 = interpolate(c, 2, w);
  EXPECT_NEAR(w2.values.cwiseAbs().sum(), 0.5, 1e-13);
}
