#include <cext/spectra.hpp>
#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"

using namespace cext;

namespace {

/// Smallest nonzero eigenvalue of D'M_{k+1}D x = lambda M_k x restricted to
/// the DOFs not in `fixed` (dense generalized eigensolver).
double dense_lambda1(const DeRhamOps& ops, int k, const std::vector<char>& fixed_k, const std::vector<char>& fixed_k1) {
  IndexList rk, rk1;
  for (Index i = 0; i < ops.count(k); ++i)
    if (!fixed_k.at(static_cast<std::size_t>(i))) rk.push_back(i);
  for (Index i = 0; i < ops.count(k + 1); ++i)
    if (!fixed_k1.at(static_cast<std::size_t>(i))) rk1.push_back(i);
  const Mat d = Mat(select(ops.coboundary(k), rk1, rk));
  const Mat m = Mat(select(ops.mass(k), rk, rk));
  const Mat m1 = Mat(select(ops.mass(k + 1), rk1, rk1));
  const Mat s = d.transpose() * m1 * d;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(s, m);
  const double top = es.eigenvalues().maxCoeff();
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-9 * top) return es.eigenvalues()(i);
  return 0.0;
}

std::vector<char> mask(const OrientedComplex& c, int k, const std::string* label) {
  std::vector<char> m(static_cast<std::size_t>(c.count(k)), 0);
  if (!label) return m;
  for (Index i : c.label(*label, k)) m[static_cast<std::size_t>(i)] = 1;
  return m;
}

}  // namespace

TEST(Spectra, MatchesDenseOracleNeumannAndDirichlet) {
  auto c = fixtures::square(0.25);
  auto ops = assemble(c);
  const std::string b = kBoundaryLabel;
  for (int k = 0; k < 2; ++k) {
    const double neu = dense_lambda1(*ops, k, mask(*c, k, nullptr), mask(*c, k + 1, nullptr));
    const double dir = dense_lambda1(*ops, k, mask(*c, k, &b), mask(*c, k + 1, &b));
    EXPECT_NEAR(poincare_constant(ops, k, Convention::NeumannCoclosed).lambda1, neu, 1e-9 * neu) << k;
    EXPECT_NEAR(poincare_constant(ops, k, Convention::Dirichlet).lambda1, dir, 1e-9 * dir) << k;
  }
}

TEST(Spectra, MatchesDenseOracleOnAnnulus) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus(0.15, 0.45));
  auto ops = assemble(p.omega.child);
  const auto& c = *p.omega.child;
  const std::string b = kBoundaryLabel;
  for (int k = 0; k < 2; ++k) {
    const double neu = dense_lambda1(*ops, k, mask(c, k, nullptr), mask(c, k + 1, nullptr));
    const double dir = dense_lambda1(*ops, k, mask(c, k, &b), mask(c, k + 1, &b));
    const auto rn = poincare_constant(ops, k, Convention::NeumannCoclosed);
    const auto rd = poincare_constant(ops, k, Convention::Dirichlet);
    EXPECT_NEAR(rn.lambda1, neu, 1e-8 * neu) << k;
    EXPECT_NEAR(rd.lambda1, dir, 1e-8 * dir) << k;
    EXPECT_EQ(rn.kernel_dim, rn.expected_kernel_dim);
    EXPECT_EQ(rd.kernel_dim, rd.expected_kernel_dim);
  }
}

TEST(Spectra, UnitSquareScalarEigenvalues) {
  auto ops = assemble(fixtures::square(1.0 / 64));
  const auto neu = poincare_constant(ops, 0, Convention::NeumannCoclosed);
  const auto dir = poincare_constant(ops, 0, Convention::Dirichlet);
  EXPECT_NEAR(neu.lambda1 / (M_PI * M_PI), 1.0, 0.02);
  EXPECT_NEAR(dir.lambda1 / (2 * M_PI * M_PI), 1.0, 0.02);
  EXPECT_LE(neu.poincare_constant, std::sqrt(2.0) / M_PI);
  EXPECT_LT(neu.residual, 1e-6);
}

TEST(Spectra, EigenvectorIsCoexactAndSatisfiesRayleighQuotient) {
  auto ops = assemble(fixtures::square(1.0 / 8));
  for (int k = 0; k < 2; ++k) {
    const auto r = poincare_constant(ops, k, Convention::NeumannCoclosed);
    const Cochain w(k, ops->complex(), r.eigenvector);
    EXPECT_NEAR(l2_norm(*ops, w), 1.0, 1e-10);
    EXPECT_NEAR(l2_norm(*ops, d(w)) * l2_norm(*ops, d(w)), r.lambda1, 1e-8 * r.lambda1);
    // Orthogonal to closed forms: zero against every exact form.
    if (k > 0) {
      std::mt19937_64 rng(5);
      const Cochain e = d(Cochain(k - 1, ops->complex(), random_normal(ops->count(k - 1), rng)));
      EXPECT_NEAR(inner(*ops, w, e), 0.0, 1e-10 * l2_norm(*ops, e));
    }
  }
}

TEST(Spectra, DilationLaw) {
  auto base = build_box_complex(unit_box(2), 0.125, 2);
  for (int k = 0; k < 2; ++k) {
    const double l1 = poincare_constant(assemble(base), k, Convention::NeumannCoclosed).lambda1;
    for (double s : {0.5, 3.0}) {
      const double ls = poincare_constant(assemble(scaled(*base, s)), k, Convention::NeumannCoclosed).lambda1;
      EXPECT_NEAR(ls * s * s, l1, 1e-10 * l1);
    }
  }
}

TEST(Spectra, RejectsInvalidDegree) {
  auto ops = assemble(fixtures::square(0.5));
  EXPECT_THROW(poincare_constant(ops, 2, Convention::NeumannCoclosed), std::invalid_argument);
  EXPECT_THROW(poincare_constant(ops, 0, Convention::Stabilized), std::invalid_argument);
  EXPECT_THROW(convention_from_string("robin"), std::invalid_argument);
}

TEST(Spectra, ConvexRelationsOnSquare) {
  const auto rep = convex_relations(fixtures::square(1.0 / 16));
  for (const auto& c : rep.checks)
    if (!c.informational) EXPECT_TRUE(c.pass) << c.name << " " << c.lhs << " " << c.rhs;
  // Duality fills the top degree.
  EXPECT_DOUBLE_EQ(rep.lambda[2], rep.kappa[0]);
  EXPECT_DOUBLE_EQ(rep.kappa[2], rep.lambda[0]);
  // On the square the coexact 1-form spectrum is the scalar Dirichlet one and vice versa.
  EXPECT_NEAR(rep.lambda[1], rep.kappa[0], 0.02 * rep.kappa[0]);
  EXPECT_NEAR(rep.kappa[1], rep.lambda[0], 0.02 * rep.lambda[0]);
}

TEST(Spectra, ConvexRelationsInThreeDimensions) {
  const auto rep = convex_relations(build_box_complex(unit_box(3), 1.0 / 6, 3));
  ASSERT_EQ(rep.lambda.size(), 4u);
  for (const auto& c : rep.checks)
    if (!c.informational) EXPECT_TRUE(c.pass) << c.name << " " << c.lhs << " " << c.rhs;
}

TEST(Spectra, DirichletMonotonicityForFunctions) {
  auto k = fixtures::square(1.0 / 16);
  ExtensionProblem p(k, barycenter_selection(*k, *fixtures::disk(0.25)), ExtensionVariant::Mixed);
  const auto r = dirichlet_monotonicity_check(p, 0);
  EXPECT_TRUE(r.pass) << r.c_exterior << " " << r.c_k;
  EXPECT_TRUE(r.closed_orth_pass);
  EXPECT_LE(r.c_exterior_closed_orth, r.c_exterior + 1e-10);
}

TEST(Spectra, OneFormDirichletConstantAroundAHole) {
  // A = square minus a centred disk carries a relative 1-cycle, and its
  // one-form Dirichlet constant exceeds that of the square. Restricting to
  // forms orthogonal to every closed form on A restores the inequality.
  auto k = fixtures::square(1.0 / 16);
  ExtensionProblem p(k, barycenter_selection(*k, *fixtures::disk(0.25)), ExtensionVariant::Mixed);
  const auto r = dirichlet_monotonicity_check(p, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.c_exterior, 1.2 * r.c_k);
  EXPECT_TRUE(r.closed_orth_pass) << r.c_exterior_closed_orth << " " << r.c_k;
}

TEST(Spectra, ClosedOrthogonalConstantMatchesDenseOracle) {
  auto pr = fixtures::split(1.0 / 8, fixtures::disk(0.25));
  auto ops = assemble(pr.exterior.child);
  const auto& c = *pr.exterior.child;
  for (int k = 0; k < 2; ++k) {
    const Mat dk = Mat(ops->coboundary(k));
    const Mat m = Mat(ops->mass(k));
    const Mat m1 = Mat(ops->mass(k + 1));
    const Mat z = oracle::null_space(dk, dk.cols());
    const auto fixed = c.label(kBoundaryLabel, k);
    Mat cons(static_cast<Index>(fixed.size()) + z.cols(), m.cols());
    cons.setZero();
    for (std::size_t i = 0; i < fixed.size(); ++i) cons(static_cast<Index>(i), fixed[i]) = 1.0;
    cons.bottomRows(z.cols()) = z.transpose() * m;
    const Mat w = oracle::null_space(cons, cons.cols());
    ASSERT_GT(w.cols(), 0);
    const Mat s = w.transpose() * dk.transpose() * m1 * dk * w;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(s, w.transpose() * m * w);
    const double expect = 1.0 / std::sqrt(es.eigenvalues()(0));
    EXPECT_NEAR(orthogonal_to_closed_dirichlet_constant(ops, k), expect, 1e-8 * expect) << k;
  }
}

TEST(Spectra, UniformScanBoundHolds) {
  auto k = fixtures::square(1.0 / 16);
  std::vector<std::pair<std::string, ShapePtr>> fam{{"disk", fixtures::disk(0.3)}, {"annulus", fixtures::annulus(0.12, 0.36)}};
  const auto rep = uniform_poincare_scan(k, fam, {0, 1}, 3, 7);
  EXPECT_EQ(rep.rows.size(), 4u);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.lhs << " " << c.rhs;
  for (const auto& r : rep.rows) {
    if (r.degree == 0) EXPECT_GT(r.extension_ratio, 0.0);
    EXPECT_LE(r.c_neumann, r.bound_proxy);
  }
}

TEST(Spectra, EigenScanExponentAndFloor) {
  auto k = fixtures::square(1.0 / 16);
  auto om = extract_subcomplex(k, *fixtures::annulus(0.15, 0.45)).child;
  const auto rep = eigenvalue_lower_bound_scan(om, {0.5, 1.0, 2.0, 4.0}, {0, 1});
  ASSERT_EQ(rep.exponent.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(rep.exponent[i], -2.0, 1e-9);
    EXPECT_LT(rep.dilation_spread[i], 1e-10);
    EXPECT_GT(rep.floor[i], 0.0);
  }
}
