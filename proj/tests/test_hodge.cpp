#include <cext/hodge.hpp>
#include <gtest/gtest.h>

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"

using namespace cext;

namespace {

Mat dense(const SpMat& a) { return Mat(a); }

}  // namespace

TEST(HarmonicBasis, DimensionsMatchBetti) {
  for (const auto& shape : {fixtures::disk(), fixtures::annulus()}) {
    auto p = fixtures::split(1.0 / 8, shape);
    for (const SubcomplexMap* m : {&p.omega, &p.exterior}) {
      auto ops = assemble(m->child);
      const auto b = betti_numbers(*m->child);
      const auto br = betti_numbers(*m->child, std::string(kBoundaryLabel));
      HodgeSolver abs(ops, BoundaryCondition::absolute());
      HodgeSolver rel(ops, BoundaryCondition::relative());
      for (int k = 0; k <= 2; ++k) {
        EXPECT_EQ(abs.harmonic_dim(k), b[static_cast<std::size_t>(k)]);
        EXPECT_EQ(rel.harmonic_dim(k), br[static_cast<std::size_t>(k)]);
        const auto hb = harmonic_basis(abs, k);
        EXPECT_EQ(hb.dim(), b[static_cast<std::size_t>(k)]);
        const auto hr = harmonic_basis(rel, k);
        EXPECT_EQ(hr.dim(), br[static_cast<std::size_t>(k)]);
      }
    }
  }
}

TEST(HarmonicBasis, SpecExamples) {
  auto disk = fixtures::split(1.0 / 8, fixtures::disk());
  EXPECT_EQ(harmonic_basis(assemble(disk.omega.child), 1).dim(), 0);
  auto ann = fixtures::split(1.0 / 8, fixtures::annulus());
  EXPECT_EQ(harmonic_basis(assemble(ann.omega.child), 1).dim(), 1);
  EXPECT_EQ(harmonic_basis(assemble(disk.exterior.child), 2, BoundaryCondition::relative()).dim(), 1);
}

TEST(HarmonicBasis, PropertiesPerVariant) {
  auto p = fixtures::split(1.0 / 8, fixtures::disk());
  auto ops = assemble(p.exterior.child);
  for (const auto& bc : {BoundaryCondition::absolute(), BoundaryCondition::relative(),
                         BoundaryCondition::mixed(kInterfaceLabel)}) {
    HodgeSolver hs(ops, bc);
    for (int k = 0; k <= 2; ++k) {
      const auto hb = harmonic_basis(hs, k);
      EXPECT_LT(hb.orthonormality_residual, 1e-12);
      for (Index j = 0; j < hb.dim(); ++j) {
        const Vec q = hb.columns.col(j);
        if (k < 2) EXPECT_LT((ops->coboundary(k) * q).cwiseAbs().maxCoeff(), 1e-10);
        if (bc.constrained())
          for (Index i : ops->trace_dofs(k, bc.label)) EXPECT_EQ(q(i), 0.0);
        if (k > 0) {
          // q is orthogonal to D of every test (k-1)-cochain of the variant.
          const auto& seq = hs.sequence();
          const Vec g = SpMat(seq.d(k - 1).transpose()) * (seq.mass(k) * seq.reduce(k, q));
          EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-10);
        }
      }
    }
  }
}

TEST(HarmonicBasis, ExactFormsOrthogonalToHarmonic) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus());
  auto ops = assemble(p.omega.child);
  const auto hb = harmonic_basis(ops, 1);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    const Vec da = ops->coboundary(0) * random_normal(ops->count(0), rng);
    const Vec ip = harmonic_moments(*ops, hb, da);
    EXPECT_LE(ip.cwiseAbs().maxCoeff(), 1e-12 * m_norm(ops->mass(1), da));
  }
}

TEST(HodgeSplit, TrivialInputs) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus());
  auto ops = assemble(p.omega.child);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(2);
  const Cochain ex(1, ops->complex(), ops->coboundary(0) * random_normal(ops->count(0), rng));
  const auto s = hodge_decompose(hs, ex);
  EXPECT_LT((s.exact.values - ex.values).norm(), 1e-10 * ex.values.norm());
  EXPECT_LT(s.coexact.values.norm() + s.harmonic.values.norm(), 1e-10 * ex.values.norm());
  EXPECT_LT((d(s.potential_alpha).values - s.exact.values).norm(), 1e-10 * ex.values.norm());
  const auto hb = harmonic_basis(hs, 1);
  const auto sh = hodge_decompose(hs, hb.element(0));
  EXPECT_LT(sh.exact.values.norm() + sh.coexact.values.norm(), 1e-10);
  EXPECT_LT((sh.harmonic.values - hb.columns.col(0)).norm(), 1e-10);
}

TEST(HodgeSplit, OrthogonalComponentsAndReconstruction) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus());
  auto ops = assemble(p.omega.child);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(3);
  for (int k = 0; k <= 2; ++k) {
    const Cochain w(k, ops->complex(), random_normal(ops->count(k), rng));
    const auto s = hodge_decompose(hs, w);
    const double nw = l2_norm(*ops, w);
    EXPECT_LT((s.exact.values + s.coexact.values + s.harmonic.values - w.values).norm(), 1e-12 * w.values.norm());
    EXPECT_LT(std::abs(inner(*ops, s.exact, s.coexact)), 1e-10 * nw * nw);
    EXPECT_LT(std::abs(inner(*ops, s.exact, s.harmonic)), 1e-10 * nw * nw);
    EXPECT_LT(std::abs(inner(*ops, s.coexact, s.harmonic)), 1e-10 * nw * nw);
    EXPECT_LT(l2_norm(*ops, d(s.coexact) ) - l2_norm(*ops, d(w)), 1e-10 * (1 + nw));
    EXPECT_LT((d(s.potential_beta).values - d(w).values).norm(), 1e-10 * (1 + d(w).values.norm()));
  }
}

TEST(HodgeSplit, MatchesDenseOracleOnTwoTriangles) {
  auto c = fixtures::square(1.0);
  auto ops = assemble(c);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(4);
  for (int k = 0; k <= 2; ++k) {
    const Cochain w(k, c, random_normal(c->count(k), rng));
    const auto s = hodge_decompose(hs, w);
    const auto o = oracle::hodge(dense(ops->coboundary(k - 1)), dense(ops->coboundary(k)),
                                 k ? dense(ops->mass(k - 1)) : Mat(0, 0), dense(ops->mass(k)), w.values);
    EXPECT_LT((s.exact.values - o.exact).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((s.coexact.values - o.coexact).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((s.harmonic.values - o.harmonic).cwiseAbs().maxCoeff(), 1e-10);
    if (k) EXPECT_LT((s.potential_alpha.values - o.alpha).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MinimalNormPotential, MatchesOracleAndIsMinimal) {
  auto p = fixtures::split(0.25, fixtures::annulus(0.12, 0.45));
  auto ops = assemble(p.omega.child);
  ASSERT_LE(ops->count(1), 200);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(5);
  for (int k = 1; k <= 2; ++k) {
    const Cochain w(k, ops->complex(), random_normal(ops->count(k), rng));
    const Cochain a = minimal_norm_potential(hs, w);
    const Mat dp = dense(ops->coboundary(k - 1));
    const Vec pex = oracle::range_projector(dp, dense(ops->mass(k))) * w.values;
    const Vec ao = oracle::min_norm(dp, dense(ops->mass(k - 1)), pex);
    EXPECT_LT((a.values - ao).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((dp * a.values - pex).cwiseAbs().maxCoeff(), 1e-10);
    // Any other potential (shifted by a closed cochain) is at least as long.
    const Mat z = oracle::null_space(dp, dp.cols());
    for (Index j = 0; j < z.cols(); ++j) {
      const Cochain other(k - 1, ops->complex(), a.values + z.col(j));
      EXPECT_GE(l2_norm(*ops, other), l2_norm(*ops, a) - 1e-12);
      EXPECT_LT(std::abs(z.col(j).dot(ops->mass(k - 1) * a.values)), 1e-10);
    }
  }
}

TEST(MinimalNormPotential, HarmonicOrCoexactGivesZero) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus());
  auto ops = assemble(p.omega.child);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(6);
  const Cochain w(1, ops->complex(), random_normal(ops->count(1), rng));
  const auto s = hodge_decompose(hs, w);
  EXPECT_LT(minimal_norm_potential(hs, s.harmonic).values.norm(), 1e-10 * w.values.norm());
  EXPECT_LT(minimal_norm_potential(hs, s.coexact).values.norm(), 1e-10 * w.values.norm());
}

TEST(MinimalNormPotential, ZeroTraceConstraintSpace) {
  auto p = fixtures::split(1.0 / 8, fixtures::disk());
  auto ops = assemble(p.exterior.child);
  HodgeSolver hs(ops, BoundaryCondition::relative());
  std::mt19937_64 rng(7);
  Vec v = random_normal(ops->count(0), rng);
  for (Index i : ops->trace_dofs(0, kBoundaryLabel)) v(i) = 0;
  const Cochain w(1, ops->complex(), ops->coboundary(0) * v);
  const Cochain a = minimal_norm_potential(hs, w);
  for (Index i : ops->trace_dofs(0, kBoundaryLabel)) EXPECT_EQ(a.values(i), 0.0);
  EXPECT_LT((d(a).values - w.values).cwiseAbs().maxCoeff(), 1e-10 * w.values.cwiseAbs().maxCoeff());
  // Nonzero essential DOFs are rejected.
  EXPECT_THROW(minimal_norm_potential(hs, Cochain(1, ops->complex(), Vec::Ones(ops->count(1)))), std::invalid_argument);
}

TEST(ProjectExact, ProjectorProperties) {
  auto p = fixtures::split(1.0 / 8, fixtures::annulus());
  auto ops = assemble(p.omega.child);
  HodgeSolver hs(ops, {});
  std::mt19937_64 rng(8);
  const Cochain w(1, ops->complex(), random_normal(ops->count(1), rng));
  const Cochain pw = project_exact(hs, w);
  const Cochain ppw = project_exact(hs, pw);
  EXPECT_LE(l2_norm(*ops, Cochain(1, ops->complex(), ppw.values - pw.values)), 1e-10 * l2_norm(*ops, w));
  const auto hb = harmonic_basis(hs, 1);
  EXPECT_LT(project_exact(hs, hb.element(0)).values.norm(), 1e-10);
}

TEST(HarmonicBasis, DenseOracleDimensionsOnCoarseMeshes) {
  auto p = fixtures::split(0.25, fixtures::annulus(0.12, 0.45));
  auto ops = assemble(p.exterior.child);
  for (int k = 0; k <= 2; ++k) {
    HodgeSolver hs(ops, {});
    EXPECT_EQ(hs.harmonic_dim(k), oracle::harmonic_dim(dense(ops->coboundary(k - 1)), dense(ops->coboundary(k)), ops->count(k)));
  }
}
