#include <cext/extension.hpp>
#include <gtest/gtest.h>

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"

using namespace cext;

namespace {

Mat dense(const SpMat& a) { return Mat(a); }

ProblemPtr annulus_problem(double h, ExtensionVariant v, double ri = 0.15, double ro = 0.4) {
  auto k = fixtures::square(h);
  return std::make_shared<const ExtensionProblem>(k, barycenter_selection(*k, *fixtures::annulus(ri, ro)), v);
}

ProblemPtr disk_problem(double h, ExtensionVariant v, double r = 0.3) {
  auto k = fixtures::square(h);
  return std::make_shared<const ExtensionProblem>(k, barycenter_selection(*k, *fixtures::disk(r)), v);
}

const ExtensionVariant kVariants[] = {ExtensionVariant::ZeroTrace, ExtensionVariant::Mixed};

/// Dense oracle for the recursive step: minimize |lambda|_M over all A
/// DOFs subject to every coboundary row, the fixed DOFs and the moments.
Vec oracle_step(const ExtensionProblem& p, const Cochain& omega, const Cochain& xi) {
  const int k = omega.degree;
  const auto& ops = *p.ops_a();
  const Mat m = dense(ops.mass(k));
  const Mat dk = dense(ops.coboundary(k));
  const Vec lift = p.lift_trace(omega);
  const IndexList& fixed = p.fixed_dofs(k);
  const auto& hb = p.harmonic_a(k);
  const Vec c = p.harmonic_coefficients(omega);
  const Index rows = dk.rows() + static_cast<Index>(fixed.size()) + hb.dim();
  Mat a = Mat::Zero(rows, m.cols());
  Vec b = Vec::Zero(rows);
  a.topRows(dk.rows()) = dk;
  b.head(dk.rows()) = xi.values;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    a(dk.rows() + static_cast<Index>(i), fixed[i]) = 1.0;
    b(dk.rows() + static_cast<Index>(i)) = lift(fixed[i]);
  }
  for (Index j = 0; j < hb.dim(); ++j) {
    a.row(dk.rows() + static_cast<Index>(fixed.size()) + j) = (m * hb.columns.col(j)).transpose();
    b(dk.rows() + static_cast<Index>(fixed.size()) + j) = c(j);
  }
  return oracle::qp(m, Vec::Zero(m.cols()), a, b);
}

}  // namespace

TEST(Problem, GeometryAndHarmonicSpaces) {
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::ZeroTrace);
  EXPECT_GT(p->rho(), 0.0);
  EXPECT_EQ(p->harmonic_omega(1).dim(), 1);
  // A = inner hole plus outer ring; H^2(A, dA) counts components.
  const auto ba = betti_numbers(*p->exterior_map().child);
  EXPECT_EQ(ba[0], 2);
  EXPECT_EQ(p->harmonic_a(2).dim(), 2);
  // Mixed: only the hole (whose whole boundary is interface) carries a top-degree field.
  auto pm = annulus_problem(1.0 / 8, ExtensionVariant::Mixed);
  EXPECT_EQ(pm->harmonic_a(2).dim(), 1);
  EXPECT_EQ(pm->harmonic_a(1).dim(), 0);
}

TEST(Problem, ZeroTraceNeedsSeparation) {
  auto k = fixtures::square(1.0 / 8);
  auto big = std::make_shared<Ball>(Vec::Constant(2, 0.5), 0.55);
  EXPECT_THROW(ExtensionProblem(k, barycenter_selection(*k, *big), ExtensionVariant::ZeroTrace), std::invalid_argument);
  EXPECT_NO_THROW(ExtensionProblem(k, barycenter_selection(*k, *big), ExtensionVariant::Mixed));
}

TEST(Problem, TopDegreeHarmonicFieldsArePiecewiseConstant) {
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::ZeroTrace);
  const auto& hb = p->harmonic_a(2);
  const auto& a = *p->exterior_map().child;
  // Density of the Whitney 2-form: value * orientation sign / area.
  Vec sign(a.count(2));
  for (Index t = 0; t < a.count(2); ++t) {
    const Mat c = a.coords(2, t);
    Mat e(2, 2);
    e << c(1, 0) - c(0, 0), c(2, 0) - c(0, 0), c(1, 1) - c(0, 1), c(2, 1) - c(0, 1);
    sign(t) = e.determinant() > 0 ? 1.0 : -1.0;
  }
  const SpMat& d1 = a.coboundary(1);
  for (Index j = 0; j < hb.dim(); ++j) {
    // Equal density across every interior edge of A: constant per component.
    double worst = 0.0, scale = 0.0;
    for (Index e = 0; e < d1.outerSize(); ++e) {
      std::vector<double> dens;
      for (SpMat::InnerIterator it(d1, e); it; ++it)
        dens.push_back(hb.columns(it.row(), j) * sign(it.row()) / a.measure(2, it.row()));
      for (double v : dens) scale = std::max(scale, std::abs(v));
      if (dens.size() == 2) worst = std::max(worst, std::abs(dens[0] - dens[1]));
    }
    EXPECT_LT(worst, 1e-8 * scale);
  }
}

TEST(Extend, ZeroDatumGivesZero) {
  for (auto v : kVariants) {
    auto p = annulus_problem(1.0 / 8, v);
    for (int k = 0; k <= 2; ++k) {
      const auto r = p->extend(Cochain::zero(k, p->omega_map().child));
      EXPECT_EQ(r.extended.values.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(r.residuals.gauge, 0.0);
    }
    const auto r = p->extend_recursive(Cochain::zero(1, p->omega_map().child), Cochain::zero(2, p->exterior_map().child));
    EXPECT_EQ(r.lambda.values.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Extend, RestrictionCochainAndGaugeIdentities) {
  std::mt19937_64 rng(21);
  for (auto v : kVariants) {
    auto p = annulus_problem(1.0 / 8, v);
    for (int k = 0; k <= 2; ++k) {
      for (int t = 0; t < 3; ++t) {
        const Cochain w = p->random_datum(k, rng);
        const auto r = p->extend(w);
        EXPECT_EQ((restrict_to(r.extended, p->omega_map()).values - w.values).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_LE(r.cochain_identity, 1e-10);
        EXPECT_LE(r.residuals.gauge, 1e-9);
        EXPECT_LE(r.residuals.compatibility, 1e-10);
        if (v == ExtensionVariant::ZeroTrace)
          for (Index i : p->k_complex()->label(kBoundaryLabel, k)) EXPECT_EQ(r.extended.values(i), 0.0);
      }
    }
  }
}

TEST(Extend, ZeroTraceResultExtendsByZeroConformingly) {
  // K = unit square inside a larger background; the zero-trace extension
  // pads by zero without changing norms.
  Box big{Vec::Constant(2, -0.25), Vec::Constant(2, 1.25)};
  auto bg = build_box_complex(big, 1.0 / 8, 2);
  BoxShape unit(Vec::Zero(2), Vec::Ones(2));
  const auto kmap = extract_subcomplex(bg, unit);
  ExtensionProblem p(kmap.child, barycenter_selection(*kmap.child, *fixtures::annulus()), ExtensionVariant::ZeroTrace);
  std::mt19937_64 rng(22);
  auto opsbg = assemble(bg);
  for (int k = 0; k <= 1; ++k) {
    const auto r = p.extend(p.random_datum(k, rng));
    const Cochain padded = extend_by_zero(r.extended, kmap);
    EXPECT_NEAR(graph_norm(*opsbg, padded), graph_norm(*p.ops_k(), r.extended), 1e-12 * graph_norm(*opsbg, padded));
  }
}

TEST(Extend, ExactDatumHasClosedExtension) {
  std::mt19937_64 rng(23);
  for (auto v : kVariants) {
    auto p = annulus_problem(1.0 / 8, v);
    const auto& om = *p->ops_omega();
    const Cochain eta(0, p->omega_map().child, random_normal(om.count(0), rng));
    const Cochain w = d(eta);
    const auto r = p->extend(w);
    EXPECT_LT(l2_norm(*p->ops_k(), d(r.extended)), 1e-10 * l2_norm(om, w));
    // The ratio then only involves L2 norms.
    EXPECT_NEAR(r.ratio, l2_norm(*p->ops_k(), r.extended) / l2_norm(om, w), 1e-8 * r.ratio);
  }
}

TEST(Extend, HarmonicDatumRejectedUnlessProjected) {
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::Mixed);
  const Cochain q = p->harmonic_omega(1).element(0);
  EXPECT_THROW(p->extend(q), std::invalid_argument);
  ExtendOptions opt;
  opt.project_harmonic = true;
  std::mt19937_64 rng(24);
  const Cochain w(1, q.complex, p->random_datum(1, rng).values + q.values);
  const auto r = p->extend(w, opt);
  EXPECT_TRUE(r.harmonic_removed);
  EXPECT_NEAR(r.harmonic_norm, 1.0, 1e-8);
  EXPECT_LE(r.cochain_identity, 1e-10);
}

TEST(Extend, InfeasibleDataIsLoud) {
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::ZeroTrace);
  std::mt19937_64 rng(25);
  const Cochain w = p->random_datum(0, rng);
  // A random xi is not closed and does not match d(omega) on the interface.
  const Cochain xi(1, p->exterior_map().child, random_normal(p->ops_a()->count(1), rng));
  EXPECT_THROW(p->extend_recursive(w, xi), SolverError);
}

TEST(Extend, RecursiveStepMatchesDenseOracle) {
  std::mt19937_64 rng(26);
  for (auto v : kVariants) {
    auto p = annulus_problem(1.0 / 6, v, 0.12, 0.36);
    ASSERT_LE(p->ops_a()->count(1), 200);
    for (int k = 0; k <= 1; ++k) {
      const Cochain w = p->random_datum(k, rng);
      const auto full = p->extend(w);
      const Cochain xi = restrict_to(full.extended_d, p->exterior_map());
      const auto r = p->extend_recursive(w, xi);
      const Vec o = oracle_step(*p, w, xi);
      EXPECT_LT((r.lambda.values - o).cwiseAbs().maxCoeff(), 1e-9) << to_string(v) << " k=" << k;
    }
  }
}

TEST(Extend, TopDegreeMatchesDenseRiesz) {
  std::mt19937_64 rng(27);
  auto p = annulus_problem(1.0 / 6, ExtensionVariant::ZeroTrace, 0.12, 0.36);
  const auto& ops = *p->ops_a();
  // Dense harmonic space: top forms M-orthogonal to D of zero-trace 1-cochains.
  const IndexList& free1 = p->hodge_a().sequence().free_dofs(1);
  const Mat dfree = dense(select(ops.coboundary(1), iota(ops.count(2)), free1));
  const Mat m2 = dense(ops.mass(2));
  const Mat q = oracle::null_space(dfree.transpose() * m2, ops.count(2));
  ASSERT_EQ(q.cols(), p->harmonic_a(2).dim());
  const Cochain w = p->random_datum(2, rng);
  const auto r = p->extend_top_degree(w);
  // Riesz representer of q -> (D alpha_A, q): the M-projection of D alpha_A onto span(q).
  const Cochain alpha = minimal_norm_potential(p->hodge_omega(), w);
  const Vec dalpha = dense(ops.coboundary(1)) * p->lift_trace(alpha);
  const Vec lam = q * (q.transpose() * m2 * q).ldlt().solve(q.transpose() * m2 * dalpha);
  EXPECT_LT((r.lambda.values - lam).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(HarmonicCoefficients, LiftingInsensitiveAndDegreeZero) {
  std::mt19937_64 rng(28);
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::ZeroTrace);
  EXPECT_EQ(p->harmonic_coefficients(p->random_datum(0, rng)).cwiseAbs().sum(), 0.0);
  const Cochain w = p->random_datum(2, rng);
  const Cochain alpha = minimal_norm_potential(p->hodge_omega(), w);
  const auto& ops = *p->ops_a();
  Vec lift = p->lift_trace(alpha);
  Vec other = lift;
  for (Index i : p->hodge_a().sequence().free_dofs(1)) other(i) += std::normal_distribution<double>()(rng);
  const auto& hb = p->harmonic_a(2);
  const Vec c1 = harmonic_moments(ops, hb, ops.coboundary(1) * lift);
  const Vec c2 = harmonic_moments(ops, hb, ops.coboundary(1) * other);
  EXPECT_LT((c1 - c2).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, c1.cwiseAbs().maxCoeff()));
  EXPECT_LT((p->harmonic_coefficients(w) - c1).cwiseAbs().maxCoeff(), 1e-14);
  // Simply connected exterior in degree 1 for the mixed disk problem: no coefficients.
  auto pd = disk_problem(1.0 / 8, ExtensionVariant::Mixed);
  EXPECT_EQ(pd->harmonic_coefficients(pd->random_datum(1, rng)).size(), 0);
}

TEST(Extend, MinimalAgainstAdmissibleCompetitor) {
  std::mt19937_64 rng(29);
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::ZeroTrace);
  const auto& ops = *p->ops_a();
  const auto& seq = p->hodge_a().sequence();
  for (int k = 0; k <= 1; ++k) {
    const Cochain w = p->random_datum(k, rng);
    const auto r = p->extend(w);
    const Vec xi = restrict_to(r.extended_d, p->exterior_map()).values;
    // Competitor: lifting plus a zero-trace correction with a crude (non-minimal) potential.
    const Vec lift = p->lift_trace(w);
    const Vec defect = seq.reduce(k + 1, xi - ops.coboundary(k) * lift);
    const SpMat df = seq.d(k);
    const IndexList piv = independent_cols(df);
    const SpMat dj = select(df, iota(df.rows()), piv);
    Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr(dj);
    Vec corr = seq.expand(k, scatter(qr.solve(defect), piv, seq.size(k)));
    Vec comp = lift + corr;
    const auto& hb = p->harmonic_a(k);
    if (hb.dim()) comp += hb.columns * (r.coefficients - harmonic_moments(ops, hb, comp));
    EXPECT_LT((ops.coboundary(k) * comp - xi).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(m_norm(ops.mass(k), r.lambda.values), m_norm(ops.mass(k), comp) + 1e-12);
  }
}

TEST(Gauge, PerturbationBreaksOptimality) {
  std::mt19937_64 rng(30);
  auto p = annulus_problem(1.0 / 8, ExtensionVariant::Mixed);
  const auto r = p->extend(p->random_datum(1, rng));
  EXPECT_LE(p->gauge_residual(r), 1e-9);
  const auto& seq = p->hodge_a().sequence();
  Vec tau = seq.expand(0, random_normal(seq.size(0), rng));
  ExtensionResult bad = r;
  bad.lambda.values += 0.1 * (p->ops_a()->coboundary(0) * tau);
  EXPECT_GT(p->gauge_residual(bad), 1e-4);
  ExtensionResult zero = r;
  zero.lambda.values.setZero();
  EXPECT_EQ(p->gauge_residual(zero), 0.0);
}

TEST(Nested, CochainIdentityAndComparison) {
  std::mt19937_64 rng(31);
  auto p = disk_problem(1.0 / 8, ExtensionVariant::Mixed);
  EXPECT_EQ(p->extend_nested(Cochain::zero(1, p->omega_map().child)).extended.values.cwiseAbs().maxCoeff(), 0.0);
  for (int k = 0; k <= 1; ++k) {
    // Arbitrary data: the disk has no harmonic fields to remove.
    const Cochain w(k, p->omega_map().child, random_normal(p->ops_omega()->count(k), rng));
    const auto rn = p->extend_nested(w);
    EXPECT_TRUE(rn.warning.empty());
    EXPECT_LE(rn.cochain_identity, 1e-9);
    EXPECT_EQ((restrict_to(rn.extended, p->omega_map()).values - w.values).cwiseAbs().maxCoeff(), 0.0);
    const auto re = p->extend(w, ExtendOptions{true});
    const auto rn2 = p->extend_nested(restrict_to(re.extended, p->omega_map()));
    EXPECT_LE(l2_norm(*p->ops_k(), rn2.extended), l2_norm(*p->ops_k(), re.extended) + 1e-10);
  }
  auto pa = annulus_problem(1.0 / 8, ExtensionVariant::Mixed);
  EXPECT_FALSE(pa->extend_nested(pa->random_datum(0, rng)).warning.empty());
}

TEST(Probe, AmbientTopologyDecidesFeasibility) {
  // Omega: annulus 0.2 < r < 0.35. K1 keeps a smaller hole (r < 0.1), K2 is a disk.
  auto bg = fixtures::square(1.0 / 16);
  auto k1 = extract_subcomplex(bg, Shell(fixtures::center(), 0.1, 0.48)).child;
  auto k2 = extract_subcomplex(bg, Ball(fixtures::center(), 0.48)).child;
  Shell omega(fixtures::center(), 0.2, 0.35);
  ExtensionProblem p1(k1, barycenter_selection(*k1, omega), ExtensionVariant::Mixed);
  ExtensionProblem p2(k2, barycenter_selection(*k2, omega), ExtensionVariant::Mixed);
  ASSERT_EQ(p1.harmonic_omega(1).dim(), 1);
  const auto r1 = p1.harmonic_extension_probe(p1.harmonic_omega(1).element(0));
  const auto r2 = p2.harmonic_extension_probe(p2.harmonic_omega(1).element(0));
  EXPECT_TRUE(r1.feasible);
  EXPECT_LE(r1.residual, 1e-8);
  EXPECT_FALSE(r2.feasible);
  EXPECT_GT(r2.residual, 0.1);
  const auto r0 = p2.harmonic_extension_probe(Cochain::zero(1, p2.omega_map().child));
  EXPECT_TRUE(r0.feasible);
  EXPECT_EQ(r0.lambda.values.cwiseAbs().maxCoeff(), 0.0);
}
