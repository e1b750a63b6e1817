// First nonzero eigenvalues of the Hodge-Laplace Rayleigh quotient
// |D w|^2 / |w|^2 over the complement of the closed forms, Poincare
// constants, the convex-domain relations between them, and the scans over
// domain families.
#pragma once

#include "extension.hpp"

#include <chrono>

namespace cext {

enum class Convention { NeumannCoclosed, Dirichlet, Stabilized };

inline std::string to_string(Convention c) {
  switch (c) {
    case Convention::NeumannCoclosed: return "neumann-coclosed";
    case Convention::Dirichlet: return "dirichlet";
    case Convention::Stabilized: return "stabilized";
  }
  return "?";
}

inline Convention convention_from_string(const std::string& s) {
  if (s == "neumann" || s == "neumann-coclosed") return Convention::NeumannCoclosed;
  if (s == "dirichlet") return Convention::Dirichlet;
  if (s == "stabilized") return Convention::Stabilized;
  throw std::invalid_argument("unknown convention '" + s + "'");
}

struct SpectralReport {
  std::string geometry;
  double h = std::numeric_limits<double>::quiet_NaN();
  int degree = 0;
  Convention convention = Convention::NeumannCoclosed;
  double lambda1 = 0.0;            // 1/length^2
  double poincare_constant = 0.0;  // length
  Index kernel_dim = 0;            // dim ker D_k on the constrained space
  Index expected_kernel_dim = 0;   // Betti number + rank D_{k-1}
  double residual = 0.0;           // Lanczos residual estimate
  int iterations = 0;
  Vec eigenvector;                 // full-length, M-normalized coexact eigenvector
};

/// lambda_1 of D'M D x = lambda M x on the M-complement of ker D_k, using the
/// (possibly constrained or re-weighted) sequence of the solver. The largest
/// eigenvalue of the inverse operator is found by Lanczos.
inline SpectralReport first_eigenvalue(const HodgeSolver& hs, int k, Convention conv, std::uint64_t seed = 0x1a2b3cULL) {
  const auto& seq = hs.sequence();
  const int n = seq.dim();
  if (k < 0 || k >= n) throw std::invalid_argument("eigenvalue degree must satisfy 0 <= k <= n-1");
  SpectralReport rep;
  rep.degree = k;
  rep.convention = conv;
  rep.kernel_dim = hs.kernel_dim(k);
  const auto betti = seq.bc().constrained() ? betti_numbers(*seq.complex(), seq.bc().label) : betti_numbers(*seq.complex());
  rep.expected_kernel_dim = betti[static_cast<std::size_t>(k)] + hs.rank(k - 1);
  if (hs.rank(k) == 0) throw SolverError("no coexact " + std::to_string(k) + "-forms: the eigenproblem is empty");
  const SpMat& m = seq.mass(k);
  auto op = [&](const Vec& x) -> Vec {
    const Vec z = hs.stiffness_solve_reduced(k, m * x);
    return hs.coexact_reduced(k, z);
  };
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
  const Vec start = hs.coexact_reduced(k, random_normal(seq.size(k), rng));
  const LanczosResult lr = lanczos_largest(op, m, start, static_cast<int>(std::min<Index>(400, hs.rank(k))));
  if (!(lr.theta > 0)) throw SolverError("eigen solver produced a non-positive Ritz value");
  rep.lambda1 = 1.0 / lr.theta;
  rep.poincare_constant = std::sqrt(lr.theta);
  rep.residual = lr.residual;
  rep.iterations = lr.iterations;
  rep.eigenvector = seq.expand(k, lr.vector);
  return rep;
}

/// Neumann (absolute) or Dirichlet (zero trace on `label`) Poincare constant.
inline SpectralReport poincare_constant(const OpsPtr& ops, int k, Convention conv, const std::string& label = kBoundaryLabel) {
  if (conv == Convention::Stabilized) throw std::invalid_argument("stabilized constants need stabilized operators (see cutfem)");
  const BoundaryCondition bc = conv == Convention::Dirichlet ? BoundaryCondition::relative(label) : BoundaryCondition::absolute();
  HodgeSolver hs(ops, bc);
  return first_eigenvalue(hs, k, conv);
}

struct Check {
  std::string name;
  std::string claim;  // tag of the statement being checked
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
  bool informational = false;
};

inline Check check_le(std::string name, std::string claim, double lhs, double rhs, double slack = 0.0) {
  return Check{std::move(name), std::move(claim), lhs, rhs, lhs <= rhs * (1.0 + slack), false};
}

struct ConvexRelationsReport {
  double diameter = 0.0;
  std::vector<double> lambda;  // Neumann (coclosed) values, degrees 0..n; degree n filled by duality
  std::vector<double> kappa;   // Dirichlet values, degrees 0..n; degree n filled by duality
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.informational && !c.pass) return false;
    return true;
  }
};

/// Relations for a convex mesh: diameter bounds, degree chains (5% slack),
/// reciprocal identities. lambda^(n) = kappa^(0) and kappa^(n) = lambda^(0)
/// by Hodge duality, so only degrees 0..n-1 are solved.
inline ConvexRelationsReport convex_relations(const ComplexPtr& c, double slack = 0.05) {
  const int n = c->dim();
  auto ops = assemble(c);
  ConvexRelationsReport rep;
  rep.diameter = hull_diameter(*c);
  const double dd = rep.diameter * rep.diameter;
  rep.lambda.resize(static_cast<std::size_t>(n + 1));
  rep.kappa.resize(static_cast<std::size_t>(n + 1));
  std::vector<double> cp(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto a = poincare_constant(ops, k, Convention::NeumannCoclosed);
    const auto b = poincare_constant(ops, k, Convention::Dirichlet);
    rep.lambda[static_cast<std::size_t>(k)] = a.lambda1;
    rep.kappa[static_cast<std::size_t>(k)] = b.lambda1;
    cp[static_cast<std::size_t>(k)] = a.poincare_constant;
    rep.checks.push_back(Check{"reciprocal C_P^(" + std::to_string(k) + ")", "C_P = 1/sqrt(lambda_1)",
                               a.poincare_constant * std::sqrt(a.lambda1), 1.0,
                               std::abs(a.poincare_constant * std::sqrt(a.lambda1) - 1.0) <= 1e-12, false});
    rep.checks.push_back(Check{"reciprocal C_P0^(" + std::to_string(k) + ")", "C_P0 = 1/sqrt(kappa_1)",
                               b.poincare_constant * std::sqrt(b.lambda1), 1.0,
                               std::abs(b.poincare_constant * std::sqrt(b.lambda1) - 1.0) <= 1e-12, false});
    rep.checks.push_back(check_le("C_P^(" + std::to_string(k) + ") <= diam/pi", "convex upper bound diam/pi",
                                  a.poincare_constant, rep.diameter / M_PI));
    rep.checks.push_back(check_le("C_P0^(" + std::to_string(k) + ") <= diam/pi", "convex upper bound diam/pi",
                                  b.poincare_constant, rep.diameter / M_PI));
  }
  rep.lambda[static_cast<std::size_t>(n)] = rep.kappa[0];
  rep.kappa[static_cast<std::size_t>(n)] = rep.lambda[0];
  rep.checks.push_back(check_le("pi^2/diam^2 <= lambda_1^(0)", "pi^2/diam^2 <= lambda_1^(0)", M_PI * M_PI / dd, rep.lambda[0]));
  rep.checks.push_back(check_le("n pi^2/diam^2 <= kappa_1^(0)", "n pi^2/diam^2 <= kappa_1^(0)", n * M_PI * M_PI / dd, rep.kappa[0]));
  if (n >= 2) {
    Check eq{"lambda_1^(0) = lambda_1^(2)", "degree chain equality (not expected to hold)", rep.lambda[0], rep.lambda[2],
             std::abs(rep.lambda[0] - rep.lambda[2]) <= slack * rep.lambda[2], true};
    rep.checks.push_back(eq);
  }
  for (int k = 1; k < n; ++k)
    rep.checks.push_back(check_le("lambda_1^(" + std::to_string(k) + ") <= lambda_1^(" + std::to_string(k + 1) + ")",
                                  "degree chain for lambda", rep.lambda[static_cast<std::size_t>(k)],
                                  rep.lambda[static_cast<std::size_t>(k + 1)], slack));
  rep.checks.push_back(Check{"kappa_1^(n) = kappa_1^(n-1)", "degree chain for kappa (equality)", rep.kappa[static_cast<std::size_t>(n)],
                             rep.kappa[static_cast<std::size_t>(n - 1)],
                             std::abs(rep.kappa[static_cast<std::size_t>(n)] - rep.kappa[static_cast<std::size_t>(n - 1)]) <=
                                 slack * rep.kappa[static_cast<std::size_t>(n - 1)],
                             false});
  for (int k = n - 1; k >= 1; --k)
    rep.checks.push_back(check_le("kappa_1^(" + std::to_string(k) + ") <= kappa_1^(" + std::to_string(k - 1) + ")",
                                  "degree chain for kappa", rep.kappa[static_cast<std::size_t>(k)],
                                  rep.kappa[static_cast<std::size_t>(k - 1)], slack));
  (void)cp;
  return rep;
}

/// sup |u|/|Du| over zero-trace u (free DOFs of `bc`) that are M-orthogonal to
/// every closed cochain, not only the zero-trace ones. Each T x solves a KKT
/// system whose constraints are the pivot rows of D_{k-1}' M and the absolute
/// harmonic moments.
inline double orthogonal_to_closed_dirichlet_constant(const OpsPtr& ops, int k, const std::string& label = kBoundaryLabel) {
  const ReducedSequence seq(ops, BoundaryCondition::relative(label));
  const HodgeSolver abs(ops, BoundaryCondition::absolute());
  const IndexList& free = seq.free_dofs(k);
  const Index nf = static_cast<Index>(free.size());
  if (nf == 0) throw SolverError("no free DOFs");
  const SpMat mk = select(ops->mass(k), free, free);
  const SpMat dk = select(ops->coboundary(k), iota(ops->count(k + 1)), free);
  const SpMat s = SpMat(dk.transpose()) * ops->mass(k + 1) * dk;
  Mat c(0, nf);
  if (k > 0 && abs.rank(k - 1) > 0) {
    const SpMat dj = select(ops->coboundary(k - 1), iota(ops->count(k)), abs.pivot_columns(k - 1));
    const SpMat full = SpMat(dj.transpose()) * ops->mass(k);
    c = Mat(select(full, iota(full.rows()), free));
  }
  const auto hb = harmonic_basis(abs, k);
  if (hb.dim() > 0) {
    const Mat hm = Mat((ops->mass(k) * hb.columns).transpose());
    Mat rows(hm.rows(), nf);
    for (Index j = 0; j < nf; ++j) rows.col(j) = hm.col(free[static_cast<std::size_t>(j)]);
    Mat both(c.rows() + rows.rows(), nf);
    both << c, rows;
    c = both;
  }
  // Rows can lose rank once restricted to the free DOFs; keep a well-conditioned subset.
  if (c.rows() > 0) {
    Eigen::ColPivHouseholderQR<Mat> qr(c.transpose());
    qr.setThreshold(1e-10);
    const Index r = qr.rank();
    Mat keep(r, nf);
    for (Index i = 0; i < r; ++i) keep.row(i) = c.row(qr.colsPermutation().indices()(i));
    c = keep;
  }
  const Index nc = c.rows();
  std::vector<Triplet> t;
  for (Index col = 0; col < s.outerSize(); ++col)
    for (SpMat::InnerIterator it(s, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index i = 0; i < nc; ++i)
    for (Index j = 0; j < nf; ++j)
      if (c(i, j) != 0.0) {
        t.emplace_back(nf + i, j, c(i, j));
        t.emplace_back(j, nf + i, c(i, j));
      }
  SpMat kkt(nf + nc, nf + nc);
  kkt.setFromTriplets(t.begin(), t.end());
  kkt.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(kkt);
  lu.factorize(kkt);
  if (lu.info() != Eigen::Success) throw SolverError("constrained Dirichlet factorization failed: " + lu.lastErrorMessage());
  auto op = [&](const Vec& x) -> Vec {
    Vec rhs = Vec::Zero(nf + nc);
    rhs.head(nf) = mk * x;
    Vec sol = lu.solve(rhs);
    sol += lu.solve(Vec(rhs - kkt * sol));
    return sol.head(nf);
  };
  std::mt19937_64 rng(0x70c0ULL + static_cast<std::uint64_t>(k));
  const Vec start = op(random_normal(nf, rng));
  const LanczosResult lr = lanczos_largest(op, mk, start, static_cast<int>(std::min<Index>(400, nf)));
  return std::sqrt(lr.theta);
}

struct MonotonicityReport {
  int degree = 0;
  double c_exterior = 0.0;  // C_P0(A), zero-trace complement of the zero-trace closed forms
  double c_k = 0.0;         // C_P0(K)
  double c_exterior_closed_orth = 0.0;  // A constant over zero-trace forms orthogonal to all closed forms
  bool pass = false;
  bool closed_orth_pass = false;
};

/// C_P0(A) <= C_P0(K) for A = K minus Omega (Dirichlet on the full boundary of
/// each). The extension-by-zero argument only controls the smaller space of
/// forms orthogonal to every closed form on A, reported separately.
inline MonotonicityReport dirichlet_monotonicity_check(const ExtensionProblem& p, int k, double tol = 1e-8) {
  MonotonicityReport r;
  r.degree = k;
  r.c_exterior = poincare_constant(p.ops_a(), k, Convention::Dirichlet).poincare_constant;
  r.c_k = poincare_constant(p.ops_k(), k, Convention::Dirichlet).poincare_constant;
  r.c_exterior_closed_orth = orthogonal_to_closed_dirichlet_constant(p.ops_a(), k);
  r.pass = r.c_exterior <= r.c_k + tol;
  r.closed_orth_pass = r.c_exterior_closed_orth <= r.c_k + tol;
  return r;
}

struct UniformScanRow {
  std::string member;
  int degree = 0;
  double c_neumann = 0.0;       // C_P(Omega_i)
  double c_dirichlet = 0.0;     // C_P0(Omega_i)
  double extension_ratio = 0.0; // max |lambda|_A / |sigma|_Omega over the exact data tried
  double bound_proxy = 0.0;     // C_P(K) (1 + max_i extension_ratio)
  Index components = 0;
  Index holes = 0;
  double seconds = 0.0;
};

struct UniformScanReport {
  double c_k = 0.0;     // C_P(K) per degree is stored per row; this is for degree 0
  std::vector<double> c_k_by_degree;
  std::vector<double> c0_k_by_degree;
  std::vector<UniformScanRow> rows;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.informational && !c.pass) return false;
    return true;
  }
};

/// For each family member Omega_i inside K and each degree k: the Neumann and
/// Dirichlet constants of Omega_i and the measured extension ratio of exact
/// (k+1)-data. Checks max_i C_P(Omega_i) <= C_P(K)(1 + max_i ratio_i) and
/// C_P0(Omega_i) <= C_P0(K).
inline UniformScanReport uniform_poincare_scan(const ComplexPtr& k, const std::vector<std::pair<std::string, ShapePtr>>& family,
                                               const std::vector<int>& degrees, int samples, std::uint64_t seed,
                                               ExtensionVariant variant = ExtensionVariant::Mixed) {
  if (degrees.empty()) throw std::invalid_argument("degree list is empty");
  const int n = k->dim();
  UniformScanReport rep;
  auto ops_k = assemble(k);
  rep.c_k_by_degree.assign(static_cast<std::size_t>(n), 0.0);
  rep.c0_k_by_degree.assign(static_cast<std::size_t>(n), 0.0);
  for (int d : degrees) {
    rep.c_k_by_degree.at(static_cast<std::size_t>(d)) = poincare_constant(ops_k, d, Convention::NeumannCoclosed).poincare_constant;
    rep.c0_k_by_degree.at(static_cast<std::size_t>(d)) = poincare_constant(ops_k, d, Convention::Dirichlet).poincare_constant;
  }
  rep.c_k = rep.c_k_by_degree[0];
  std::mt19937_64 rng(seed);
  for (const auto& [name, shape] : family) {
    const auto t0 = std::chrono::steady_clock::now();
    ExtensionProblem p(k, barycenter_selection(*k, *shape), variant);
    const auto b = betti_numbers(*p.omega_map().child);
    for (int d : degrees) {
      UniformScanRow row;
      row.member = name;
      row.degree = d;
      row.components = b[0];
      row.holes = b[1];
      const auto neu = poincare_constant(p.ops_omega(), d, Convention::NeumannCoclosed);
      row.c_neumann = neu.poincare_constant;
      row.c_dirichlet = poincare_constant(p.ops_omega(), d, Convention::Dirichlet).poincare_constant;
      // Exact data: D of random d-cochains and of the eigenvector itself.
      const auto& om = *p.ops_omega();
      auto ratio_of = [&](const Vec& sigma_values) {
        const Cochain sigma(d + 1, p.omega_map().child, sigma_values);
        const double ns = l2_norm(om, sigma);
        if (ns == 0.0) return 0.0;
        const auto r = p.extend(sigma);
        return l2_norm(*p.ops_a(), r.lambda) / ns;
      };
      row.extension_ratio = ratio_of(om.coboundary(d) * neu.eigenvector);
      for (int s = 0; s < samples; ++s)
        row.extension_ratio = std::max(row.extension_ratio, ratio_of(om.coboundary(d) * random_normal(om.count(d), rng)));
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rep.rows.push_back(row);
    }
  }
  for (int d : degrees) {
    double cmax = 0.0, rmax = 0.0, c0max = 0.0;
    for (const auto& r : rep.rows)
      if (r.degree == d) {
        cmax = std::max(cmax, r.c_neumann);
        rmax = std::max(rmax, r.extension_ratio);
        c0max = std::max(c0max, r.c_dirichlet);
      }
    const double proxy = rep.c_k_by_degree[static_cast<std::size_t>(d)] * (1.0 + rmax);
    for (auto& r : rep.rows)
      if (r.degree == d) r.bound_proxy = proxy;
    rep.checks.push_back(check_le("max_i C_P^(" + std::to_string(d) + ")(Omega_i) <= C_P(K)(1 + max ratio)",
                                  "uniform Poincare inequality over the family", cmax, proxy));
    rep.checks.push_back(check_le("max_i C_P0^(" + std::to_string(d) + ")(Omega_i) <= C_P0(K)",
                                  "uniform relative Poincare inequality (Dirichlet monotonicity)", c0max,
                                  rep.c0_k_by_degree[static_cast<std::size_t>(d)] + 1e-8));
    bool finite = true;
    for (const auto& r : rep.rows)
      if (r.degree == d && !(std::isfinite(r.c_neumann) && std::isfinite(r.c_dirichlet))) finite = false;
    rep.checks.push_back(Check{"all constants finite (degree " + std::to_string(d) + ")", "uniform Poincare inequality", 0, 0, finite, false});
  }
  return rep;
}

struct EigenScanRow {
  double scale = 1.0;
  double diameter = 0.0;
  int degree = 0;
  double lambda1 = 0.0;
  double lambda_d2 = 0.0;  // lambda1 * diam^2
  double lambda_d4 = 0.0;  // lambda1 * diam^4
};

struct EigenScanReport {
  std::vector<EigenScanRow> rows;
  std::vector<double> exponent;       // fitted log-log slope per degree
  std::vector<double> dilation_spread;  // max relative deviation of lambda*s^2 per degree
  std::vector<double> floor;          // min lambda*diam^4 per degree
};

/// First Neumann eigenvalues of scaled copies s * Omega of one mesh.
inline EigenScanReport eigenvalue_lower_bound_scan(const ComplexPtr& base, const std::vector<double>& scales, const std::vector<int>& degrees) {
  if (scales.empty() || degrees.empty()) throw std::invalid_argument("eigen scan needs scales and degrees");
  EigenScanReport rep;
  const double d0 = hull_diameter(*base);
  for (int d : degrees) {
    std::vector<double> lx, ly, ls2, l4;
    for (double s : scales) {
      auto c = scaled(*base, s);
      const auto r = poincare_constant(assemble(c), d, Convention::NeumannCoclosed);
      EigenScanRow row;
      row.scale = s;
      row.degree = d;
      row.diameter = d0 * s;
      row.lambda1 = r.lambda1;
      row.lambda_d2 = r.lambda1 * row.diameter * row.diameter;
      row.lambda_d4 = row.lambda_d2 * row.diameter * row.diameter;
      rep.rows.push_back(row);
      lx.push_back(std::log(row.diameter));
      ly.push_back(std::log(row.lambda1));
      ls2.push_back(r.lambda1 * s * s);
      l4.push_back(row.lambda_d4);
    }
    double slope = 0.0;
    if (lx.size() >= 2) {
      const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
      const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
      }
      slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    rep.exponent.push_back(slope);
    const auto [lo, hi] = std::minmax_element(ls2.begin(), ls2.end());
    rep.dilation_spread.push_back((*hi - *lo) / *hi);
    rep.floor.push_back(*std::min_element(l4.begin(), l4.end()));
  }
  return rep;
}

}  // namespace cext
