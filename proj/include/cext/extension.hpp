// Recursive minimal-norm cochain extension from Omega to K across the
// exterior domain A = K minus Omega, in the zero-trace-on-dK and mixed
// variants, with its gauge check and the nested and harmonic-datum probes.
#pragma once

#include "domain.hpp"
#include "hodge.hpp"

#include <optional>

namespace cext {

struct ExtensionResiduals {
  double coboundary = 0.0;  // |D_A lambda - xi|_M / max(|xi|_M, |omega|_HL)
  double trace = 0.0;       // max |lambda - omega| on interface DOFs
  double moment = 0.0;      // max |(lambda, q) - c_q|
  double compatibility = 0.0;  // relative constraint residual of the step solve
  double gauge = 0.0;
};

struct ExtensionResult {
  int degree = 0;
  Cochain extended;       // E^k omega on K
  Cochain lambda;         // exterior field on A
  Cochain extended_d;     // E^{k+1}(d omega) on K (zero object for k = n)
  Vec coefficients;       // c_q for the harmonic basis of A in degree k
  ExtensionResiduals residuals;
  double ratio = 0.0;     // |E omega|_HL(K) / |omega|_HL(Omega)
  double cochain_identity = 0.0;  // |D_K E omega - E(d omega)|_M / |omega|_HL
  bool harmonic_removed = false;  // projection-first mode split off a harmonic part
  double harmonic_norm = 0.0;
  std::string warning;
};

struct ExtendOptions {
  bool project_harmonic = false;  // split off the Omega-harmonic part instead of rejecting it
  double harmonic_tol = 1e-8;     // relative size of the harmonic part tolerated as round-off
  double infeasibility_tol = 1e-8;
};

struct ProbeReport {
  double residual = 0.0;  // min |D_A lambda|_M / |omega|_M over trace-matching lambda
  bool feasible = false;
  Cochain lambda;
};

/// Omega, A and K with all operators, harmonic bases and step factorizations.
/// Immutable after construction.
class ExtensionProblem {
 public:
  ExtensionProblem(ComplexPtr k, const std::vector<char>& omega_selection, ExtensionVariant variant)
      : variant_(variant), k_(std::move(k)) {
    omega_ = extract_subcomplex(k_, omega_selection);
    std::vector<char> rest(omega_selection.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = omega_selection[i] ? 0 : 1;
    exterior_ = extract_subcomplex(k_, rest);
    const ComplexPtr& a = exterior_.child;
    // rho = dist(dOmega, dK), over the vertices of the interface and of the K boundary.
    rho_ = std::numeric_limits<double>::infinity();
    for (Index i : a->label(kInterfaceLabel, 0))
      for (Index j : k_->label(kBoundaryLabel, 0))
        rho_ = std::min(rho_, (k_->vertices().row(exterior_.to_parent(0, i)) - k_->vertices().row(j)).norm());
    if (variant_ == ExtensionVariant::ZeroTrace && !(rho_ > 0.0))
      throw std::invalid_argument("zero-trace variant needs dist(dOmega, dK) > 0, got rho = " + std::to_string(rho_));

    ops_k_ = assemble(k_);
    ops_omega_ = assemble(omega_.child);
    ops_a_ = assemble(a);
    hodge_omega_ = make_hodge_solver(ops_omega_);
    bc_a_ = variant_ == ExtensionVariant::ZeroTrace ? BoundaryCondition::relative(kBoundaryLabel)
                                                    : BoundaryCondition::mixed(kInterfaceLabel);
    hodge_a_ = make_hodge_solver(ops_a_, bc_a_);
    const int n = dim();
    for (int d = 0; d <= n; ++d) {
      harm_omega_.push_back(harmonic_basis(*hodge_omega_, d));
      harm_a_.push_back(harmonic_basis(*hodge_a_, d));
    }
    const ReducedSequence& seq = hodge_a_->sequence();
    fixed_.resize(static_cast<std::size_t>(n + 1));
    for (int d = 0; d <= n; ++d) {
      std::vector<char> isfree(static_cast<std::size_t>(ops_a_->count(d)), 0);
      for (Index i : seq.free_dofs(d)) isfree[static_cast<std::size_t>(i)] = 1;
      for (Index i = 0; i < ops_a_->count(d); ++i)
        if (!isfree[static_cast<std::size_t>(i)]) fixed_[static_cast<std::size_t>(d)].push_back(i);
    }
    step_.resize(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
      const HarmonicBasis& hb = harm_a_[static_cast<std::size_t>(d)];
      Mat moments(hb.dim(), seq.size(d));
      for (Index j = 0; j < hb.dim(); ++j)
        moments.row(j) = seq.reduce(d, ops_a_->mass(d) * hb.columns.col(j)).transpose();
      step_[static_cast<std::size_t>(d)] = SaddlePointSolver(seq.mass(d), seq.d(d), moments);
    }
  }

  /// Convenience: build K and the Omega selection from a domain description.
  static std::shared_ptr<const ExtensionProblem> from_domain(const DomainSpec& spec) {
    ComplexPtr k = spec.build_k();
    return std::make_shared<const ExtensionProblem>(k, spec.omega_selection(*k), spec.variant);
  }

  int dim() const { return k_->dim(); }
  ExtensionVariant variant() const { return variant_; }
  double rho() const { return rho_; }
  const ComplexPtr& k_complex() const { return k_; }
  const SubcomplexMap& omega_map() const { return omega_; }
  const SubcomplexMap& exterior_map() const { return exterior_; }
  const OpsPtr& ops_k() const { return ops_k_; }
  const OpsPtr& ops_omega() const { return ops_omega_; }
  const OpsPtr& ops_a() const { return ops_a_; }
  const HodgeSolver& hodge_omega() const { return *hodge_omega_; }
  const HodgeSolver& hodge_a() const { return *hodge_a_; }
  const BoundaryCondition& bc_a() const { return bc_a_; }
  const HarmonicBasis& harmonic_omega(int d) const { return harm_omega_.at(static_cast<std::size_t>(d)); }
  const HarmonicBasis& harmonic_a(int d) const { return harm_a_.at(static_cast<std::size_t>(d)); }
  /// A-DOFs fixed by the step problem (interface, plus dK part for zero trace).
  const IndexList& fixed_dofs(int d) const { return fixed_.at(static_cast<std::size_t>(d)); }

  /// Values of an Omega cochain on the A simplices it shares with Omega
  /// (all other A entries zero). This is the zero-fill lifting of its trace.
  Vec lift_trace(const Cochain& on_omega) const {
    check_omega(on_omega);
    const int d = on_omega.degree;
    Vec out = Vec::Zero(ops_a_->count(d));
    for (Index i : exterior_.child->label(kInterfaceLabel, d)) {
      const Index ko = omega_.to_child(d, exterior_.to_parent(d, i));
      out(i) = on_omega.values(ko);
    }
    return out;
  }

  /// Piecewise gluing: Omega values on Omega simplices, lambda elsewhere.
  Cochain glue(const Cochain& on_omega, const Vec& lambda) const {
    const int d = on_omega.degree;
    Vec v(k_->count(d));
    for (Index i = 0; i < ops_a_->count(d); ++i) v(exterior_.to_parent(d, i)) = lambda(i);
    for (Index i = 0; i < ops_omega_->count(d); ++i) v(omega_.to_parent(d, i)) = on_omega.values(i);
    return Cochain(d, k_, v);
  }

  /// Size of the Omega-harmonic part of omega relative to its norm.
  double harmonic_fraction(const Cochain& omega) const {
    check_omega(omega);
    const HarmonicBasis& hb = harmonic_omega(omega.degree);
    if (hb.dim() == 0) return 0.0;
    const double nw = l2_norm(*ops_omega_, omega);
    if (nw == 0.0) return 0.0;
    return harmonic_moments(*ops_omega_, hb, omega.values).norm() / nw;
  }

  Vec harmonic_coefficients(const Cochain& omega) const {
    check_omega(omega);
    const int d = omega.degree;
    const HarmonicBasis& hb = harmonic_a(d);
    if (d == 0 || hb.dim() == 0) return Vec::Zero(hb.dim());
    const Cochain alpha = minimal_norm_potential(*hodge_omega_, omega);
    const Vec alpha_a = lift_trace(alpha);
    return harmonic_moments(*ops_a_, hb, ops_a_->coboundary(d - 1) * alpha_a);
  }

  /// lambda = sum c_q q for an n-form datum.
  ExtensionResult extend_top_degree(const Cochain& omega) const {
    check_omega(omega);
    if (omega.degree != dim()) throw std::invalid_argument("extend_top_degree needs an n-form");
    ExtensionResult r;
    r.degree = omega.degree;
    r.coefficients = harmonic_coefficients(omega);
    const HarmonicBasis& hb = harmonic_a(omega.degree);
    Vec lambda = hb.dim() ? Vec(hb.columns * r.coefficients) : Vec(Vec::Zero(ops_a_->count(omega.degree)));
    r.lambda = Cochain(omega.degree, exterior_.child, lambda);
    r.extended = glue(omega, lambda);
    r.extended_d = Cochain(dim() + 1, k_, Vec());
    r.residuals.moment = hb.dim() ? (harmonic_moments(*ops_a_, hb, lambda) - r.coefficients).cwiseAbs().maxCoeff() : 0.0;
    finish(omega, r);
    return r;
  }

  /// Minimal-norm lambda on A with D lambda = xi, lambda = omega on the
  /// interface, variant boundary condition on dK, and harmonic moments c_q.
  ExtensionResult extend_recursive(const Cochain& omega, const Cochain& xi, double infeasibility_tol = 1e-8) const {
    check_omega(omega);
    const int d = omega.degree;
    if (d >= dim()) throw std::invalid_argument("extend_recursive needs degree < n");
    if (xi.complex != exterior_.child || xi.degree != d + 1) throw std::invalid_argument("xi must be a (k+1)-cochain on A");
    const ReducedSequence& seq = hodge_a_->sequence();
    const SpMat& da = ops_a_->coboundary(d);
    const SpMat& ma = ops_a_->mass(d);
    const Vec lam_fix = lift_trace(omega);  // zero on the dK part and in the interior
    const Vec dfix = da * lam_fix;

    ExtensionResult r;
    r.degree = d;
    r.coefficients = harmonic_coefficients(omega);
    const HarmonicBasis& hb = harmonic_a(d);
    const Vec b = seq.reduce(d + 1, xi.values - dfix);
    const Vec c = hb.dim() ? Vec(r.coefficients - hb.columns.transpose() * (ma * lam_fix)) : Vec();
    const Vec g = seq.reduce(d, ma * lam_fix);
    const SaddlePointSolver& kkt = step_[static_cast<std::size_t>(d)];
    const Vec x = kkt.solve(g, b, c);
    const Vec lambda = lam_fix + seq.expand(d, x);

    // Essential (k+1)-rows only see fixed DOFs; they carry the trace compatibility.
    double ess = 0.0;
    const Vec full_res = da * lambda - xi.values;
    for (Index i : fixed_dofs(d + 1)) ess = std::max(ess, std::abs(full_res(i)));
    const double scale = std::max({xi.values.size() ? xi.values.cwiseAbs().maxCoeff() : 0.0,
                                   dfix.size() ? dfix.cwiseAbs().maxCoeff() : 0.0,
                                   c.size() ? c.cwiseAbs().maxCoeff() : 0.0,
                                   omega.values.size() ? omega.values.cwiseAbs().maxCoeff() : 0.0, 1e-300});
    r.residuals.compatibility = std::max(kkt.constraint_residual(x, b, c), ess) / scale;
    if (r.residuals.compatibility > infeasibility_tol) {
      std::ostringstream os;
      os << "extension step in degree " << d << " is infeasible: relative residual " << r.residuals.compatibility
         << " exceeds " << infeasibility_tol
         << " (compatibility requires d xi = 0, matching traces of xi and d omega on dOmega, and xi consistent with the"
            " harmonic moments)";
      throw SolverError(os.str());
    }
    r.lambda = Cochain(d, exterior_.child, lambda);
    r.extended = glue(omega, lambda);
    const double xin = std::max(m_norm(ops_a_->mass(d + 1), xi.values), graph_norm(*ops_omega_, omega));
    r.residuals.coboundary = xin > 0 ? m_norm(ops_a_->mass(d + 1), full_res) / xin : 0.0;
    r.residuals.moment = hb.dim() ? (harmonic_moments(*ops_a_, hb, lambda) - r.coefficients).cwiseAbs().maxCoeff() : 0.0;
    finish(omega, r);
    return r;
  }

  /// E^k omega = extend_recursive(omega, E^{k+1}(d omega)|_A), with the
  /// inner extension terminating because d(d omega) = 0.
  ExtensionResult extend(const Cochain& omega, const ExtendOptions& opt = {}) const {
    check_omega(omega);
    const int d = omega.degree;
    Cochain datum = omega;
    bool removed = false;
    double hnorm = 0.0;
    const HarmonicBasis& hb = harmonic_omega(d);
    if (hb.dim()) {
      const Vec h = hb.columns * harmonic_moments(*ops_omega_, hb, omega.values);
      hnorm = m_norm(ops_omega_->mass(d), h);
      const double frac = harmonic_fraction(omega);
      if (frac > opt.harmonic_tol) {
        if (!opt.project_harmonic) {
          std::ostringstream os;
          os << "datum not in the orthogonal complement of the harmonic space (relative harmonic part " << frac << ")";
          throw std::invalid_argument(os.str());
        }
        datum = Cochain(d, omega.complex, omega.values - h);
        removed = true;
      }
    }
    ExtensionResult r;
    if (d == dim()) {
      r = extend_top_degree(datum);
    } else {
      const Cochain sigma = cext::d(datum);
      ExtensionResult inner_r = (d + 1 == dim())
                                    ? extend_top_degree(sigma)
                                    : extend_recursive(sigma, Cochain::zero(d + 2, exterior_.child), opt.infeasibility_tol);
      const Cochain xi = restrict_to(inner_r.extended, exterior_);
      r = extend_recursive(datum, xi, opt.infeasibility_tol);
      r.extended_d = inner_r.extended;
      const Cochain diff(d + 1, k_, cext::d(r.extended).values - inner_r.extended.values);
      const double hn = graph_norm(*ops_omega_, datum);
      r.cochain_identity = hn > 0 ? l2_norm(*ops_k_, diff) / hn : l2_norm(*ops_k_, diff);
    }
    r.harmonic_removed = removed;
    r.harmonic_norm = hnorm;
    return r;
  }

  /// max_j |(lambda, D e_j)| / (|lambda| |D e_j|) over free (k-1)-DOFs e_j of A.
  double gauge_residual(const ExtensionResult& r) const {
    const int d = r.degree;
    if (d == 0 || r.lambda.complex != exterior_.child) return 0.0;
    const SpMat& ma = ops_a_->mass(d);
    const double nl = m_norm(ma, r.lambda.values);
    if (nl == 0.0) return 0.0;
    const ReducedSequence& seq = hodge_a_->sequence();
    const SpMat& dprev = ops_a_->coboundary(d - 1);
    const Vec mlam = ma * r.lambda.values;
    double worst = 0.0;
    for (Index j : seq.free_dofs(d - 1)) {
      Vec dej = dprev.col(j);
      const double nd = m_norm(ma, dej);
      if (nd == 0.0) continue;
      worst = std::max(worst, std::abs(dej.dot(mlam)) / (nl * nd));
    }
    return worst;
  }

  /// Two-stage minimization on K: minimal |D mu| among extensions of omega,
  /// then minimal |mu| among those. Meaningful when Omega and K have the
  /// same topology; otherwise a warning is attached.
  ExtensionResult extend_nested(const Cochain& omega) const {
    check_omega(omega);
    ExtensionResult r = nested_once(omega);
    const auto bo = betti_numbers(*omega_.child);
    const auto bk = betti_numbers(*k_);
    if (bo != bk) r.warning = "Betti numbers of Omega and K differ; the nested extension may fail to commute with d";
    if (omega.degree < dim()) {
      const ExtensionResult rd = nested_once(cext::d(omega));
      r.extended_d = rd.extended;
      const Cochain diff(omega.degree + 1, k_, cext::d(r.extended).values - rd.extended.values);
      const double hn = graph_norm(*ops_omega_, omega);
      r.cochain_identity = hn > 0 ? l2_norm(*ops_k_, diff) / hn : l2_norm(*ops_k_, diff);
    } else {
      r.extended_d = Cochain(dim() + 1, k_, Vec());
    }
    return r;
  }

  /// Least-squares attempt at a closed extension of a (harmonic) datum with
  /// the variant's boundary condition on dK.
  ProbeReport harmonic_extension_probe(const Cochain& omega, double feasible_tol = 1e-8) const {
    check_omega(omega);
    const int d = omega.degree;
    ProbeReport rep;
    const double nw = l2_norm(*ops_omega_, omega);
    if (nw == 0.0 || d == dim()) {
      rep.lambda = Cochain(d, exterior_.child, d == dim() ? Vec(Vec::Zero(ops_a_->count(d))) : lift_trace(omega));
      rep.feasible = true;
      return rep;
    }
    const ReducedSequence& seq = hodge_a_->sequence();
    const Vec fix = lift_trace(omega);
    const SpMat& da = ops_a_->coboundary(d);
    const SpMat& m1 = ops_a_->mass(d + 1);
    const SpMat df = select(da, iota(da.rows()), seq.free_dofs(d));
    const IndexList piv = (df.rows() && df.cols()) ? independent_cols(df) : IndexList{};
    Vec lambda = fix;
    if (!piv.empty()) {
      const SpMat dj = select(df, iota(df.rows()), piv);
      const SpdSolver s(SpMat(SpMat(dj.transpose()) * m1 * dj));
      const Vec u = s.solve(-(SpMat(dj.transpose()) * (m1 * (da * fix))));
      lambda += seq.expand(d, scatter(u, piv, seq.size(d)));
    }
    rep.lambda = Cochain(d, exterior_.child, lambda);
    rep.residual = m_norm(m1, da * lambda) / nw;
    rep.feasible = rep.residual <= feasible_tol;
    return rep;
  }

  /// Random Omega-cochain with its harmonic part removed.
  Cochain random_datum(int d, std::mt19937_64& rng) const {
    Vec v = random_normal(ops_omega_->count(d), rng);
    const HarmonicBasis& hb = harmonic_omega(d);
    if (hb.dim()) v -= hb.columns * harmonic_moments(*ops_omega_, hb, v);
    return Cochain(d, omega_.child, v);
  }

 private:
  void check_omega(const Cochain& c) const {
    if (c.complex != omega_.child) throw std::invalid_argument("datum must live on the Omega complex of this problem");
    if (c.degree < 0 || c.degree > dim()) throw std::invalid_argument("datum degree out of range");
  }

  void finish(const Cochain& omega, ExtensionResult& r) const {
    double tr = 0.0;
    const Vec lift = lift_trace(omega);
    for (Index i : exterior_.child->label(kInterfaceLabel, omega.degree)) tr = std::max(tr, std::abs(r.lambda.values(i) - lift(i)));
    r.residuals.trace = tr;
    r.residuals.gauge = gauge_residual(r);
    const double hn = graph_norm(*ops_omega_, omega);
    r.ratio = hn > 0 ? graph_norm(*ops_k_, r.extended) / hn : 0.0;
  }

  ExtensionResult nested_once(const Cochain& omega) const {
    const int d = omega.degree;
    IndexList fixed, freed;
    std::vector<char> in_omega(static_cast<std::size_t>(k_->count(d)), 0);
    for (Index i = 0; i < ops_omega_->count(d); ++i) in_omega[static_cast<std::size_t>(omega_.to_parent(d, i))] = 1;
    for (Index i = 0; i < k_->count(d); ++i) (in_omega[static_cast<std::size_t>(i)] ? fixed : freed).push_back(i);
    Vec mu_fix = Vec::Zero(k_->count(d));
    for (Index i = 0; i < ops_omega_->count(d); ++i) mu_fix(omega_.to_parent(d, i)) = omega.values(i);
    const SpMat& m0 = ops_k_->mass(d);
    const SpMat mff = select(m0, freed, freed);
    const Vec g = gather(m0 * mu_fix, freed);
    Vec x0 = Vec::Zero(static_cast<Index>(freed.size()));
    SpMat df(0, static_cast<Index>(freed.size()));
    if (d < dim()) {
      const SpMat& dk = ops_k_->coboundary(d);
      const SpMat& m1 = ops_k_->mass(d + 1);
      df = select(dk, iota(dk.rows()), freed);
      const IndexList piv = (df.rows() && df.cols()) ? independent_cols(df) : IndexList{};
      if (!piv.empty()) {
        const SpMat dj = select(df, iota(df.rows()), piv);
        const SpdSolver s(SpMat(SpMat(dj.transpose()) * m1 * dj));
        x0 = scatter(s.solve(-(SpMat(dj.transpose()) * (m1 * (dk * mu_fix)))), piv, static_cast<Index>(freed.size()));
      }
    }
    const SaddlePointSolver outer(mff, df);
    const Vec x = outer.solve(g, df * x0);
    Vec mu = mu_fix;
    for (std::size_t i = 0; i < freed.size(); ++i) mu(freed[i]) = x(static_cast<Index>(i));
    ExtensionResult r;
    r.degree = d;
    r.extended = Cochain(d, k_, mu);
    r.lambda = restrict_to(r.extended, exterior_);
    const double hn = graph_norm(*ops_omega_, omega);
    r.ratio = hn > 0 ? graph_norm(*ops_k_, r.extended) / hn : 0.0;
    return r;
  }

  ExtensionVariant variant_;
  ComplexPtr k_;
  SubcomplexMap omega_, exterior_;
  double rho_ = 0.0;
  OpsPtr ops_k_, ops_omega_, ops_a_;
  HodgeSolverPtr hodge_omega_, hodge_a_;
  BoundaryCondition bc_a_;
  std::vector<HarmonicBasis> harm_omega_, harm_a_;
  std::vector<IndexList> fixed_;
  std::vector<SaddlePointSolver> step_;
};

using ProblemPtr = std::shared_ptr<const ExtensionProblem>;

}  // namespace cext
