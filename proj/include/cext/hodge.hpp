// Discrete Hodge theory on a (possibly zero-trace constrained) Whitney
// sequence: exact projections, minimal-norm potentials, Hodge splits and
// harmonic bases.
#pragma once

#include "forms.hpp"

namespace cext {

enum class Variant { Absolute, Relative, Mixed, Stabilized };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Absolute: return "absolute";
    case Variant::Relative: return "relative";
    case Variant::Mixed: return "mixed";
    case Variant::Stabilized: return "stabilized";
  }
  return "?";
}

/// Boundary-condition selector. Relative and mixed both impose zero DOFs on
/// the named label (the full boundary for relative, a boundary part for
/// mixed); absolute and stabilized impose nothing.
struct BoundaryCondition {
  Variant variant = Variant::Absolute;
  std::string label;

  static BoundaryCondition absolute() { return {}; }
  static BoundaryCondition relative(std::string label = kBoundaryLabel) { return {Variant::Relative, std::move(label)}; }
  static BoundaryCondition mixed(std::string label) { return {Variant::Mixed, std::move(label)}; }
  static BoundaryCondition stabilized() { return {Variant::Stabilized, {}}; }
  bool constrained() const { return variant == Variant::Relative || variant == Variant::Mixed; }
  std::string describe() const { return constrained() ? to_string(variant) + "(" + label + ")" : to_string(variant); }
};

/// The Whitney sequence restricted to free DOFs. Essential labels must be
/// closed subcomplexes, so D maps zero-trace cochains to zero-trace cochains
/// and dropping the essential rows and columns loses nothing.
class ReducedSequence {
 public:
  ReducedSequence(OpsPtr ops, BoundaryCondition bc, std::vector<SpMat> masses = {})
      : ops_(std::move(ops)), bc_(std::move(bc)) {
    const int n = ops_->dim();
    if (!masses.empty() && static_cast<int>(masses.size()) != n + 1)
      throw std::invalid_argument("custom masses must cover degrees 0..n");
    free_.resize(static_cast<std::size_t>(n + 2));
    for (int k = 0; k <= n; ++k) {
      std::vector<char> fixed(static_cast<std::size_t>(ops_->count(k)), 0);
      if (bc_.constrained())
        for (Index i : ops_->trace_dofs(k, bc_.label)) fixed[static_cast<std::size_t>(i)] = 1;
      for (Index i = 0; i < ops_->count(k); ++i)
        if (!fixed[static_cast<std::size_t>(i)]) free_[static_cast<std::size_t>(k)].push_back(i);
    }
    d_.resize(static_cast<std::size_t>(n + 1));
    m_.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
      d_[static_cast<std::size_t>(k)] = select(ops_->coboundary(k), free_[static_cast<std::size_t>(k + 1)], free_[static_cast<std::size_t>(k)]);
      const SpMat& mk = masses.empty() ? ops_->mass(k) : masses[static_cast<std::size_t>(k)];
      m_[static_cast<std::size_t>(k)] = select(mk, free_[static_cast<std::size_t>(k)], free_[static_cast<std::size_t>(k)]);
    }
  }

  const OpsPtr& ops() const { return ops_; }
  const ComplexPtr& complex() const { return ops_->complex(); }
  const BoundaryCondition& bc() const { return bc_; }
  int dim() const { return ops_->dim(); }
  const IndexList& free_dofs(int k) const { return free_.at(static_cast<std::size_t>(k)); }
  Index size(int k) const { return (k < 0 || k > dim()) ? 0 : static_cast<Index>(free_dofs(k).size()); }
  /// Reduced D_k (rows: free (k+1)-DOFs, cols: free k-DOFs); empty for k outside 0..n-1.
  SpMat d(int k) const {
    if (k < 0) return SpMat(size(0), 0);
    return d_.at(static_cast<std::size_t>(k));
  }
  const SpMat& mass(int k) const { return m_.at(static_cast<std::size_t>(k)); }

  Vec reduce(int k, const Vec& full) const { return gather(full, free_dofs(k)); }
  Vec expand(int k, const Vec& reduced) const { return scatter(reduced, free_dofs(k), ops_->count(k)); }
  Cochain cochain(int k, const Vec& reduced) const {
    if (k < 0 || k > dim()) return Cochain(k, complex(), Vec());
    return Cochain(k, complex(), expand(k, reduced));
  }

  /// Reduced values of a cochain; its essential DOFs must vanish.
  Vec reduce_checked(const Cochain& a, double tol = 1e-12) const {
    if (a.complex != complex()) throw std::invalid_argument("cochain does not live on this complex");
    if (a.is_zero_object()) return Vec();
    if (bc_.constrained()) {
      const double scale = std::max(1.0, a.values.cwiseAbs().maxCoeff());
      for (Index i : ops_->trace_dofs(a.degree, bc_.label))
        if (std::abs(a.values(i)) > tol * scale)
          throw std::invalid_argument("cochain has nonzero DOF on essential simplex " + std::to_string(i) + " of label '" +
                                      bc_.label + "'");
    }
    return reduce(a.degree, a.values);
  }

 private:
  OpsPtr ops_;
  BoundaryCondition bc_;
  std::vector<IndexList> free_;
  std::vector<SpMat> d_;
  std::vector<SpMat> m_;
};

struct HodgeSplit {
  Cochain exact;
  Cochain coexact;
  Cochain harmonic;
  Cochain potential_alpha;  // minimal-norm (k-1)-potential of the exact part
  Cochain potential_beta;   // minimal-norm k-potential of d(omega); equals the coexact part
};

/// M-orthonormal basis of discrete harmonic k-forms under one variant.
struct HarmonicBasis {
  int degree = 0;
  BoundaryCondition bc;
  ComplexPtr complex;
  Mat columns;  // full-length cochain values, one basis element per column
  double orthonormality_residual = 0.0;

  Index dim() const { return columns.cols(); }
  Cochain element(Index i) const { return Cochain(degree, complex, columns.col(i)); }
  std::vector<Cochain> basis() const {
    std::vector<Cochain> out;
    for (Index i = 0; i < dim(); ++i) out.push_back(element(i));
    return out;
  }
};

/// Factorizations for every degree of a reduced sequence. Immutable once built;
/// all queries are const and may run concurrently.
class HodgeSolver {
 public:
  explicit HodgeSolver(ReducedSequence seq) : seq_(std::move(seq)) {
    const int n = seq_.dim();
    cols_.resize(static_cast<std::size_t>(n + 1));
    stiff_.resize(static_cast<std::size_t>(n + 1));
    minnorm_.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
      const SpMat dk = seq_.d(k);
      cols_[static_cast<std::size_t>(k)] = (dk.rows() > 0 && dk.cols() > 0) ? independent_cols(dk) : IndexList{};
      const SpMat dj = select(dk, iota(dk.rows()), cols_[static_cast<std::size_t>(k)]);
      if (k < n) {
        const SpMat s = SpMat(dj.transpose()) * seq_.mass(k + 1) * dj;
        stiff_[static_cast<std::size_t>(k)] = SpdSolver(s);
      }
      minnorm_[static_cast<std::size_t>(k)] = SaddlePointSolver(seq_.mass(k), dk);
    }
  }

  HodgeSolver(OpsPtr ops, BoundaryCondition bc, std::vector<SpMat> masses = {})
      : HodgeSolver(ReducedSequence(std::move(ops), std::move(bc), std::move(masses))) {}

  const ReducedSequence& sequence() const { return seq_; }
  int dim() const { return seq_.dim(); }
  /// Rank of the reduced D_k.
  Index rank(int k) const { return (k < 0 || k >= dim()) ? 0 : static_cast<Index>(cols_[static_cast<std::size_t>(k)].size()); }
  /// Free k-DOFs (reduced positions) whose D_k columns form a basis of im D_k.
  const IndexList& pivot_columns(int k) const { return cols_.at(static_cast<std::size_t>(k)); }
  Index kernel_dim(int k) const { return seq_.size(k) - rank(k); }
  Index harmonic_dim(int k) const { return kernel_dim(k) - rank(k - 1); }

  // Reduced-coordinate kernels.

  /// M-orthogonal projection onto im D_{k-1}.
  Vec project_exact_reduced(int k, const Vec& w) const {
    if (k == 0 || rank(k - 1) == 0) return Vec::Zero(w.size());
    const SpMat dj = pivot_block(k - 1);
    const Vec x = stiff_[static_cast<std::size_t>(k - 1)].solve(SpMat(dj.transpose()) * (seq_.mass(k) * w));
    return dj * x;
  }
  /// Minimal M-norm k-cochain with D_k x = b (b must be in the image).
  Vec min_norm_reduced(int k, const Vec& b) const {
    if (k < 0) return Vec();
    return minnorm_[static_cast<std::size_t>(k)].solve(Vec(), b);
  }
  /// Residual of D_k x = b at the minimal-norm solution, relative to |b|.
  double min_norm_residual(int k, const Vec& x, const Vec& b) const {
    return minnorm_[static_cast<std::size_t>(k)].constraint_residual(x, b) / std::max(1e-300, b.cwiseAbs().maxCoeff());
  }
  /// Potential (degree k-1) of the exact part of w.
  Vec potential_reduced(int k, const Vec& w) const {
    if (k == 0) return Vec();
    return min_norm_reduced(k - 1, project_exact_reduced(k, w));
  }
  /// Coexact part: the minimal-norm element with the same coboundary.
  Vec coexact_reduced(int k, const Vec& w) const {
    if (k >= dim() || rank(k) == 0) return Vec::Zero(w.size());
    return min_norm_reduced(k, seq_.d(k) * w);
  }
  Vec harmonic_reduced(int k, const Vec& w) const {
    return w - project_exact_reduced(k, w) - coexact_reduced(k, w);
  }
  /// z with D'M D z = y for y in the range of D' (z padded on the pivot columns).
  Vec stiffness_solve_reduced(int k, const Vec& y) const {
    const Vec u = stiff_.at(static_cast<std::size_t>(k)).solve(gather(y, pivot_columns(k)));
    return scatter(u, pivot_columns(k), seq_.size(k));
  }

 private:
  SpMat pivot_block(int k) const {
    const SpMat dk = seq_.d(k);
    return select(dk, iota(dk.rows()), cols_[static_cast<std::size_t>(k)]);
  }

  ReducedSequence seq_;
  std::vector<IndexList> cols_;
  std::vector<SpdSolver> stiff_;
  std::vector<SaddlePointSolver> minnorm_;
};

using HodgeSolverPtr = std::shared_ptr<const HodgeSolver>;

inline HodgeSolverPtr make_hodge_solver(OpsPtr ops, BoundaryCondition bc = {}, std::vector<SpMat> masses = {}) {
  return std::make_shared<const HodgeSolver>(std::move(ops), std::move(bc), std::move(masses));
}

inline Cochain project_exact(const HodgeSolver& hs, const Cochain& omega) {
  const auto& seq = hs.sequence();
  return seq.cochain(omega.degree, hs.project_exact_reduced(omega.degree, seq.reduce_checked(omega)));
}

/// alpha with D alpha = P_ex(omega), M-orthogonal to the closed (k-1)-cochains
/// of the constraint space of the solver.
inline Cochain minimal_norm_potential(const HodgeSolver& hs, const Cochain& omega) {
  const auto& seq = hs.sequence();
  if (omega.degree == 0) return Cochain(-1, seq.complex(), Vec());
  return seq.cochain(omega.degree - 1, hs.potential_reduced(omega.degree, seq.reduce_checked(omega)));
}

inline HodgeSplit hodge_decompose(const HodgeSolver& hs, const Cochain& omega) {
  const auto& seq = hs.sequence();
  const int k = omega.degree;
  const Vec w = seq.reduce_checked(omega);
  HodgeSplit s;
  const Vec ex = hs.project_exact_reduced(k, w);
  const Vec co = hs.coexact_reduced(k, w);
  s.exact = seq.cochain(k, ex);
  s.coexact = seq.cochain(k, co);
  s.harmonic = seq.cochain(k, w - ex - co);
  s.potential_alpha = k == 0 ? Cochain(-1, seq.complex(), Vec()) : seq.cochain(k - 1, hs.min_norm_reduced(k - 1, ex));
  s.potential_beta = s.coexact;
  return s;
}

/// Harmonic basis by projecting seeded random cochains onto the harmonic
/// space and orthonormalizing; the numerical rank must match the algebraic
/// dimension (free DOFs minus ranks of the adjacent coboundaries).
inline HarmonicBasis harmonic_basis(const HodgeSolver& hs, int k, std::uint64_t seed = 0x5eedULL) {
  const auto& seq = hs.sequence();
  HarmonicBasis hb;
  hb.degree = k;
  hb.bc = seq.bc();
  hb.complex = seq.complex();
  const Index dim = hs.harmonic_dim(k);
  const Index nf = seq.size(k);
  if (dim == 0 || nf == 0) {
    hb.columns = Mat(seq.ops()->count(k), 0);
    return hb;
  }
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
  const Index probes = dim + 3;
  Mat h(nf, probes);
  for (Index j = 0; j < probes; ++j) {
    Vec r = hs.harmonic_reduced(k, random_normal(nf, rng));
    // A second pass removes what round-off left of the other components.
    h.col(j) = hs.harmonic_reduced(k, r);
  }
  const SpMat& m = seq.mass(k);
  const Mat gram = h.transpose() * (m * h);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const Vec ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  Index found = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-8 * top) ++found;
  if (found != dim) {
    std::ostringstream os;
    os << "harmonic space of degree " << k << " (" << seq.bc().describe() << "): expected dimension " << dim
       << ", numerical rank " << found << " (eigenvalues " << ev.transpose() << ")";
    throw SolverError(os.str());
  }
  Mat q = h * es.eigenvectors().rightCols(dim);
  // Modified Gram-Schmidt in the M inner product, twice.
  for (int pass = 0; pass < 2; ++pass)
    for (Index j = 0; j < dim; ++j) {
      for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(m * q.col(j)) * q.col(i);
      q.col(j) /= m_norm(m, q.col(j));
    }
  hb.orthonormality_residual = (q.transpose() * (m * q) - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  hb.columns = Mat(seq.ops()->count(k), dim);
  for (Index j = 0; j < dim; ++j) hb.columns.col(j) = seq.expand(k, q.col(j));
  return hb;
}

inline HarmonicBasis harmonic_basis(const OpsPtr& ops, int k, const BoundaryCondition& bc = {}) {
  return harmonic_basis(HodgeSolver(ops, bc), k);
}

/// M-inner products of a cochain with every basis element.
inline Vec harmonic_moments(const DeRhamOps& ops, const HarmonicBasis& hb, const Vec& values, const SpMat* mass = nullptr) {
  if (hb.dim() == 0) return Vec();
  const SpMat& m = mass ? *mass : ops.mass(hb.degree);
  return hb.columns.transpose() * (m * values);
}

}  // namespace cext
