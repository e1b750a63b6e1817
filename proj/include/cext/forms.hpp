// Whitney cochain spaces: coboundary and exact mass operators, inner
// products, restriction and extension by zero across subcomplex maps, and a
// pointwise evaluator for the lowest-order Whitney basis on one simplex.
#pragma once

#include "mesh.hpp"

namespace cext {

/// Sorted size-m subsets of {0, ..., n-1} in lexicographic order.
inline std::vector<std::vector<int>> subsets(int n, int m) {
  std::vector<std::vector<int>> out;
  if (m < 0 || m > n) return out;
  std::vector<int> cur(static_cast<std::size_t>(m));
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int i = m - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

/// Barycentric data of one affine n-simplex and the Whitney k-forms of its
/// faces, evaluated anywhere in R^n (outside the simplex this is the
/// canonical affine extension). k-form values are coefficient vectors on the
/// basis dx_I, I ranging over subsets(n, k).
class WhitneyElement {
 public:
  explicit WhitneyElement(const Mat& verts) : verts_(verts) {
    const Index n = verts.cols();
    if (verts.rows() != n + 1) throw std::invalid_argument("an n-simplex needs n+1 vertices");
    Mat p(n + 1, n + 1);
    p.col(0).setOnes();
    p.rightCols(n) = verts;
    const double det = p.determinant();
    volume_ = std::abs(det) / factorial(static_cast<int>(n));
    double scale = 0.0;
    for (Index i = 1; i <= n; ++i) scale = std::max(scale, (verts.row(i) - verts.row(0)).norm());
    if (!(volume_ > 1e-12 * std::pow(scale, static_cast<double>(n)))) throw std::invalid_argument("degenerate simplex");
    // Row i of p^{-T} holds the affine coefficients of lambda_i.
    coef_ = p.inverse().transpose();
  }

  int dim() const { return static_cast<int>(verts_.cols()); }
  double volume() const { return volume_; }
  const Mat& vertices() const { return verts_; }
  /// Rows are gradients of the barycentric coordinates.
  Mat grads() const { return coef_.rightCols(dim()); }

  Vec lambda(const Vec& x) const { return coef_.col(0) + coef_.rightCols(dim()) * x; }

  /// Whitney form of the local face with sorted local vertex ids `face`.
  Vec whitney(const std::vector<int>& face, const Vec& x) const {
    const int k = static_cast<int>(face.size()) - 1;
    const auto comps = subsets(dim(), k);
    const Vec lam = lambda(x);
    const Mat g = grads();
    Vec out = Vec::Zero(static_cast<Index>(comps.size()));
    for (int j = 0; j <= k; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const double w = sign * lam(face[static_cast<std::size_t>(j)]);
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < comps.size(); ++c) {
        Mat minor(k, k);
        for (int a = 0, r = 0; a <= k; ++a) {
          if (a == j) continue;
          for (int b = 0; b < k; ++b) minor(r, b) = g(face[static_cast<std::size_t>(a)], comps[c][static_cast<std::size_t>(b)]);
          ++r;
        }
        out(static_cast<Index>(c)) += w * (k == 0 ? 1.0 : minor.determinant());
      }
    }
    return out * factorial(k);
  }

  /// Exact Whitney mass matrix over the faces subsets(n+1, k+1).
  Mat local_mass(int k) const {
    const int n = dim();
    const auto faces = subsets(n + 1, k + 1);
    const Mat g = grads() * grads().transpose();
    const double c = volume_ / ((n + 1) * (n + 2));
    const double kf2 = factorial(k) * factorial(k);
    const Index nf = static_cast<Index>(faces.size());
    Mat m = Mat::Zero(nf, nf);
    for (Index s = 0; s < nf; ++s)
      for (Index t = s; t < nf; ++t) {
        const auto& fs = faces[static_cast<std::size_t>(s)];
        const auto& ft = faces[static_cast<std::size_t>(t)];
        double acc = 0.0;
        for (int i = 0; i <= k; ++i)
          for (int j = 0; j <= k; ++j) {
            const int a = fs[static_cast<std::size_t>(i)], b = ft[static_cast<std::size_t>(j)];
            const double integral = c * (a == b ? 2.0 : 1.0);
            double det = 1.0;
            if (k > 0) {
              Mat minor(k, k);
              for (int p = 0, r = 0; p <= k; ++p) {
                if (p == i) continue;
                for (int q = 0, cc = 0; q <= k; ++q) {
                  if (q == j) continue;
                  minor(r, cc++) = g(fs[static_cast<std::size_t>(p)], ft[static_cast<std::size_t>(q)]);
                }
                ++r;
              }
              det = minor.determinant();
            }
            acc += (((i + j) % 2 == 0) ? 1.0 : -1.0) * integral * det;
          }
        m(s, t) = m(t, s) = kf2 * acc;
      }
    return m;
  }

 private:
  Mat verts_;
  Mat coef_;
  double volume_ = 0.0;
};

/// Exact integral of f*g over a simplex when f and g are affine, from vertex values.
inline double affine_product_integral(double volume, const Vec& f, const Vec& g) {
  const double np1 = static_cast<double>(f.size());
  return volume / (np1 * (np1 + 1.0)) * (f.dot(g) + f.sum() * g.sum());
}

/// Global indices of the local k-faces (subsets(n+1, k+1) order) of top simplex t.
inline IndexList local_face_indices(const OrientedComplex& c, Index t, int k) {
  const int n = c.dim();
  const Simplex& s = c.simplex(n, t);
  IndexList out;
  for (const auto& f : subsets(n + 1, k + 1)) {
    Simplex g{-1, -1, -1, -1};
    for (int j = 0; j <= k; ++j) g[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(f[static_cast<std::size_t>(j)])];
    out.push_back(c.find(k, g));
  }
  return out;
}

inline SpMat assemble_from_local(Index size, const std::vector<IndexList>& dofs, const std::vector<Mat>& blocks) {
  std::vector<Triplet> t;
  for (std::size_t e = 0; e < dofs.size(); ++e)
    for (std::size_t i = 0; i < dofs[e].size(); ++i)
      for (std::size_t j = 0; j < dofs[e].size(); ++j) {
        const double v = blocks[e](static_cast<Index>(i), static_cast<Index>(j));
        if (v != 0.0) t.emplace_back(dofs[e][i], dofs[e][j], v);
      }
  SpMat m(size, size);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Coboundary and Whitney mass operators for every degree of one complex.
/// Degree n+1 objects are empty (0 rows) so formulas stay uniform.
class DeRhamOps {
 public:
  explicit DeRhamOps(ComplexPtr complex) : complex_(std::move(complex)) {
    const OrientedComplex& c = *complex_;
    const int n = c.dim();
    mass_.resize(static_cast<std::size_t>(n + 2));
    std::vector<std::vector<IndexList>> dofs(static_cast<std::size_t>(n + 1));
    std::vector<std::vector<Mat>> blocks(static_cast<std::size_t>(n + 1));
    for (Index t = 0; t < c.count(n); ++t) {
      std::unique_ptr<WhitneyElement> el;
      try {
        el = std::make_unique<WhitneyElement>(c.coords(n, t));
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument("degenerate simplex: top simplex " + std::to_string(t) + " has zero volume");
      }
      for (int k = 0; k <= n; ++k) {
        dofs[static_cast<std::size_t>(k)].push_back(local_face_indices(c, t, k));
        blocks[static_cast<std::size_t>(k)].push_back(el->local_mass(k));
      }
    }
    for (int k = 0; k <= n; ++k)
      mass_[static_cast<std::size_t>(k)] = assemble_from_local(c.count(k), dofs[static_cast<std::size_t>(k)], blocks[static_cast<std::size_t>(k)]);
    mass_[static_cast<std::size_t>(n + 1)] = SpMat(0, 0);
    cob_.push_back(SpMat(c.count(0), 0));
    for (int k = 0; k <= n; ++k) cob_.push_back(c.coboundary(k));
  }

  const ComplexPtr& complex() const { return complex_; }
  int dim() const { return complex_->dim(); }
  Index count(int k) const { return complex_->count(k); }
  /// D_k : k-cochains -> (k+1)-cochains for k = -1..n (empty at both ends).
  const SpMat& coboundary(int k) const { return cob_.at(static_cast<std::size_t>(k + 1)); }
  const SpMat& mass(int k) const { return k < 0 ? empty_ : mass_.at(static_cast<std::size_t>(k)); }
  const IndexList& trace_dofs(int k, const std::string& label) const { return complex_->label(label, k); }

 private:
  ComplexPtr complex_;
  std::vector<SpMat> mass_;
  std::vector<SpMat> cob_;
  SpMat empty_;
};

using OpsPtr = std::shared_ptr<const DeRhamOps>;

inline OpsPtr assemble(const ComplexPtr& complex) { return std::make_shared<const DeRhamOps>(complex); }

/// A k-cochain. Degrees -1 and n+1 are zero objects with no values.
struct Cochain {
  int degree = 0;
  ComplexPtr complex;
  Vec values;

  Cochain() = default;
  Cochain(int k, ComplexPtr c, Vec v) : degree(k), complex(std::move(c)), values(std::move(v)) {
    if (!complex) throw std::invalid_argument("cochain without complex");
    if (k < -1 || k > complex->dim() + 1) throw std::invalid_argument("cochain degree out of range");
    if (values.size() != complex->count(k))
      throw std::invalid_argument("cochain length " + std::to_string(values.size()) + " does not match " +
                                  std::to_string(complex->count(k)) + " simplices of degree " + std::to_string(k));
  }
  static Cochain zero(int k, const ComplexPtr& c) { return Cochain(k, c, Vec::Zero(c->count(k))); }
  bool is_zero_object() const { return complex && (degree == complex->dim() + 1 || degree == -1); }
};

namespace detail {
inline void check_same(const Cochain& a, const Cochain& b) {
  if (a.complex != b.complex) throw std::invalid_argument("cochains live on different complexes");
  if (a.degree != b.degree) throw std::invalid_argument("cochain degree mismatch");
}
inline void check_ops(const DeRhamOps& ops, const Cochain& a) {
  if (a.complex != ops.complex()) throw std::invalid_argument("cochain does not live on the operators' complex");
}
}  // namespace detail

inline double inner(const DeRhamOps& ops, const Cochain& a, const Cochain& b) {
  detail::check_same(a, b);
  detail::check_ops(ops, a);
  if (a.is_zero_object()) return 0.0;
  return a.values.dot(ops.mass(a.degree) * b.values);
}

inline double l2_norm(const DeRhamOps& ops, const Cochain& a) { return std::sqrt(std::max(0.0, inner(ops, a, a))); }

inline Cochain d(const Cochain& a) {
  if (a.degree == -1) return Cochain::zero(0, a.complex);
  if (a.is_zero_object()) return a;
  const int n = a.complex->dim();
  if (a.degree == n) return Cochain(n + 1, a.complex, Vec());
  return Cochain(a.degree + 1, a.complex, a.complex->coboundary(a.degree) * a.values);
}

inline double graph_norm(const DeRhamOps& ops, const Cochain& a) {
  const Cochain da = d(a);
  return std::sqrt(inner(ops, a, a) + inner(ops, da, da));
}

inline Cochain restrict_to(const Cochain& a, const SubcomplexMap& map) {
  if (a.complex != map.parent) throw std::invalid_argument("cochain does not live on the parent complex");
  if (a.is_zero_object()) return Cochain(a.degree, map.child, Vec());
  return Cochain(a.degree, map.child, gather(a.values, map.injection[static_cast<std::size_t>(a.degree)]));
}

/// Zero padding from child to parent. Interface DOFs must vanish (up to
/// `tol` relative to the max-norm of b) for the result to commute with d.
inline Cochain extend_by_zero(const Cochain& b, const SubcomplexMap& map, double tol = 0.0) {
  if (b.complex != map.child) throw std::invalid_argument("cochain does not live on the child complex");
  if (b.is_zero_object()) return Cochain(b.degree, map.parent, Vec());
  const double scale = b.values.size() ? b.values.cwiseAbs().maxCoeff() : 0.0;
  std::string bad;
  int nbad = 0;
  for (Index i : map.child->label(kInterfaceLabel, b.degree))
    if (std::abs(b.values(i)) > tol * scale) {
      if (nbad < 8) bad += (nbad ? ", " : "") + std::to_string(i);
      ++nbad;
    }
  if (nbad) throw std::invalid_argument("extension by zero is non-conforming: " + std::to_string(nbad) +
                                        " nonzero interface DOFs (child simplices " + bad + (nbad > 8 ? ", ..." : "") + ")");
  return Cochain(b.degree, map.parent,
                 scatter(b.values, map.injection[static_cast<std::size_t>(b.degree)], map.parent->count(b.degree)));
}

/// De Rham interpolation of a callable k-form: the integral of the form over
/// each oriented k-simplex, approximated by the average over a barycentric
/// lattice of resolution `refine` (exact for affine integrands).
/// `form(x)` returns coefficients on subsets(n, k).
inline Cochain interpolate(const ComplexPtr& c, int k, const std::function<Vec(const Vec&)>& form, int refine = 4) {
  const int n = c->dim();
  const auto comps = subsets(n, k);
  Vec v(c->count(k));
  for (Index i = 0; i < c->count(k); ++i) {
    const Mat p = c->coords(k, i);
    if (k == 0) {
      v(i) = form(p.row(0).transpose())(0);
      continue;
    }
    // Tangent k-vector of the oriented simplex: minors of the edge matrix.
    Mat e(n, k);
    for (int j = 1; j <= k; ++j) e.col(j - 1) = (p.row(j) - p.row(0)).transpose();
    Vec tangent(static_cast<Index>(comps.size()));
    for (std::size_t a = 0; a < comps.size(); ++a) {
      Mat m(k, k);
      for (int r = 0; r < k; ++r) m.row(r) = e.row(comps[a][static_cast<std::size_t>(r)]);
      tangent(static_cast<Index>(a)) = m.determinant() / factorial(k);
    }
    const std::vector<Vec> pts = lattice_points(p, refine);
    Vec avg = Vec::Zero(tangent.size());
    for (const Vec& x : pts) avg += form(x);
    v(i) = tangent.dot(avg / static_cast<double>(pts.size()));
  }
  return Cochain(k, c, v);
}

}  // namespace cext
