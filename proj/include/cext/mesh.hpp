// Oriented simplicial complexes: construction over boxes by Kuhn
// triangulation, subcomplex extraction with boundary classification, and
// (relative) Betti numbers from exact ranks of the incidence operators.
#pragma once

#include "linalg.hpp"
#include "shapes.hpp"

#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cext {

/// Sorted vertex ids; unused trailing slots hold -1.
using Simplex = std::array<int, 4>;

struct SimplexHash {
  std::size_t operator()(const Simplex& s) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int v : s) h = (h ^ static_cast<std::size_t>(v + 1)) * 1099511628211ULL;
    return h;
  }
};

inline Simplex make_simplex(std::initializer_list<int> ids) {
  Simplex s{-1, -1, -1, -1};
  std::size_t i = 0;
  for (int v : ids) s[i++] = v;
  return s;
}

/// Label names attached to the boundary split of an extracted subcomplex.
inline const std::string kBoundaryLabel = "boundary";
inline const std::string kInterfaceLabel = "interface";  // shared with the complement (the Omega side)
inline const std::string kOuterLabel = "outer";          // on the boundary of the parent

/// An immutable oriented simplicial complex in R^dim (dim = 1, 2, 3).
///
/// simplices[k] lists k-simplices as strictly increasing vertex tuples; the
/// orientation of each simplex is the one induced by that order.
/// coboundary[k] is the signed incidence from k- to (k+1)-simplices, with
/// entry (-1)^j for the face obtained by dropping the j-th vertex.
class OrientedComplex {
 public:
  OrientedComplex() = default;

  /// Closure of the given top simplices, in canonical (lexicographic) order.
  static OrientedComplex from_top_simplices(int dim, Mat vertices, std::vector<Simplex> tops) {
    check_dim(dim, vertices);
    std::vector<std::vector<Simplex>> all(static_cast<std::size_t>(dim + 1));
    for (Simplex& t : tops) {
      validate(t, dim, vertices.rows());
      add_faces(t, dim, all);
    }
    for (auto& level : all) {
      std::sort(level.begin(), level.end());
      level.erase(std::unique(level.begin(), level.end()), level.end());
    }
    return OrientedComplex(dim, std::move(vertices), std::move(all));
  }

  /// Takes simplex lists as given (order preserved) after checking that every
  /// tuple is strictly increasing, unique, and that every face is present.
  static OrientedComplex from_simplices(int dim, Mat vertices, std::vector<std::vector<Simplex>> simplices) {
    check_dim(dim, vertices);
    if (simplices.size() != static_cast<std::size_t>(dim + 1))
      throw std::invalid_argument("expected simplex lists for degrees 0.." + std::to_string(dim));
    for (int k = 0; k <= dim; ++k)
      for (const Simplex& s : simplices[static_cast<std::size_t>(k)]) validate(s, k, vertices.rows());
    OrientedComplex c(dim, std::move(vertices), std::move(simplices));
    for (int k = 1; k <= dim; ++k) {
      for (Index i = 0; i < c.count(k); ++i) {
        const Simplex& s = c.simplex(k, i);
        for (int j = 0; j <= k; ++j)
          if (c.find(k - 1, drop(s, k, j)) < 0)
            throw std::invalid_argument("complex is not closed: a face of " + std::to_string(k) + "-simplex " +
                                        std::to_string(i) + " is missing");
      }
    }
    return c;
  }

  int dim() const { return dim_; }
  const Mat& vertices() const { return vertices_; }
  Index count(int k) const {
    if (k < 0 || k > dim_) return 0;
    return static_cast<Index>(simplices_[static_cast<std::size_t>(k)].size());
  }
  const std::vector<Simplex>& simplices(int k) const { return simplices_.at(static_cast<std::size_t>(k)); }
  const Simplex& simplex(int k, Index i) const { return simplices_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }

  /// Index of a k-simplex or -1.
  Index find(int k, const Simplex& s) const {
    if (k < 0 || k > dim_) return -1;
    const auto& m = lookup_[static_cast<std::size_t>(k)];
    const auto it = m.find(s);
    return it == m.end() ? -1 : it->second;
  }

  /// Signed incidence from k-cochains to (k+1)-cochains; empty for k = dim.
  const SpMat& coboundary(int k) const { return coboundary_.at(static_cast<std::size_t>(k)); }

  /// Vertex coordinates of a k-simplex as rows.
  Mat coords(int k, Index i) const {
    Mat p(k + 1, dim_);
    const Simplex& s = simplex(k, i);
    for (int j = 0; j <= k; ++j) p.row(j) = vertices_.row(s[static_cast<std::size_t>(j)]);
    return p;
  }

  Vec barycenter(int k, Index i) const { return coords(k, i).colwise().mean().transpose(); }

  /// k-dimensional measure of a k-simplex.
  double measure(int k, Index i) const {
    if (k == 0) return 1.0;
    const Mat p = coords(k, i);
    Mat e(dim_, k);
    for (int j = 1; j <= k; ++j) e.col(j - 1) = (p.row(j) - p.row(0)).transpose();
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / f;
  }

  double diameter(int k, Index i) const {
    const Mat p = coords(k, i);
    double d = 0.0;
    for (Index a = 0; a < p.rows(); ++a)
      for (Index b = a + 1; b < p.rows(); ++b) d = std::max(d, (p.row(a) - p.row(b)).norm());
    return d;
  }

  /// Labels: name -> per-degree sorted index lists.
  const std::map<std::string, std::vector<IndexList>>& labels() const { return labels_; }
  bool has_label(const std::string& name) const { return labels_.count(name) > 0; }
  const IndexList& label(const std::string& name, int k) const {
    const auto it = labels_.find(name);
    if (it == labels_.end()) throw std::invalid_argument("unknown label '" + name + "'");
    return it->second.at(static_cast<std::size_t>(k));
  }
  /// Adds or replaces a label; the index lists are sorted and deduplicated.
  void set_label(const std::string& name, std::vector<IndexList> per_degree) {
    per_degree.resize(static_cast<std::size_t>(dim_ + 1));
    for (auto& l : per_degree) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    labels_[name] = std::move(per_degree);
  }

  /// Downward closure of a set of simplices given per degree.
  std::vector<IndexList> closure(const std::vector<IndexList>& seed) const {
    std::vector<std::vector<char>> mark(static_cast<std::size_t>(dim_ + 1));
    for (int k = 0; k <= dim_; ++k) mark[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(count(k)), 0);
    for (int k = 0; k <= dim_ && k < static_cast<int>(seed.size()); ++k)
      for (Index i : seed[static_cast<std::size_t>(k)]) mark[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = 1;
    for (int k = dim_; k >= 1; --k)
      for (Index i = 0; i < count(k); ++i)
        if (mark[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)])
          for (int j = 0; j <= k; ++j)
            mark[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(find(k - 1, drop(simplex(k, i), k, j)))] = 1;
    std::vector<IndexList> out(static_cast<std::size_t>(dim_ + 1));
    for (int k = 0; k <= dim_; ++k)
      for (Index i = 0; i < count(k); ++i)
        if (mark[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) out[static_cast<std::size_t>(k)].push_back(i);
    return out;
  }

  /// Face of a k-simplex without its j-th vertex.
  static Simplex drop(const Simplex& s, int k, int j) {
    Simplex f{-1, -1, -1, -1};
    for (int a = 0, b = 0; a <= k; ++a)
      if (a != j) f[static_cast<std::size_t>(b++)] = s[static_cast<std::size_t>(a)];
    return f;
  }

 private:
  OrientedComplex(int dim, Mat vertices, std::vector<std::vector<Simplex>> simplices)
      : dim_(dim), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
    lookup_.resize(static_cast<std::size_t>(dim_ + 1));
    for (int k = 0; k <= dim_; ++k) {
      auto& m = lookup_[static_cast<std::size_t>(k)];
      m.reserve(simplices_[static_cast<std::size_t>(k)].size());
      for (Index i = 0; i < count(k); ++i)
        if (!m.emplace(simplex(k, i), i).second)
          throw std::invalid_argument("duplicate " + std::to_string(k) + "-simplex");
    }
    coboundary_.resize(static_cast<std::size_t>(dim_ + 1));
    for (int k = 0; k < dim_; ++k) {
      std::vector<Triplet> t;
      t.reserve(static_cast<std::size_t>(count(k + 1) * (k + 2)));
      for (Index i = 0; i < count(k + 1); ++i)
        for (int j = 0; j <= k + 1; ++j)
          t.emplace_back(i, find(k, drop(simplex(k + 1, i), k + 1, j)), (j % 2 == 0) ? 1.0 : -1.0);
      SpMat d(count(k + 1), count(k));
      d.setFromTriplets(t.begin(), t.end());
      coboundary_[static_cast<std::size_t>(k)] = std::move(d);
    }
    coboundary_[static_cast<std::size_t>(dim_)] = SpMat(0, count(dim_));
    // Boundary: closure of facets with exactly one coface.
    std::vector<IndexList> seed(static_cast<std::size_t>(dim_ + 1));
    if (dim_ >= 1) {
      const SpMat& top = coboundary_[static_cast<std::size_t>(dim_ - 1)];
      Eigen::VectorXi deg = Eigen::VectorXi::Zero(count(dim_ - 1));
      for (Index c = 0; c < top.outerSize(); ++c)
        for (SpMat::InnerIterator it(top, c); it; ++it) ++deg(it.col());
      for (Index i = 0; i < count(dim_ - 1); ++i)
        if (deg(i) == 1) seed[static_cast<std::size_t>(dim_ - 1)].push_back(i);
    }
    set_label(kBoundaryLabel, closure(seed));
  }

  static void check_dim(int dim, const Mat& vertices) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("complex dimension must be 1, 2 or 3");
    if (vertices.cols() != dim) throw std::invalid_argument("vertex coordinates do not match dimension");
  }

  static void validate(const Simplex& s, int k, Index nverts) {
    for (int j = 0; j <= k; ++j) {
      const int v = s[static_cast<std::size_t>(j)];
      if (v < 0 || v >= nverts) throw std::invalid_argument("simplex refers to a missing vertex");
      if (j > 0 && v <= s[static_cast<std::size_t>(j - 1)])
        throw std::invalid_argument("simplex vertex tuples must be strictly increasing");
    }
    for (int j = k + 1; j < 4; ++j)
      if (s[static_cast<std::size_t>(j)] != -1) throw std::invalid_argument("simplex has too many vertices");
  }

  static void add_faces(const Simplex& s, int k, std::vector<std::vector<Simplex>>& all) {
    // Every nonempty subset of the vertex tuple is a face.
    const int nv = k + 1;
    for (int mask = 1; mask < (1 << nv); ++mask) {
      Simplex f{-1, -1, -1, -1};
      int m = 0;
      for (int j = 0; j < nv; ++j)
        if (mask & (1 << j)) f[static_cast<std::size_t>(m++)] = s[static_cast<std::size_t>(j)];
      all[static_cast<std::size_t>(m - 1)].push_back(f);
    }
  }

  int dim_ = 0;
  Mat vertices_;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<std::unordered_map<Simplex, Index, SimplexHash>> lookup_;
  std::vector<SpMat> coboundary_;
  std::map<std::string, std::vector<IndexList>> labels_;
};

using ComplexPtr = std::shared_ptr<const OrientedComplex>;

struct Box {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double diameter() const { return (hi - lo).norm(); }
};

inline Box unit_box(int dim) { return Box{Vec::Zero(dim), Vec::Ones(dim)}; }

/// Kuhn triangulation of a structured grid over the box with cell size at
/// most h per axis: every grid cell is split into dim! simplices along the
/// main diagonal. Nested grids (h, h/2) give nested triangulations.
inline ComplexPtr build_box_complex(const Box& box, double h, int dim) {
  if (!(h > 0)) throw std::invalid_argument("mesh size h must be positive");
  if (box.dim() != dim || box.hi.size() != dim) throw std::invalid_argument("box dimension mismatch");
  std::array<int, 3> n{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    const double len = box.hi(a) - box.lo(a);
    if (!(len > 0)) throw std::invalid_argument("degenerate box: side " + std::to_string(a) + " has length " + std::to_string(len));
    n[static_cast<std::size_t>(a)] = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
  }
  std::array<int, 3> stride{1, n[0] + 1, (n[0] + 1) * (n[1] + 1)};
  Index nv = 1;
  for (int a = 0; a < dim; ++a) nv *= n[static_cast<std::size_t>(a)] + 1;
  Mat verts(nv, dim);
  for (Index v = 0; v < nv; ++v) {
    Index r = v;
    for (int a = 0; a < dim; ++a) {
      const int ia = static_cast<int>(r % (n[static_cast<std::size_t>(a)] + 1));
      r /= n[static_cast<std::size_t>(a)] + 1;
      verts(v, a) = box.lo(a) + (box.hi(a) - box.lo(a)) * ia / n[static_cast<std::size_t>(a)];
    }
  }
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::vector<Simplex> tops;
  const std::array<int, 3> cells{n[0], dim > 1 ? n[1] : 1, dim > 2 ? n[2] : 1};
  for (int z = 0; z < cells[2]; ++z)
    for (int y = 0; y < cells[1]; ++y)
      for (int x = 0; x < cells[0]; ++x) {
        const int corner = x * stride[0] + y * stride[1] + z * stride[2];
        std::iota(perm.begin(), perm.end(), 0);
        do {
          Simplex s{-1, -1, -1, -1};
          int v = corner;
          s[0] = v;
          for (int j = 0; j < dim; ++j) {
            v += stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            s[static_cast<std::size_t>(j + 1)] = v;
          }
          // Walking along positive axis steps only increases the index.
          tops.push_back(s);
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
  return std::make_shared<const OrientedComplex>(OrientedComplex::from_top_simplices(dim, std::move(verts), std::move(tops)));
}

/// An extracted subcomplex with injections into the parent.
/// The child carries labels `interface` (boundary simplices shared with the
/// closure of the parent's complement) and `outer` (the remaining boundary
/// simplices, which lie on the parent boundary).
struct SubcomplexMap {
  ComplexPtr parent;
  ComplexPtr child;
  std::vector<IndexList> injection;      // child index -> parent index, per degree
  std::vector<IndexList> parent_to_child;  // parent index -> child index or -1
  std::vector<char> kept;                // parent top simplices selected

  Index to_child(int k, Index parent_index) const {
    return parent_to_child[static_cast<std::size_t>(k)][static_cast<std::size_t>(parent_index)];
  }
  Index to_parent(int k, Index child_index) const {
    return injection[static_cast<std::size_t>(k)][static_cast<std::size_t>(child_index)];
  }
};

inline SubcomplexMap extract_subcomplex(const ComplexPtr& parent, const std::vector<char>& keep) {
  const int n = parent->dim();
  if (static_cast<Index>(keep.size()) != parent->count(n)) throw std::invalid_argument("selection size mismatch");
  std::vector<IndexList> seed(static_cast<std::size_t>(n + 1)), comp_seed(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i < parent->count(n); ++i)
    (keep[static_cast<std::size_t>(i)] ? seed : comp_seed)[static_cast<std::size_t>(n)].push_back(i);
  if (seed[static_cast<std::size_t>(n)].empty()) throw std::invalid_argument("subcomplex selection is empty");
  const auto in_child = parent->closure(seed);
  const auto in_comp = parent->closure(comp_seed);

  // Monotone vertex renumbering keeps tuples sorted, so orientations match.
  IndexList vmap(static_cast<std::size_t>(parent->count(0)), -1);
  const IndexList& used = in_child[0];
  Mat verts(static_cast<Index>(used.size()), n);
  for (std::size_t i = 0; i < used.size(); ++i) {
    vmap[static_cast<std::size_t>(used[i])] = static_cast<Index>(i);
    verts.row(static_cast<Index>(i)) = parent->vertices().row(used[i]);
  }
  std::vector<std::vector<Simplex>> simp(static_cast<std::size_t>(n + 1));
  SubcomplexMap map;
  map.parent = parent;
  map.kept = keep;
  map.injection.resize(static_cast<std::size_t>(n + 1));
  map.parent_to_child.resize(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    map.parent_to_child[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(parent->count(k)), -1);
    for (Index pi : in_child[static_cast<std::size_t>(k)]) {
      Simplex s = parent->simplex(k, pi);
      for (int j = 0; j <= k; ++j) s[static_cast<std::size_t>(j)] = static_cast<int>(vmap[static_cast<std::size_t>(s[static_cast<std::size_t>(j)])]);
      map.parent_to_child[static_cast<std::size_t>(k)][static_cast<std::size_t>(pi)] = static_cast<Index>(simp[static_cast<std::size_t>(k)].size());
      simp[static_cast<std::size_t>(k)].push_back(s);
      map.injection[static_cast<std::size_t>(k)].push_back(pi);
    }
  }
  OrientedComplex child = OrientedComplex::from_simplices(n, std::move(verts), std::move(simp));
  std::vector<IndexList> iface(static_cast<std::size_t>(n + 1)), outer(static_cast<std::size_t>(n + 1));
  std::vector<std::vector<char>> comp_mark(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    comp_mark[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(parent->count(k)), 0);
    for (Index pi : in_comp[static_cast<std::size_t>(k)]) comp_mark[static_cast<std::size_t>(k)][static_cast<std::size_t>(pi)] = 1;
    for (Index ci : child.label(kBoundaryLabel, k)) {
      const Index pi = map.injection[static_cast<std::size_t>(k)][static_cast<std::size_t>(ci)];
      (comp_mark[static_cast<std::size_t>(k)][static_cast<std::size_t>(pi)] ? iface : outer)[static_cast<std::size_t>(k)].push_back(ci);
    }
  }
  child.set_label(kInterfaceLabel, std::move(iface));
  child.set_label(kOuterLabel, std::move(outer));
  map.child = std::make_shared<const OrientedComplex>(std::move(child));
  return map;
}

/// Keeps top simplices whose barycenter lies inside the shape.
inline std::vector<char> barycenter_selection(const OrientedComplex& c, const Shape& shape) {
  const int n = c.dim();
  std::vector<char> keep(static_cast<std::size_t>(c.count(n)));
  for (Index i = 0; i < c.count(n); ++i) keep[static_cast<std::size_t>(i)] = shape.contains(c.barycenter(n, i)) ? 1 : 0;
  return keep;
}

inline SubcomplexMap extract_subcomplex(const ComplexPtr& parent, const Shape& shape) {
  return extract_subcomplex(parent, barycenter_selection(*parent, shape));
}

/// Ranks of (relative) simplicial homology over the rationals, degrees 0..dim.
inline std::vector<Index> betti_numbers(const OrientedComplex& c, const std::optional<std::string>& relative_part = {}) {
  const int n = c.dim();
  std::vector<IndexList> keep(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k) {
    std::vector<char> rel(static_cast<std::size_t>(c.count(k)), 0);
    if (relative_part)
      for (Index i : c.label(*relative_part, k)) rel[static_cast<std::size_t>(i)] = 1;
    for (Index i = 0; i < c.count(k); ++i)
      if (!rel[static_cast<std::size_t>(i)]) keep[static_cast<std::size_t>(k)].push_back(i);
  }
  std::vector<Index> rank(static_cast<std::size_t>(n + 1), 0);  // rank of coboundary k -> k+1
  for (int k = 0; k < n; ++k)
    rank[static_cast<std::size_t>(k)] =
        integer_rank(select(c.coboundary(k), keep[static_cast<std::size_t>(k + 1)], keep[static_cast<std::size_t>(k)]));
  std::vector<Index> b(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k)
    b[static_cast<std::size_t>(k)] = static_cast<Index>(keep[static_cast<std::size_t>(k)].size()) - rank[static_cast<std::size_t>(k)] -
                                     (k > 0 ? rank[static_cast<std::size_t>(k - 1)] : 0);
  return b;
}

/// Connected components of the top simplices (sharing a facet or any vertex
/// path); equals b_0 for a pure complex.
inline Index component_count(const OrientedComplex& c) { return betti_numbers(c)[0]; }

/// Minimal distance between vertices of two labelled parts of a complex;
/// +inf when either part is empty.
inline double label_distance(const OrientedComplex& c, const std::string& a, const std::string& b) {
  double best = std::numeric_limits<double>::infinity();
  const IndexList& va = c.label(a, 0);
  const IndexList& vb = c.label(b, 0);
  for (Index i : va)
    for (Index j : vb) best = std::min(best, (c.vertices().row(i) - c.vertices().row(j)).norm());
  return best;
}

/// Largest pairwise vertex distance (= diameter of the convex hull).
inline double hull_diameter(const OrientedComplex& c) {
  double d = 0.0;
  const Mat& v = c.vertices();
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = i + 1; j < v.rows(); ++j) d = std::max(d, (v.row(i) - v.row(j)).squaredNorm());
  return std::sqrt(d);
}

/// Same combinatorics with every coordinate multiplied by s.
inline ComplexPtr scaled(const OrientedComplex& c, double s) {
  std::vector<std::vector<Simplex>> simp(static_cast<std::size_t>(c.dim() + 1));
  for (int k = 0; k <= c.dim(); ++k) simp[static_cast<std::size_t>(k)] = c.simplices(k);
  OrientedComplex out = OrientedComplex::from_simplices(c.dim(), c.vertices() * s, std::move(simp));
  for (const auto& [name, lists] : c.labels())
    if (name != kBoundaryLabel) out.set_label(name, lists);
  return std::make_shared<const OrientedComplex>(std::move(out));
}

}  // namespace cext
