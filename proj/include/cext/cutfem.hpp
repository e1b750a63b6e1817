// Unfitted discretization harness: active meshes cut from a background grid
// by a level set, cut-element quadrature, ghost-penalty stabilized inner
// products and the discrete / stabilized Poincare experiments built on them.
#pragma once

#include "spectra.hpp"

#include <map>
#include <numbers>

namespace cext {

struct ActiveMesh {
  ComplexPtr background;
  ShapePtr physical;
  double h = 0.0;
  SubcomplexMap active;              // active elements as a subcomplex of the background
  std::vector<Relation> relation;    // per active element: Inside or Cut
  IndexList cut_elements;            // active-complex top indices
  IndexList ghost_facets;            // active-complex facets with two active cofaces, one of them cut
  std::vector<std::array<Index, 2>> ghost_pairs;  // the two cofaces of each ghost facet
  std::string warning;

  const ComplexPtr& complex() const { return active.child; }
  int dim() const { return background->dim(); }
};

/// Cofaces (top simplices) of every facet.
inline std::vector<IndexList> facet_cofaces(const OrientedComplex& c) {
  const int n = c.dim();
  std::vector<IndexList> out(static_cast<std::size_t>(c.count(n - 1)));
  const SpMat& d = c.coboundary(n - 1);
  for (Index col = 0; col < d.outerSize(); ++col)
    for (SpMat::InnerIterator it(d, col); it; ++it) out[static_cast<std::size_t>(it.col())].push_back(it.row());
  return out;
}

/// T_h = background elements meeting the open level-set domain.
inline ActiveMesh build_active_mesh(const ComplexPtr& background, const ShapePtr& shape, double h) {
  if (!shape) throw std::invalid_argument("active mesh needs a level-set domain");
  ActiveMesh am;
  am.background = background;
  am.physical = shape;
  am.h = h;
  const int n = background->dim();
  std::vector<char> keep(static_cast<std::size_t>(background->count(n)), 0);
  std::vector<Relation> rel(keep.size());
  for (Index t = 0; t < background->count(n); ++t) {
    rel[static_cast<std::size_t>(t)] = shape->classify(background->coords(n, t));
    keep[static_cast<std::size_t>(t)] = rel[static_cast<std::size_t>(t)] != Relation::Outside;
  }
  if (std::none_of(keep.begin(), keep.end(), [](char k) { return k != 0; }))
    throw std::invalid_argument("level-set domain does not meet the background mesh");
  am.active = extract_subcomplex(background, keep);
  const OrientedComplex& c = *am.active.child;
  am.relation.resize(static_cast<std::size_t>(c.count(n)));
  for (Index t = 0; t < c.count(n); ++t) {
    am.relation[static_cast<std::size_t>(t)] = rel[static_cast<std::size_t>(am.active.to_parent(n, t))];
    if (am.relation[static_cast<std::size_t>(t)] == Relation::Cut) am.cut_elements.push_back(t);
  }
  const auto cof = facet_cofaces(c);
  for (Index f = 0; f < c.count(n - 1); ++f) {
    const auto& tt = cof[static_cast<std::size_t>(f)];
    if (tt.size() != 2) continue;
    if (am.relation[static_cast<std::size_t>(tt[0])] == Relation::Cut || am.relation[static_cast<std::size_t>(tt[1])] == Relation::Cut) {
      am.ghost_facets.push_back(f);
      am.ghost_pairs.push_back({tt[0], tt[1]});
    }
  }
  if (shape->feature_size() < 2 * h) {
    std::ostringstream os;
    os << "level set not resolved: feature size " << shape->feature_size() << " is below two elements (2h = " << 2 * h << ")";
    am.warning = os.str();
  }
  return am;
}

/// Sampling check of Omega within the active domain: no lattice point of an
/// inactive background element lies inside the level set.
inline bool covers_physical_domain(const ActiveMesh& am, int denom = 6) {
  const int n = am.dim();
  for (Index t = 0; t < am.background->count(n); ++t) {
    if (am.active.kept[static_cast<std::size_t>(t)]) continue;
    for (const Vec& x : lattice_points(am.background->coords(n, t), denom))
      if (am.physical->contains(x)) return false;
  }
  return true;
}

namespace detail {

/// Whitney values of all local k-faces at x: (components x faces).
inline Mat whitney_block(const WhitneyElement& el, int k, const Vec& x) {
  const int n = el.dim();
  const auto faces = subsets(n + 1, k + 1);
  const auto comps = subsets(n, k);
  Mat j(static_cast<Index>(comps.size()), static_cast<Index>(faces.size()));
  for (std::size_t f = 0; f < faces.size(); ++f) j.col(static_cast<Index>(f)) = el.whitney(faces[f], x);
  return j;
}

/// Adds the exact integral over the simplex `pts` (rows) of the products of
/// affine fields whose vertex values are `vals[i]` (components x dofs).
inline void accumulate_affine(Mat& block, double volume, const std::vector<Mat>& vals) {
  const double np1 = static_cast<double>(vals.size());
  const double c = volume / (np1 * (np1 + 1.0));
  Mat sum = Mat::Zero(vals[0].rows(), vals[0].cols());
  for (const Mat& v : vals) {
    block.noalias() += c * v.transpose() * v;
    sum += v;
  }
  block.noalias() += c * sum.transpose() * sum;
}

inline double triangle_area(const Vec& a, const Vec& b, const Vec& c) {
  return 0.5 * std::abs((b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0)));
}

/// Pieces of the triangle where the linear interpolant of `level` is negative.
inline void clip_triangle(const std::array<Vec, 3>& p, const std::array<double, 3>& f, std::vector<std::array<Vec, 3>>& out) {
  int neg = 0;
  for (double v : f) neg += v < 0.0;
  if (neg == 0) return;
  if (neg == 3) {
    out.push_back(p);
    return;
  }
  auto cross = [&](int a, int b) -> Vec { return p[a] + (f[a] / (f[a] - f[b])) * (p[b] - p[a]); };
  // `odd` is the vertex whose sign differs from the other two.
  int odd = 0;
  for (int i = 0; i < 3; ++i)
    if ((f[i] < 0.0) == (neg == 1)) odd = i;
  const int a = odd, b = (odd + 1) % 3, c = (odd + 2) % 3;
  const Vec ab = cross(a, b), ac = cross(a, c);
  if (neg == 1) {
    out.push_back({p[a], ab, ac});
  } else {
    out.push_back({p[b], p[c], ac});
    out.push_back({p[b], ac, ab});
  }
}

inline void red_refine(const std::array<Vec, 3>& t, int depth, std::vector<std::array<Vec, 3>>& out) {
  if (depth == 0) {
    out.push_back(t);
    return;
  }
  const Vec m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m02 = 0.5 * (t[0] + t[2]);
  red_refine({t[0], m01, m02}, depth - 1, out);
  red_refine({m01, t[1], m12}, depth - 1, out);
  red_refine({m02, m12, t[2]}, depth - 1, out);
  red_refine({m01, m12, m02}, depth - 1, out);
}

}  // namespace detail

/// Local Whitney mass over T intersected with {level < 0}: `depth` levels of
/// red refinement, then linear clipping of each sub-triangle. Planar only.
inline Mat cut_local_mass(const WhitneyElement& el, const Shape& shape, int k, int depth = 3) {
  if (el.dim() != 2) throw std::invalid_argument("cut quadrature is implemented for planar meshes only");
  const Mat& v = el.vertices();
  std::vector<std::array<Vec, 3>> subs, pieces;
  detail::red_refine({Vec(v.row(0).transpose()), Vec(v.row(1).transpose()), Vec(v.row(2).transpose())}, depth, subs);
  for (const auto& s : subs) detail::clip_triangle(s, {shape.level(s[0]), shape.level(s[1]), shape.level(s[2])}, pieces);
  const Index nf = static_cast<Index>(subsets(3, k + 1).size());
  Mat block = Mat::Zero(nf, nf);
  for (const auto& p : pieces) {
    const double area = detail::triangle_area(p[0], p[1], p[2]);
    if (area == 0.0) continue;
    std::vector<Mat> vals;
    for (const Vec& x : p) vals.push_back(detail::whitney_block(el, k, x));
    detail::accumulate_affine(block, area, vals);
  }
  return block;
}

/// (u, v)_Omega on the active complex: exact mass on uncut elements, cut
/// quadrature on cut ones.
inline SpMat cut_mass(const ActiveMesh& am, int k, int depth = 3) {
  const OrientedComplex& c = *am.complex();
  const int n = c.dim();
  std::vector<IndexList> dofs;
  std::vector<Mat> blocks;
  for (Index t = 0; t < c.count(n); ++t) {
    const WhitneyElement el(c.coords(n, t));
    dofs.push_back(local_face_indices(c, t, k));
    blocks.push_back(am.relation[static_cast<std::size_t>(t)] == Relation::Cut ? cut_local_mass(el, *am.physical, k, depth)
                                                                                : el.local_mass(k));
  }
  return assemble_from_local(c.count(k), dofs, blocks);
}

/// Ghost penalty: sum over ghost facets F = T1 | T2 of the L2 norm over
/// T1 u T2 of the difference between the affine continuations of u|T1 and u|T2.
inline SpMat ghost_penalty(const ActiveMesh& am, int k) {
  const OrientedComplex& c = *am.complex();
  const int n = c.dim();
  std::vector<IndexList> dofs;
  std::vector<Mat> blocks;
  for (const auto& pair : am.ghost_pairs) {
    const WhitneyElement e1(c.coords(n, pair[0])), e2(c.coords(n, pair[1]));
    const IndexList l1 = local_face_indices(c, pair[0], k), l2 = local_face_indices(c, pair[1], k);
    IndexList all = l1;
    for (Index i : l2)
      if (std::find(all.begin(), all.end(), i) == all.end()) all.push_back(i);
    auto column = [&](Index g) { return static_cast<Index>(std::find(all.begin(), all.end(), g) - all.begin()); };
    auto jump_at = [&](const Vec& x) {
      const Mat w1 = detail::whitney_block(e1, k, x), w2 = detail::whitney_block(e2, k, x);
      Mat j = Mat::Zero(w1.rows(), static_cast<Index>(all.size()));
      for (std::size_t f = 0; f < l1.size(); ++f) j.col(column(l1[f])) += w1.col(static_cast<Index>(f));
      for (std::size_t f = 0; f < l2.size(); ++f) j.col(column(l2[f])) -= w2.col(static_cast<Index>(f));
      return j;
    };
    Mat block = Mat::Zero(static_cast<Index>(all.size()), static_cast<Index>(all.size()));
    for (const WhitneyElement* e : {&e1, &e2}) {
      std::vector<Mat> vals;
      for (Index r = 0; r <= n; ++r) vals.push_back(jump_at(e->vertices().row(r).transpose()));
      detail::accumulate_affine(block, e->volume(), vals);
    }
    dofs.push_back(all);
    blocks.push_back(block);
  }
  return assemble_from_local(c.count(k), dofs, blocks);
}

struct StabilizedOps {
  ActiveMesh mesh;
  OpsPtr base;                  // Whitney operators of the active complex
  double penalty_scale = 1.0;
  std::vector<SpMat> cut;       // (.,.)_Omega per degree
  std::vector<SpMat> penalty;   // s(.,.) per degree, before scaling
  std::vector<SpMat> s_inner;   // cut + penalty_scale * penalty

  int dim() const { return mesh.dim(); }
  const SpMat& inner(int k) const { return s_inner.at(static_cast<std::size_t>(k)); }
  HodgeSolver solver() const { return HodgeSolver(base, BoundaryCondition::stabilized(), s_inner); }
};

inline constexpr double kDefaultPenaltyScale = 0.25;

inline StabilizedOps assemble_stabilized(const ActiveMesh& am, double penalty_scale = kDefaultPenaltyScale, int depth = 3) {
  if (!(penalty_scale >= 0.0)) throw std::invalid_argument("penalty scale must be non-negative");
  StabilizedOps st;
  st.mesh = am;
  st.base = assemble(am.complex());
  st.penalty_scale = penalty_scale;
  for (int k = 0; k <= am.dim(); ++k) {
    st.cut.push_back(cut_mass(am, k, depth));
    st.penalty.push_back(ghost_penalty(am, k));
    st.s_inner.push_back(SpMat(st.cut.back() + penalty_scale * st.penalty.back()));
  }
  return st;
}

struct NormEquivalence {
  double lower = 0.0;  // min |u|_s / |u|_{L2(Omega_h)}
  double upper = 0.0;  // max |u|_s / |u|_{L2(Omega_h)}
};

/// Extreme ratios of the stabilized norm to the L2 norm on the whole active
/// domain, from the extreme generalized eigenvalues.
inline NormEquivalence norm_equivalence(const StabilizedOps& st, int k) {
  const SpMat& s = st.inner(k);
  const SpMat& m = st.base->mass(k);
  const SpdSolver sm(m), ss(s);
  std::mt19937_64 rng(0xe9ULL + static_cast<std::uint64_t>(k));
  const Vec start = random_normal(m.rows(), rng);
  const int iters = static_cast<int>(std::min<Index>(300, m.rows()));
  const auto hi = lanczos_largest([&](const Vec& x) { return sm.solve(s * x); }, m, start, iters, 1e-10);
  const auto lo = lanczos_largest([&](const Vec& x) { return ss.solve(m * x); }, s, start, iters, 1e-10);
  return {1.0 / std::sqrt(lo.theta), std::sqrt(hi.theta)};
}

inline HarmonicBasis stabilized_harmonic_basis(const StabilizedOps& st, int k) { return harmonic_basis(st.solver(), k); }

/// C_S = 1/sqrt(lambda_1) for |D eta|_s^2 / |eta|_s^2 over eta s-orthogonal to ker D.
inline SpectralReport stabilized_poincare_constant(const StabilizedOps& st, int k) {
  const HodgeSolver hs = st.solver();
  return first_eigenvalue(hs, k, Convention::Stabilized);
}

/// Transfer between a coarse grid complex and a nested refinement of it:
/// prolongation of coarse Whitney forms (exact, they are fine Whitney forms)
/// and the de Rham map of fine Whitney forms onto coarse simplices (sums of
/// fine cochain values), which commutes with D.
class NestedTransfer {
 public:
  NestedTransfer(ComplexPtr coarse, ComplexPtr fine, int ratio = 2) : coarse_(std::move(coarse)), fine_(std::move(fine)) {
    const int n = coarse_->dim();
    if (fine_->dim() != n) throw std::invalid_argument("nested transfer needs equal dimensions");
    const double scale = 1e9 / std::max(1.0, hull_diameter(*coarse_));
    std::map<std::vector<long long>, Index> vid;
    auto key = [&](const Vec& x) {
      std::vector<long long> k(static_cast<std::size_t>(x.size()));
      for (Index a = 0; a < x.size(); ++a) k[static_cast<std::size_t>(a)] = std::llround(x(a) * scale);
      return k;
    };
    for (Index v = 0; v < fine_->count(0); ++v) vid[key(fine_->coords(0, v).row(0).transpose())] = v;
    prolong_.resize(static_cast<std::size_t>(n + 1));
    restrict_.resize(static_cast<std::size_t>(n + 1));
    owner_.assign(static_cast<std::size_t>(fine_->count(n)), -1);
    for (int k = 0; k <= n; ++k) {
      // De Rham map: fine k-simplices whose vertices lie on the coarse simplex's lattice.
      std::vector<Triplet> rt;
      for (Index s = 0; s < coarse_->count(k); ++s) {
        const Mat p = coarse_->coords(k, s);
        IndexList verts;
        for (const Vec& x : lattice_points(p, ratio)) {
          auto it = vid.find(key(x));
          if (it == vid.end()) throw std::invalid_argument("fine mesh is not a refinement of the coarse mesh");
          verts.push_back(it->second);
        }
        std::sort(verts.begin(), verts.end());
        const Vec tc = tangent(p);
        for (const auto& sub : subsets(static_cast<int>(verts.size()), k + 1)) {
          Simplex g{-1, -1, -1, -1};
          for (int j = 0; j <= k; ++j) g[static_cast<std::size_t>(j)] = static_cast<int>(verts[static_cast<std::size_t>(sub[static_cast<std::size_t>(j)])]);
          const Index f = fine_->find(k, g);
          if (f < 0) continue;
          const double sg = k == 0 ? 1.0 : (tangent(fine_->coords(k, f)).dot(tc) > 0 ? 1.0 : -1.0);
          rt.emplace_back(s, f, sg);
          if (k == n) owner_[static_cast<std::size_t>(f)] = s;
        }
      }
      restrict_[static_cast<std::size_t>(k)] = SpMat(coarse_->count(k), fine_->count(k));
      restrict_[static_cast<std::size_t>(k)].setFromTriplets(rt.begin(), rt.end());
    }
    for (Index t = 0; t < fine_->count(n); ++t)
      if (owner_[static_cast<std::size_t>(t)] < 0) throw std::invalid_argument("fine element outside every coarse element");
    // Prolongation: fine value = integral of the coarse Whitney field over the
    // fine simplex = tangent . field(barycenter), the integrand being affine.
    for (int k = 0; k <= n; ++k) {
      std::vector<Triplet> pt;
      std::vector<char> done(static_cast<std::size_t>(fine_->count(k)), 0);
      for (Index t = 0; t < fine_->count(n); ++t) {
        const Index ct = owner_[static_cast<std::size_t>(t)];
        const WhitneyElement el(coarse_->coords(n, ct));
        const IndexList cdofs = local_face_indices(*coarse_, ct, k);
        for (Index f : local_face_indices(*fine_, t, k)) {
          if (done[static_cast<std::size_t>(f)]) continue;
          done[static_cast<std::size_t>(f)] = 1;
          const Mat p = fine_->coords(k, f);
          const Vec w = k == 0 ? Vec::Ones(1) : tangent(p);
          const Mat vals = detail::whitney_block(el, k, p.colwise().mean().transpose());
          const Vec row = vals.transpose() * w;
          for (std::size_t j = 0; j < cdofs.size(); ++j)
            if (row(static_cast<Index>(j)) != 0.0) pt.emplace_back(f, cdofs[j], row(static_cast<Index>(j)));
        }
      }
      prolong_[static_cast<std::size_t>(k)] = SpMat(fine_->count(k), coarse_->count(k));
      prolong_[static_cast<std::size_t>(k)].setFromTriplets(pt.begin(), pt.end());
    }
  }

  const ComplexPtr& coarse() const { return coarse_; }
  const ComplexPtr& fine() const { return fine_; }
  const SpMat& prolongation(int k) const { return prolong_.at(static_cast<std::size_t>(k)); }
  const SpMat& de_rham(int k) const { return restrict_.at(static_cast<std::size_t>(k)); }
  /// Coarse element containing each fine element.
  const IndexList& owner() const { return owner_; }

  /// Tangent k-vector of an oriented k-simplex on the basis subsets(n, k).
  static Vec tangent(const Mat& p) {
    const int n = static_cast<int>(p.cols());
    const int k = static_cast<int>(p.rows()) - 1;
    const auto comps = subsets(n, k);
    Vec t(static_cast<Index>(comps.size()));
    if (k == 0) return Vec::Ones(1);
    Mat e(n, k);
    for (int j = 1; j <= k; ++j) e.col(j - 1) = (p.row(j) - p.row(0)).transpose();
    for (std::size_t a = 0; a < comps.size(); ++a) {
      Mat m(k, k);
      for (int r = 0; r < k; ++r) m.row(r) = e.row(comps[a][static_cast<std::size_t>(r)]);
      t(static_cast<Index>(a)) = m.determinant() / factorial(k);
    }
    return t;
  }

 private:
  ComplexPtr coarse_, fine_;
  std::vector<SpMat> prolong_, restrict_;
  IndexList owner_;
};

/// Active(fine) is contained in active(coarse) as point sets.
inline bool active_nested(const ActiveMesh& coarse, const ActiveMesh& fine, const NestedTransfer& tr) {
  const int n = coarse.dim();
  for (Index t = 0; t < fine.background->count(n); ++t)
    if (fine.active.kept[static_cast<std::size_t>(t)] && !coarse.active.kept[static_cast<std::size_t>(tr.owner()[static_cast<std::size_t>(t)])])
      return false;
  return true;
}

/// De Rham interpolant of a random smooth trigonometric field: point values
/// (k=0), edge integrals of a vector field (k=1) or face integrals (k=2).
/// The law of the field does not depend on the mesh, so samples drawn at
/// different h are comparable.
inline Cochain smooth_random_cochain(const ComplexPtr& c, int k, std::mt19937_64& rng, int max_wave = 3, int modes = 6) {
  if (c->dim() != 2 || k < 0 || k > 2) throw std::invalid_argument("smooth_random_cochain supports 2D complexes only");
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> wave(-max_wave, max_wave);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Mode {
    Vec p;
    double phi;
    Vec amp;
  };
  const int comps = k == 1 ? 2 : 1;
  std::vector<Mode> ms;
  for (int i = 0; i < modes; ++i) {
    Mode m{Vec(2), phase(rng), Vec(comps)};
    m.p << wave(rng), wave(rng);
    for (int a = 0; a < comps; ++a) m.amp(a) = g(rng);
    ms.push_back(m);
  }
  auto field = [&](const Vec& x) {
    Vec f = Vec::Zero(comps);
    for (const Mode& m : ms) f += m.amp * std::sin(std::numbers::pi * m.p.dot(x) + m.phi);
    return f;
  };
  const Mat& X = c->vertices();
  auto at = [&](int v) -> Vec { return X.row(v).transpose(); };
  Vec out(c->count(k));
  for (Index i = 0; i < c->count(k); ++i) {
    const Simplex& s = c->simplices(k)[static_cast<std::size_t>(i)];
    if (k == 0) {
      out(i) = field(at(s[0]))(0);
    } else if (k == 1) {
      // 3-point Gauss-Legendre along the edge, tangent from s[0] to s[1]
      const Vec a = at(s[0]), t = at(s[1]) - a;
      static const double q[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)}, w[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += w[j] * field(a + q[j] * t).dot(t);
      out(i) = v;
    } else {
      const Vec a = at(s[0]), b = at(s[1]), d = at(s[2]);
      const double area = 0.5 * ((b(0) - a(0)) * (d(1) - a(1)) - (b(1) - a(1)) * (d(0) - a(0)));
      out(i) = area * (field((4 * a + b + d) / 6)(0) + field((a + 4 * b + d) / 6)(0) + field((a + b + 4 * d) / 6)(0)) / 3.0;
    }
  }
  return Cochain(k, c, out);
}

struct DiscretePotential {
  Cochain tau;            // discrete potential on Omega_h
  double ratio = 0.0;     // |tau| / |D omega| on Omega_h
  double identity_residual = 0.0;  // max |D tau - D omega| / max |D omega|
  double extension_ratio = 0.0;    // |lambda|_A / |sigma|_Omega of the extended datum
};

/// Potential of D omega_h through the extension to K and the minimal-norm
/// potential on K, restricted back to Omega_h (K meshed by the same grid).
inline DiscretePotential discrete_uniform_poincare(const ExtensionProblem& p, const HodgeSolver& k_solver, const Cochain& omega_h) {
  const int k = omega_h.degree;
  if (omega_h.complex != p.omega_map().child) throw std::invalid_argument("datum must live on the Omega_h complex of the problem");
  if (k < 0 || k >= p.dim()) throw std::invalid_argument("discrete Poincare needs 0 <= k <= n-1");
  const auto& om = *p.ops_omega();
  DiscretePotential out;
  const Cochain sigma = d(omega_h);
  const double ns = l2_norm(om, sigma);
  const double smax = sigma.values.size() ? sigma.values.cwiseAbs().maxCoeff() : 0.0;
  if (smax == 0.0) {
    out.tau = Cochain::zero(k, p.omega_map().child);
    return out;
  }
  const ExtensionResult ext = p.extend(sigma);
  out.extension_ratio = l2_norm(*p.ops_a(), ext.lambda) / ns;
  const Vec eta = k_solver.min_norm_reduced(k, ext.extended.values);
  out.tau = restrict_to(Cochain(k, p.k_complex(), eta), p.omega_map());
  out.identity_residual = (d(out.tau).values - sigma.values).cwiseAbs().maxCoeff() / smax;
  out.ratio = l2_norm(om, out.tau) / ns;
  return out;
}

/// Same pipeline with K meshed `ratio` times finer than Omega_h: the datum is
/// prolonged, extended and lifted on the fine mesh, and the potential is
/// brought back by the de Rham map of the nested pair.
struct RefinedPotentialPipeline {
  ComplexPtr coarse_background;
  std::vector<char> coarse_selection;
  std::shared_ptr<NestedTransfer> transfer;
  ProblemPtr fine_problem;
  std::shared_ptr<HodgeSolver> fine_k_solver;
  SubcomplexMap coarse_omega;

  RefinedPotentialPipeline(const Box& box, double h, int dim, const std::vector<char>& selection_or_empty, const ShapePtr& shape,
                           int ratio = 2) {
    coarse_background = build_box_complex(box, h, dim);
    coarse_selection = selection_or_empty.empty() ? build_active_mesh(coarse_background, shape, h).active.kept : selection_or_empty;
    transfer = std::make_shared<NestedTransfer>(coarse_background, build_box_complex(box, h / ratio, dim), ratio);
    const int n = dim;
    std::vector<char> fine_sel(static_cast<std::size_t>(transfer->fine()->count(n)));
    for (Index t = 0; t < transfer->fine()->count(n); ++t)
      fine_sel[static_cast<std::size_t>(t)] = coarse_selection[static_cast<std::size_t>(transfer->owner()[static_cast<std::size_t>(t)])];
    fine_problem = std::make_shared<const ExtensionProblem>(transfer->fine(), fine_sel, ExtensionVariant::Mixed);
    fine_k_solver = std::make_shared<HodgeSolver>(fine_problem->ops_k(), BoundaryCondition::absolute());
    coarse_omega = extract_subcomplex(coarse_background, coarse_selection);
  }

  DiscretePotential run(const Cochain& omega_h) const {
    const int k = omega_h.degree;
    const auto ops_c = assemble(coarse_omega.child);
    DiscretePotential out;
    const Cochain sigma = d(omega_h);
    const double ns = l2_norm(*ops_c, sigma);
    const double smax = sigma.values.size() ? sigma.values.cwiseAbs().maxCoeff() : 0.0;
    if (smax == 0.0) {
      out.tau = Cochain::zero(k, coarse_omega.child);
      return out;
    }
    // Any background cochain carrying sigma on Omega_h will do: the fine
    // values inside Omega_h only see DOFs of Omega_h.
    const Vec sigma_bg = scatter(sigma.values, coarse_omega.injection[static_cast<std::size_t>(k + 1)], coarse_background->count(k + 1));
    const Vec fine_bg = transfer->prolongation(k + 1) * sigma_bg;
    const Cochain fine_sigma = restrict_to(Cochain(k + 1, transfer->fine(), fine_bg), fine_problem->omega_map());
    const ExtensionResult ext = fine_problem->extend(fine_sigma);
    out.extension_ratio = l2_norm(*fine_problem->ops_a(), ext.lambda) / l2_norm(*fine_problem->ops_omega(), fine_sigma);
    const Vec eta = fine_k_solver->min_norm_reduced(k, ext.extended.values);
    const Cochain tau_bg(k, coarse_background, transfer->de_rham(k) * eta);
    out.tau = restrict_to(tau_bg, coarse_omega);
    out.identity_residual = (d(out.tau).values - sigma.values).cwiseAbs().maxCoeff() / smax;
    out.ratio = l2_norm(*ops_c, out.tau) / ns;
    return out;
  }
};

}  // namespace cext
