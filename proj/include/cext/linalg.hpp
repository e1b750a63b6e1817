// Sparse linear algebra backbone: exact integer rank over a prime field,
// symmetric positive definite and saddle-point solves, and a Lanczos
// iteration for extreme eigenvalues of operators self-adjoint in a
// weighted inner product.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cext {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using RowSpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using IndexList = std::vector<Index>;

/// Raised when a numerical solve breaks down or a discrete
/// compatibility condition is violated beyond tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

constexpr std::uint64_t kPrime = 2147483647ULL;  // 2^31 - 1

inline std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b) { return (a * b) % kPrime; }

inline std::uint64_t mod_pow(std::uint64_t a, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mod_mul(r, a);
    a = mod_mul(a, a);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t mod_inv(std::uint64_t a) { return mod_pow(a, kPrime - 2); }

inline std::uint64_t to_field(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) {
    throw std::invalid_argument("integer rank requested for a matrix with non-integer entry " +
                                std::to_string(v));
  }
  long long iv = static_cast<long long>(r) % static_cast<long long>(kPrime);
  if (iv < 0) iv += static_cast<long long>(kPrime);
  return static_cast<std::uint64_t>(iv);
}

using FieldRow = std::vector<std::pair<Index, std::uint64_t>>;

// row <- row - f * pivot, both sorted by column; the leading entries cancel.
inline FieldRow eliminate(const FieldRow& row, const FieldRow& pivot, std::uint64_t f) {
  FieldRow out;
  out.reserve(row.size() + pivot.size());
  std::size_t i = 0, j = 0;
  while (i < row.size() || j < pivot.size()) {
    if (j == pivot.size() || (i < row.size() && row[i].first < pivot[j].first)) {
      out.push_back(row[i++]);
    } else if (i == row.size() || pivot[j].first < row[i].first) {
      out.emplace_back(pivot[j].first, (kPrime - mod_mul(f, pivot[j].second)) % kPrime);
      ++j;
    } else {
      const std::uint64_t v = (row[i].second + kPrime - mod_mul(f, pivot[j].second)) % kPrime;
      if (v != 0) out.emplace_back(row[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace detail

/// Indices of a maximal linearly independent set of rows of an integer
/// matrix, found by Gaussian elimination over GF(2^31-1). Rows are scanned
/// in order, so the result is the lexicographically first basis.
inline IndexList independent_rows(const SpMat& a) {
  RowSpMat rows = a;
  rows.makeCompressed();
  std::vector<detail::FieldRow> pivots(static_cast<std::size_t>(a.cols()));
  IndexList chosen;
  for (Index r = 0; r < rows.rows(); ++r) {
    detail::FieldRow row;
    for (RowSpMat::InnerIterator it(rows, r); it; ++it) {
      const std::uint64_t v = detail::to_field(it.value());
      if (v != 0) row.emplace_back(it.col(), v);
    }
    while (!row.empty()) {
      auto& piv = pivots[static_cast<std::size_t>(row.front().first)];
      if (piv.empty()) {
        const std::uint64_t inv = detail::mod_inv(row.front().second);
        for (auto& e : row) e.second = detail::mod_mul(e.second, inv);
        piv = std::move(row);
        chosen.push_back(r);
        break;
      }
      row = detail::eliminate(row, piv, row.front().second);
    }
  }
  return chosen;
}

inline IndexList independent_cols(const SpMat& a) { return independent_rows(SpMat(a.transpose())); }

/// Rank over the rationals (exact for torsion-free incidence data).
inline Index integer_rank(const SpMat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return static_cast<Index>(independent_rows(a).size());
}

/// Submatrix A[rows, cols]; an empty index list paired with `all` keeps everything.
inline SpMat select(const SpMat& a, const IndexList& rows, const IndexList& cols) {
  std::vector<Index> rmap(static_cast<std::size_t>(a.rows()), -1);
  std::vector<Index> cmap(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) cmap[static_cast<std::size_t>(cols[j])] = static_cast<Index>(j);
  std::vector<Triplet> t;
  for (Index c = 0; c < a.outerSize(); ++c) {
    const Index jc = cmap[static_cast<std::size_t>(c)];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(a, c); it; ++it) {
      const Index ir = rmap[static_cast<std::size_t>(it.row())];
      if (ir >= 0) t.emplace_back(ir, jc, it.value());
    }
  }
  SpMat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline IndexList iota(Index n) {
  IndexList v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

inline Vec gather(const Vec& v, const IndexList& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

inline Vec scatter(const Vec& v, const IndexList& idx, Index n) {
  Vec out = Vec::Zero(n);
  for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = v(static_cast<Index>(i));
  return out;
}

inline double m_norm(const SpMat& m, const Vec& x) { return std::sqrt(std::max(0.0, x.dot(m * x))); }

/// Cholesky-type solver for a symmetric positive definite sparse matrix.
/// An empty matrix is allowed and solves to the empty vector.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const SpMat& a) : n_(a.rows()) {
    if (n_ == 0) return;
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(a);
    if (ldlt_->info() != Eigen::Success) throw SolverError("LDLT factorization failed");
    const Vec d = ldlt_->vectorD();
    if (d.minCoeff() <= 0.0) {
      std::ostringstream os;
      os << "matrix is not positive definite (min pivot " << d.minCoeff() << ")";
      throw SolverError(os.str());
    }
  }
  Index size() const { return n_; }
  Vec solve(const Vec& b) const {
    if (n_ == 0) return Vec();
    Vec x = ldlt_->solve(b);
    return x;
  }

 private:
  Index n_ = 0;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

/// Equality-constrained least-norm solver
///
///   minimize   1/2 x'Mx + g'x
///   subject to B x = b   (integer B, possibly rank deficient)
///              C x = c   (a few dense rows, assumed independent of B)
///
/// Redundant rows of B are dropped via exact rank elimination so the KKT
/// matrix is nonsingular; the residual over all rows is reported by
/// `constraint_residual` and is how infeasible data is detected.
class SaddlePointSolver {
 public:
  SaddlePointSolver() = default;
  SaddlePointSolver(const SpMat& m, const SpMat& b, const Mat& c = Mat())
      : n_(m.rows()), b_(b), c_(c) {
    if (b_.cols() != n_ && b_.rows() > 0) throw std::invalid_argument("constraint width mismatch");
    if (c_.size() > 0 && c_.cols() != n_) throw std::invalid_argument("moment width mismatch");
    rows_ = (b_.rows() > 0 && n_ > 0) ? independent_rows(b_) : IndexList{};
    const Index nb = static_cast<Index>(rows_.size());
    const Index nc = c_.size() > 0 ? c_.rows() : 0;
    dim_ = n_ + nb + nc;
    if (dim_ == 0) return;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(m.nonZeros() + 2 * b_.nonZeros() + 2 * nc * n_));
    for (Index col = 0; col < m.outerSize(); ++col)
      for (SpMat::InnerIterator it(m, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    const SpMat br = select(b_, rows_, iota(n_));
    for (Index col = 0; col < br.outerSize(); ++col)
      for (SpMat::InnerIterator it(br, col); it; ++it) {
        t.emplace_back(n_ + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), n_ + it.row(), it.value());
      }
    for (Index i = 0; i < nc; ++i)
      for (Index j = 0; j < n_; ++j) {
        const double v = c_(i, j);
        if (v == 0.0) continue;
        t.emplace_back(n_ + nb + i, j, v);
        t.emplace_back(j, n_ + nb + i, v);
      }
    kkt_ = std::make_shared<SpMat>(dim_, dim_);
    kkt_->setFromTriplets(t.begin(), t.end());
    kkt_->makeCompressed();
    lu_ = std::make_shared<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    lu_->analyzePattern(*kkt_);
    lu_->factorize(*kkt_);
    if (lu_->info() != Eigen::Success) throw SolverError("saddle-point factorization failed: " + lu_->lastErrorMessage());
  }

  Index size() const { return n_; }
  const IndexList& active_rows() const { return rows_; }
  const SpMat& constraint() const { return b_; }

  /// Returns the primal minimizer; b and c may be empty when there are no such rows.
  Vec solve(const Vec& g, const Vec& b, const Vec& c = Vec()) const {
    if (n_ == 0) return Vec();
    const Index nb = static_cast<Index>(rows_.size());
    const Index nc = c_.size() > 0 ? c_.rows() : 0;
    Vec rhs(dim_);
    rhs.head(n_) = g.size() ? Vec(-g) : Vec(Vec::Zero(n_));
    for (Index i = 0; i < nb; ++i) rhs(n_ + i) = b(rows_[static_cast<std::size_t>(i)]);
    if (nc) rhs.tail(nc) = c;
    Vec sol = lu_->solve(rhs);
    // One step of iterative refinement keeps the constraint residual near machine precision.
    const Vec r = rhs - (*kkt_) * sol;
    sol += lu_->solve(r);
    return sol.head(n_);
  }

  /// Max-norm residual over every row of B (including the dropped ones) and C.
  double constraint_residual(const Vec& x, const Vec& b, const Vec& c = Vec()) const {
    double r = 0.0;
    if (b_.rows() > 0 && n_ > 0) r = std::max(r, (b_ * x - b).cwiseAbs().maxCoeff());
    else if (b.size() > 0) r = std::max(r, b.cwiseAbs().maxCoeff());
    if (c_.size() > 0) r = std::max(r, (c_ * x - c).cwiseAbs().maxCoeff());
    return r;
  }

 private:
  Index n_ = 0;
  Index dim_ = 0;
  SpMat b_;
  Mat c_;
  IndexList rows_;
  std::shared_ptr<SpMat> kkt_;
  std::shared_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
};

struct LanczosResult {
  double theta = 0.0;    // largest Ritz value
  Vec vector;            // M-normalized Ritz vector
  int iterations = 0;
  double residual = 0.0;  // |beta_m s_m| / theta
};

/// Largest eigenvalue of an operator that is self-adjoint and positive in
/// the inner product <x,y> = x'My, by Lanczos with full reorthogonalization.
/// `start` must lie in the invariant subspace of interest.
inline LanczosResult lanczos_largest(const std::function<Vec(const Vec&)>& op, const SpMat& m, Vec start,
                                     int max_iter = 300, double tol = 1e-13) {
  LanczosResult res;
  const Index n = start.size();
  if (n == 0) return res;
  double nrm = m_norm(m, start);
  if (nrm == 0.0) throw SolverError("Lanczos start vector vanishes");
  std::vector<Vec> basis;
  std::vector<Vec> mbasis;
  std::vector<double> alpha, beta;
  Vec q = start / nrm;
  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(q);
    mbasis.push_back(m * q);
    Vec w = op(q);
    const double a = mbasis.back().dot(w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < basis.size(); ++j) w -= mbasis[j].dot(w) * basis[j];
    const double b = m_norm(m, w);
    const int msize = static_cast<int>(alpha.size());
    const bool check = (msize % 5 == 0) || b <= 1e-14 * std::abs(a) || it + 1 == max_iter ||
                       msize == static_cast<int>(n);
    if (check) {
      Mat t = Mat::Zero(msize, msize);
      for (int i = 0; i < msize; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < msize) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(t);
      const double theta = es.eigenvalues()(msize - 1);
      const Vec s = es.eigenvectors().col(msize - 1);
      const double resid = std::abs(b * s(msize - 1)) / std::max(std::abs(theta), 1e-300);
      if (resid <= tol || b <= 1e-14 * std::abs(a) || it + 1 == max_iter || msize == static_cast<int>(n)) {
        res.theta = theta;
        res.iterations = msize;
        res.residual = resid;
        res.vector = Vec::Zero(n);
        for (int i = 0; i < msize; ++i) res.vector += s(i) * basis[static_cast<std::size_t>(i)];
        res.vector /= m_norm(m, res.vector);
        return res;
      }
    }
    beta.push_back(b);
    q = w / b;
  }
  return res;
}

/// Normal random vector from a seeded engine.
inline Vec random_normal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace cext
