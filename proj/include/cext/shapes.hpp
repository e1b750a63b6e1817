// Implicit domain descriptions: level sets that are negative inside, with an
// exact simplex classification for the radial primitives and a lattice
// sampling fallback for everything else.
#pragma once

#include "linalg.hpp"

#include <json.hpp>

#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace cext {

enum class Relation { Inside, Outside, Cut };

/// Euclidean distance from a point to a simplex given by its vertex rows.
inline double point_simplex_distance(const Vec& p, const Mat& s) {
  const Index m = s.rows();
  if (m == 1) return (p - s.row(0).transpose()).norm();
  Mat e(s.cols(), m - 1);
  for (Index i = 1; i < m; ++i) e.col(i - 1) = (s.row(i) - s.row(0)).transpose();
  const Vec t = (e.transpose() * e).ldlt().solve(e.transpose() * (p - s.row(0).transpose()));
  const double t0 = 1.0 - t.sum();
  if (t0 >= -1e-14 && (t.size() == 0 || t.minCoeff() >= -1e-14)) {
    return (p - s.row(0).transpose() - e * t).norm();
  }
  double best = std::numeric_limits<double>::infinity();
  for (Index drop = 0; drop < m; ++drop) {
    Mat f(m - 1, s.cols());
    for (Index i = 0, r = 0; i < m; ++i)
      if (i != drop) f.row(r++) = s.row(i);
    best = std::min(best, point_simplex_distance(p, f));
  }
  return best;
}

/// Barycentric lattice points with the given denominator (inclusive of vertices).
inline std::vector<Vec> lattice_points(const Mat& s, int denom) {
  const int nv = static_cast<int>(s.rows());
  std::vector<Vec> pts;
  std::vector<int> c(static_cast<std::size_t>(nv), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == nv - 1) {
      c[static_cast<std::size_t>(i)] = left;
      Vec x = Vec::Zero(s.cols());
      for (int j = 0; j < nv; ++j) x += (double(c[static_cast<std::size_t>(j)]) / denom) * s.row(j).transpose();
      pts.push_back(x);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[static_cast<std::size_t>(i)] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, denom);
  return pts;
}

class Shape {
 public:
  virtual ~Shape() = default;
  /// Level-set value; negative inside.
  virtual double level(const Vec& x) const = 0;
  virtual Relation classify(const Mat& simplex) const { return sample_classify(simplex); }
  /// Smallest geometric feature (radius, shell width); used for resolution diagnostics.
  virtual double feature_size() const { return std::numeric_limits<double>::infinity(); }
  virtual nlohmann::json to_json() const = 0;

  bool contains(const Vec& x) const { return level(x) < 0.0; }

  Relation sample_classify(const Mat& simplex) const {
    bool in = false, out = false;
    for (const Vec& x : lattice_points(simplex, 8)) {
      (level(x) < 0.0 ? in : out) = true;
      if (in && out) return Relation::Cut;
    }
    return in ? Relation::Inside : Relation::Outside;
  }
};

using ShapePtr = std::shared_ptr<const Shape>;

namespace detail {
inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}
inline std::pair<double, double> radial_range(const Vec& c, const Mat& s) {
  double dmax = 0.0;
  for (Index i = 0; i < s.rows(); ++i) dmax = std::max(dmax, (s.row(i).transpose() - c).norm());
  return {point_simplex_distance(c, s), dmax};
}
}  // namespace detail

/// Open ball (disk in 2D).
class Ball final : public Shape {
 public:
  Ball(Vec center, double radius) : c_(std::move(center)), r_(radius) {
    if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
  }
  double level(const Vec& x) const override { return (x - c_).norm() - r_; }
  Relation classify(const Mat& s) const override {
    const auto [dmin, dmax] = detail::radial_range(c_, s);
    if (dmax < r_) return Relation::Inside;
    if (dmin >= r_) return Relation::Outside;
    return Relation::Cut;
  }
  double feature_size() const override { return 2 * r_; }
  nlohmann::json to_json() const override {
    return {{"type", "ball"}, {"center", detail::vec_json(c_)}, {"radius", r_}};
  }
  const Vec& center() const { return c_; }
  double radius() const { return r_; }

 private:
  Vec c_;
  double r_;
};

/// Spherical shell r_in < |x - c| < r_out (annulus in 2D).
class Shell final : public Shape {
 public:
  Shell(Vec center, double inner, double outer) : c_(std::move(center)), ri_(inner), ro_(outer) {
    if (!(inner > 0 && outer > inner)) throw std::invalid_argument("shell radii must satisfy 0 < inner < outer");
  }
  double level(const Vec& x) const override {
    const double d = (x - c_).norm();
    return std::max(ri_ - d, d - ro_);
  }
  Relation classify(const Mat& s) const override {
    const auto [dmin, dmax] = detail::radial_range(c_, s);
    if (dmin > ri_ && dmax < ro_) return Relation::Inside;
    if (dmax <= ri_ || dmin >= ro_) return Relation::Outside;
    return Relation::Cut;
  }
  double feature_size() const override { return std::min(ro_ - ri_, 2 * ri_); }
  nlohmann::json to_json() const override {
    return {{"type", "shell"}, {"center", detail::vec_json(c_)}, {"inner", ri_}, {"outer", ro_}};
  }

 private:
  Vec c_;
  double ri_, ro_;
};

/// Open axis-aligned box.
class BoxShape final : public Shape {
 public:
  BoxShape(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}
  double level(const Vec& x) const override {
    double v = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < x.size(); ++i) v = std::max({v, lo_(i) - x(i), x(i) - hi_(i)});
    return v;
  }
  Relation classify(const Mat& s) const override {
    bool all_in = true;
    for (Index r = 0; r < s.rows(); ++r) all_in = all_in && level(s.row(r).transpose()) < 0;
    if (all_in) return Relation::Inside;
    for (Index a = 0; a < s.cols(); ++a) {
      if (s.col(a).maxCoeff() <= lo_(a) || s.col(a).minCoeff() >= hi_(a)) return Relation::Outside;
    }
    return sample_classify(s);
  }
  double feature_size() const override { return (hi_ - lo_).minCoeff(); }
  nlohmann::json to_json() const override {
    return {{"type", "box"}, {"lo", detail::vec_json(lo_)}, {"hi", detail::vec_json(hi_)}};
  }

 private:
  Vec lo_, hi_;
};

/// The whole space.
class Everything final : public Shape {
 public:
  double level(const Vec&) const override { return -1.0; }
  Relation classify(const Mat&) const override { return Relation::Inside; }
  nlohmann::json to_json() const override { return {{"type", "all"}}; }
};

class Union final : public Shape {
 public:
  explicit Union(std::vector<ShapePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("union of no shapes");
  }
  double level(const Vec& x) const override {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) v = std::min(v, p->level(x));
    return v;
  }
  Relation classify(const Mat& s) const override {
    bool all_out = true;
    for (const auto& p : parts_) {
      const Relation r = p->classify(s);
      if (r == Relation::Inside) return Relation::Inside;
      all_out = all_out && r == Relation::Outside;
    }
    return all_out ? Relation::Outside : sample_classify(s);
  }
  double feature_size() const override {
    double f = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) f = std::min(f, p->feature_size());
    return f;
  }
  nlohmann::json to_json() const override {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : parts_) a.push_back(p->to_json());
    return {{"type", "union"}, {"parts", a}};
  }

 private:
  std::vector<ShapePtr> parts_;
};

class Intersection final : public Shape {
 public:
  explicit Intersection(std::vector<ShapePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("intersection of no shapes");
  }
  double level(const Vec& x) const override {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) v = std::max(v, p->level(x));
    return v;
  }
  Relation classify(const Mat& s) const override {
    bool all_in = true;
    for (const auto& p : parts_) {
      const Relation r = p->classify(s);
      if (r == Relation::Outside) return Relation::Outside;
      all_in = all_in && r == Relation::Inside;
    }
    return all_in ? Relation::Inside : sample_classify(s);
  }
  double feature_size() const override {
    double f = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) f = std::min(f, p->feature_size());
    return f;
  }
  nlohmann::json to_json() const override {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : parts_) a.push_back(p->to_json());
    return {{"type", "intersection"}, {"parts", a}};
  }

 private:
  std::vector<ShapePtr> parts_;
};

/// base minus the closure of `minus`.
class Difference final : public Shape {
 public:
  Difference(ShapePtr base, ShapePtr minus) : base_(std::move(base)), minus_(std::move(minus)) {}
  double level(const Vec& x) const override { return std::max(base_->level(x), -minus_->level(x)); }
  Relation classify(const Mat& s) const override {
    const Relation a = base_->classify(s);
    const Relation b = minus_->classify(s);
    if (a == Relation::Outside || b == Relation::Inside) return Relation::Outside;
    if (a == Relation::Inside && b == Relation::Outside) return Relation::Inside;
    return sample_classify(s);
  }
  double feature_size() const override { return std::min(base_->feature_size(), minus_->feature_size()); }
  nlohmann::json to_json() const override {
    return {{"type", "difference"}, {"base", base_->to_json()}, {"minus", minus_->to_json()}};
  }

 private:
  ShapePtr base_, minus_;
};

namespace detail {
inline Vec json_vec(const nlohmann::json& j) {
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}
}  // namespace detail

inline ShapePtr shape_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw std::invalid_argument("shape must be an object with a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball" || type == "disk" || type == "circle")
    return std::make_shared<Ball>(detail::json_vec(j.at("center")), j.at("radius").get<double>());
  if (type == "shell" || type == "annulus")
    return std::make_shared<Shell>(detail::json_vec(j.at("center")), j.at("inner").get<double>(),
                                   j.at("outer").get<double>());
  if (type == "box") return std::make_shared<BoxShape>(detail::json_vec(j.at("lo")), detail::json_vec(j.at("hi")));
  if (type == "all") return std::make_shared<Everything>();
  if (type == "union" || type == "intersection") {
    std::vector<ShapePtr> parts;
    for (const auto& p : j.at("parts")) parts.push_back(shape_from_json(p));
    if (type == "union") return std::make_shared<Union>(std::move(parts));
    return std::make_shared<Intersection>(std::move(parts));
  }
  if (type == "difference")
    return std::make_shared<Difference>(shape_from_json(j.at("base")), shape_from_json(j.at("minus")));
  throw std::invalid_argument("unknown shape type '" + type + "'");
}

/// Compact command-line form: "circle:cx,cy,r" or "annulus:cx,cy,r_in,r_out"
/// (any dimension: the trailing one or two numbers are radii).
inline ShapePtr shape_from_string(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("level set must look like kind:v1,v2,...");
  const std::string kind = text.substr(0, colon);
  std::vector<double> v;
  std::stringstream ss(text.substr(colon + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  auto center = [&](std::size_t radii) {
    if (v.size() <= radii) throw std::invalid_argument("level set '" + text + "' has too few values");
    Vec c(static_cast<Index>(v.size() - radii));
    for (Index i = 0; i < c.size(); ++i) c(i) = v[static_cast<std::size_t>(i)];
    return c;
  };
  if (kind == "circle" || kind == "disk" || kind == "ball") return std::make_shared<Ball>(center(1), v.back());
  if (kind == "annulus" || kind == "shell")
    return std::make_shared<Shell>(center(2), v[v.size() - 2], v.back());
  throw std::invalid_argument("unknown level set kind '" + kind + "'");
}

}  // namespace cext
