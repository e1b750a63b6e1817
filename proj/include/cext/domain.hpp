// Description of an (Omega, K) pair over a box background and its JSON form.
#pragma once

#include "mesh.hpp"

namespace cext {

enum class ExtensionVariant { ZeroTrace, Mixed };

inline std::string to_string(ExtensionVariant v) { return v == ExtensionVariant::ZeroTrace ? "zero-trace" : "mixed"; }

inline ExtensionVariant variant_from_string(const std::string& s) {
  if (s == "zero-trace" || s == "zero_trace" || s == "zero-trace-on-dK") return ExtensionVariant::ZeroTrace;
  if (s == "mixed") return ExtensionVariant::Mixed;
  throw std::invalid_argument("unknown extension variant '" + s + "' (expected zero-trace or mixed)");
}

/// K is the box mesh, optionally cut down to the elements whose barycenter
/// lies in `ambient`; Omega is the set of K elements whose barycenter lies
/// in `omega`.
struct DomainSpec {
  int dim = 2;
  Box box = unit_box(2);
  double h = 0.125;
  ShapePtr omega;
  ShapePtr ambient;  // null: K is the whole box
  ExtensionVariant variant = ExtensionVariant::Mixed;

  static DomainSpec from_json(const nlohmann::json& j) {
    DomainSpec s;
    s.dim = j.value("dim", 2);
    if (j.contains("box")) {
      const auto& b = j.at("box");
      if (!b.is_array() || static_cast<int>(b.size()) != s.dim) throw std::invalid_argument("domain.box must list [lo, hi] per axis");
      s.box = Box{Vec(s.dim), Vec(s.dim)};
      for (int a = 0; a < s.dim; ++a) {
        s.box.lo(a) = b.at(static_cast<std::size_t>(a)).at(0).get<double>();
        s.box.hi(a) = b.at(static_cast<std::size_t>(a)).at(1).get<double>();
      }
    } else {
      s.box = unit_box(s.dim);
    }
    s.h = j.value("h", 0.125);
    if (!j.contains("omega")) throw std::invalid_argument("domain.omega is required");
    s.omega = shape_from_json(j.at("omega"));
    if (j.contains("ambient") && !j.at("ambient").is_null()) s.ambient = shape_from_json(j.at("ambient"));
    if (j.contains("variant")) s.variant = variant_from_string(j.at("variant").get<std::string>());
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json b = nlohmann::json::array();
    for (int a = 0; a < dim; ++a) b.push_back({box.lo(a), box.hi(a)});
    nlohmann::json j{{"dim", dim}, {"box", b}, {"h", h}, {"omega", omega->to_json()}, {"variant", to_string(variant)}};
    if (ambient) j["ambient"] = ambient->to_json();
    return j;
  }

  ComplexPtr build_k() const {
    ComplexPtr bg = build_box_complex(box, h, dim);
    if (!ambient) return bg;
    return extract_subcomplex(bg, *ambient).child;
  }

  std::vector<char> omega_selection(const OrientedComplex& k) const { return barycenter_selection(k, *omega); }
};

}  // namespace cext
