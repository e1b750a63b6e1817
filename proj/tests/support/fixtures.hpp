// Shared test geometries.
#pragma once

#include <cext/mesh.hpp>

namespace fixtures {

using namespace cext;

inline ComplexPtr square(double h) { return build_box_complex(unit_box(2), h, 2); }

inline Vec center() { return Vec::Constant(2, 0.5); }

inline ShapePtr disk(double r = 0.3) { return std::make_shared<Ball>(center(), r); }
inline ShapePtr annulus(double ri = 0.15, double ro = 0.4) { return std::make_shared<Shell>(center(), ri, ro); }

inline std::vector<char> complement(std::vector<char> keep) {
  for (auto& k : keep) k = !k;
  return keep;
}

/// Omega and A = K minus Omega as extracted subcomplexes of the square.
struct Pair {
  ComplexPtr k;
  SubcomplexMap omega, exterior;
};

inline Pair split(double h, const ShapePtr& shape) {
  Pair p;
  p.k = square(h);
  const auto keep = barycenter_selection(*p.k, *shape);
  p.omega = extract_subcomplex(p.k, keep);
  p.exterior = extract_subcomplex(p.k, complement(keep));
  return p;
}

}  // namespace fixtures
