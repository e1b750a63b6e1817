// Mesh JSON interchange, cochain CSV dumps with an integrity header, and
// harmonic-basis export.
#pragma once

#include "hodge.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cext {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// FNV-1a 64 over dimension, vertex coordinates (bit patterns) and simplices.
inline std::string complex_hash(const OrientedComplex& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dim = c.dim();
  mix(&dim, sizeof dim);
  for (Index v = 0; v < c.vertices().rows(); ++v)
    for (Index a = 0; a < c.dim(); ++a) {
      const double x = c.vertices()(v, a) == 0.0 ? 0.0 : c.vertices()(v, a);  // fold -0
      mix(&x, sizeof x);
    }
  for (int k = 0; k <= c.dim(); ++k) {
    const std::int64_t count = c.count(k);
    mix(&count, sizeof count);
    for (const Simplex& s : c.simplices(k))
      for (int j = 0; j <= k; ++j) {
        const std::int32_t v = s[static_cast<std::size_t>(j)];
        mix(&v, sizeof v);
      }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json mesh_to_json(const OrientedComplex& c) {
  nlohmann::json j;
  j["dim"] = c.dim();
  nlohmann::json verts = nlohmann::json::array();
  for (Index v = 0; v < c.vertices().rows(); ++v) {
    nlohmann::json row = nlohmann::json::array();
    for (Index a = 0; a < c.dim(); ++a) row.push_back(c.vertices()(v, a));
    verts.push_back(row);
  }
  j["vertices"] = verts;
  nlohmann::json simp = nlohmann::json::object();
  for (int k = 0; k <= c.dim(); ++k) {
    nlohmann::json list = nlohmann::json::array();
    for (const Simplex& s : c.simplices(k)) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i <= k; ++i) row.push_back(s[static_cast<std::size_t>(i)]);
      list.push_back(row);
    }
    simp[std::to_string(k)] = list;
  }
  j["simplices"] = simp;
  nlohmann::json tags = nlohmann::json::object();
  for (const auto& [name, lists] : c.labels()) {
    if (name == kBoundaryLabel) continue;  // recomputed on load
    nlohmann::json t = nlohmann::json::object();
    for (int k = 0; k <= c.dim(); ++k) t[std::to_string(k)] = lists[static_cast<std::size_t>(k)];
    tags[name] = t;
  }
  j["tags"] = tags;
  return j;
}

/// Validates sortedness, uniqueness, closure of the simplices and closure of
/// every tag; the boundary label is always recomputed.
inline ComplexPtr mesh_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const auto& jv = j.at("vertices");
    if (!jv.is_array()) throw FormatError("mesh.vertices must be an array");
    Mat verts(static_cast<Index>(jv.size()), dim);
    for (std::size_t v = 0; v < jv.size(); ++v) {
      if (!jv[v].is_array() || static_cast<int>(jv[v].size()) != dim)
        throw FormatError("vertex " + std::to_string(v) + " does not have " + std::to_string(dim) + " coordinates");
      for (int a = 0; a < dim; ++a) verts(static_cast<Index>(v), a) = jv[v][static_cast<std::size_t>(a)].get<double>();
    }
    std::vector<std::vector<Simplex>> lists(static_cast<std::size_t>(dim + 1));
    const auto& js = j.at("simplices");
    for (int k = 0; k <= dim; ++k) {
      const auto& l = js.at(std::to_string(k));
      for (const auto& row : l) {
        if (!row.is_array() || static_cast<int>(row.size()) != k + 1)
          throw FormatError(std::to_string(k) + "-simplex entries need " + std::to_string(k + 1) + " vertices");
        Simplex s{-1, -1, -1, -1};
        for (int i = 0; i <= k; ++i) s[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(i)].get<int>();
        lists[static_cast<std::size_t>(k)].push_back(s);
      }
    }
    auto c = std::make_shared<OrientedComplex>(OrientedComplex::from_simplices(dim, std::move(verts), std::move(lists)));
    if (j.contains("tags")) {
      for (const auto& [name, t] : j.at("tags").items()) {
        if (name == kBoundaryLabel) continue;
        std::vector<IndexList> per(static_cast<std::size_t>(dim + 1));
        for (int k = 0; k <= dim; ++k) {
          if (!t.contains(std::to_string(k))) continue;
          for (const auto& i : t.at(std::to_string(k))) {
            const Index idx = i.get<Index>();
            if (idx < 0 || idx >= c->count(k))
              throw FormatError("tag '" + name + "' references missing " + std::to_string(k) + "-simplex " + std::to_string(idx));
            per[static_cast<std::size_t>(k)].push_back(idx);
          }
          std::sort(per[static_cast<std::size_t>(k)].begin(), per[static_cast<std::size_t>(k)].end());
        }
        if (c->closure(per) != per) throw FormatError("tag '" + name + "' is not a closed subcomplex");
        c->set_label(name, per);
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed mesh document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid mesh: ") + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline void save_mesh(const std::filesystem::path& path, const OrientedComplex& c) { write_text(path, mesh_to_json(c).dump(1) + "\n"); }

inline ComplexPtr load_mesh(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return mesh_from_json(j);
}

/// `# {"complex_hash":...,"degree":k}` then `simplex_index,value` rows.
inline std::string cochain_to_csv(const Cochain& a) {
  if (a.is_zero_object()) throw std::invalid_argument("cannot dump a degree " + std::to_string(a.degree) + " zero object");
  std::string out = "# " + nlohmann::json{{"degree", a.degree}, {"complex_hash", complex_hash(*a.complex)}}.dump() + "\n";
  out += "simplex_index,value\n";
  for (Index i = 0; i < a.values.size(); ++i) out += std::to_string(i) + "," + format_double(a.values(i)) + "\n";
  return out;
}

/// Parses a cochain dump for `c`; the hash, degree and index set must match.
inline Cochain cochain_from_csv(const std::string& text, const ComplexPtr& c, std::optional<int> expected_degree = {}) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("cochain CSV must start with a '# {json}' header");
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bad cochain header: ") + e.what());
  }
  if (!head.contains("degree") || !head.contains("complex_hash")) throw FormatError("cochain header needs degree and complex_hash");
  const int k = head.at("degree").get<int>();
  if (expected_degree && *expected_degree != k)
    throw FormatError("cochain has degree " + std::to_string(k) + ", expected " + std::to_string(*expected_degree));
  if (k < 0 || k > c->dim()) throw FormatError("cochain degree " + std::to_string(k) + " out of range");
  const std::string hash = complex_hash(*c);
  if (head.at("complex_hash").get<std::string>() != hash)
    throw FormatError("cochain was written for complex " + head.at("complex_hash").get<std::string>() + ", not " + hash);
  if (!std::getline(in, line) || line.rfind("simplex_index,value", 0) != 0) throw FormatError("missing 'simplex_index,value' column header");
  Vec v = Vec::Zero(c->count(k));
  std::vector<char> seen(static_cast<std::size_t>(c->count(k)), 0);
  int row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("row " + std::to_string(row) + ": expected index,value");
    Index i;
    double x;
    try {
      std::size_t used = 0;
      i = std::stoll(line.substr(0, comma), &used);
      x = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw FormatError("row " + std::to_string(row) + ": not a number");
    }
    if (i < 0 || i >= c->count(k)) throw FormatError("row " + std::to_string(row) + ": simplex index " + std::to_string(i) + " out of range");
    if (seen[static_cast<std::size_t>(i)]) throw FormatError("row " + std::to_string(row) + ": duplicate simplex index " + std::to_string(i));
    seen[static_cast<std::size_t>(i)] = 1;
    v(i) = x;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw FormatError("simplex index " + std::to_string(i) + " is missing");
  return Cochain(k, c, v);
}

inline void save_cochain(const std::filesystem::path& path, const Cochain& a) { write_text(path, cochain_to_csv(a)); }

inline Cochain load_cochain(const std::filesystem::path& path, const ComplexPtr& c, std::optional<int> expected_degree = {}) {
  return cochain_from_csv(read_text(path), c, expected_degree);
}

/// One CSV per basis element (`<stem>_<i>.csv`) plus `<stem>.json`.
inline nlohmann::json export_harmonic_basis(const std::filesystem::path& dir, const std::string& stem, const HarmonicBasis& hb) {
  nlohmann::json side{{"variant", to_string(hb.bc.variant)},
                      {"label", hb.bc.label},
                      {"degree", hb.degree},
                      {"dim", hb.dim()},
                      {"orthonormality_residual", hb.orthonormality_residual},
                      {"complex_hash", complex_hash(*hb.complex)}};
  nlohmann::json files = nlohmann::json::array();
  for (Index i = 0; i < hb.dim(); ++i) {
    const std::string name = stem + "_" + std::to_string(i) + ".csv";
    save_cochain(dir / name, hb.element(i));
    files.push_back(name);
  }
  side["files"] = files;
  write_text(dir / (stem + ".json"), side.dump(1) + "\n");
  return side;
}

}  // namespace cext
