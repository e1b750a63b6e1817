// Config-driven experiment runner. A JSON config names a kind (mesh, extend,
// verify, poincare, eigen-scan, uniform-scan, cutfem-scan), is validated up
// front, and produces a RunReport with tables, claim-tagged assertions and
// plots that write_artifacts() turns into CSV / JSON / SVG files.
#pragma once

#include "cutfem.hpp"
#include "io.hpp"
#include "svg.hpp"

#include <atomic>
#include <concepts>
#include <deque>
#include <set>
#include <thread>
#include <variant>

namespace cext {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Assertion {
  std::string name;
  std::string claim;  // the statement being checked
  double value = 0.0;
  double bound = 0.0;
  std::string relation = "<=";
  bool pass = false;
  bool informational = false;  // reported, never fails the run
};

inline Assertion assert_le(std::string name, std::string claim, double value, double bound) {
  return {std::move(name), std::move(claim), value, bound, "<=", value <= bound, false};
}
inline Assertion assert_ge(std::string name, std::string claim, double value, double bound) {
  return {std::move(name), std::move(claim), value, bound, ">=", value >= bound, false};
}
inline Assertion assert_lt(std::string name, std::string claim, double value, double bound) {
  return {std::move(name), std::move(claim), value, bound, "<", value < bound, false};
}
inline Assertion assert_eq(std::string name, std::string claim, double value, double bound) {
  return {std::move(name), std::move(claim), value, bound, "==", value == bound, false};
}
inline Assertion assert_gt(std::string name, std::string claim, double value, double bound) {
  return {std::move(name), std::move(claim), value, bound, ">", value > bound, false};
}
inline Assertion informational(Assertion a) {
  a.informational = true;
  return a;
}

namespace detail {
inline std::string to_cell(double v) { return format_double(v); }
inline std::string to_cell(bool v) { return v ? "1" : "0"; }
template <class T>
  requires std::integral<T>
inline std::string to_cell(T v) {
  return std::to_string(v);
}
inline std::string to_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}
inline std::string to_cell(const char* s) { return to_cell(std::string(s)); }
}  // namespace detail

/// Rows are emitted in insertion order; runners insert them in case-key order.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... T>
  void add(const T&... v) {
    rows.push_back({detail::to_cell(v)...});
    if (rows.back().size() != columns.size()) throw std::logic_error("table '" + name + "': row width does not match the header");
  }
  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

struct CaseTiming {
  std::string key;
  double seconds = 0.0;
};

struct RunReport {
  std::string kind;
  std::string mode;
  nlohmann::json config;
  std::deque<Table> tables;  // deque: references from table() stay valid
  std::vector<Assertion> assertions;
  std::vector<svg::Plot> plots;
  std::vector<CaseTiming> timings;
  std::vector<std::string> notes;
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, std::string> files;  // extra artifacts (name -> content)
  double seconds = 0.0;

  bool pass() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.informational || a.pass; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(assertions.begin(), assertions.end(), [](const Assertion& a) { return !a.informational && !a.pass; }));
  }
  Table& table(const std::string& name, std::vector<std::string> columns) {
    tables.push_back(Table{name, std::move(columns), {}});
    return tables.back();
  }
  void add(Assertion a) { assertions.push_back(std::move(a)); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    if (!mode.empty()) j["mode"] = mode;
    j["config"] = config;
    j["pass"] = pass();
    nlohmann::json as = nlohmann::json::array();
    for (const auto& a : assertions)
      as.push_back({{"name", a.name},
                    {"claim", a.claim},
                    {"value", a.value},
                    {"relation", a.relation},
                    {"bound", a.bound},
                    {"pass", a.pass},
                    {"informational", a.informational}});
    j["assertions"] = as;
    j["summary"] = summary;
    nlohmann::json t = nlohmann::json::array();
    for (const auto& c : timings) t.push_back({{"case", c.key}, {"seconds", c.seconds}});
    j["timings"] = t;
    j["seconds"] = seconds;
    j["notes"] = notes;
    nlohmann::json files_j = nlohmann::json::array();
    for (const auto& tb : tables) files_j.push_back(tb.name + ".csv");
    for (const auto& p : plots) files_j.push_back(p.file);
    for (const auto& [name, text] : files) files_j.push_back(name);
    j["files"] = files_j;
    return j;
  }
};

struct ExperimentConfig {
  std::string kind;
  std::string mode;
  nlohmann::json doc;  // the document as given, with CLI overrides applied
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path base_dir;  // relative input paths resolve against this
  std::filesystem::path output;

  static ExperimentConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
};

namespace experiment {

inline const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"mesh", "extend", "verify", "poincare", "eigen-scan", "uniform-scan", "cutfem-scan"};
  return k;
}

/// Key-tracking view of a JSON object; unknown keys are rejected by finish().
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  const std::string& path() const { return path_; }
  std::string where(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) used_.insert(k);
  }

  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(where(key) + " is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const nlohmann::json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + ": wrong type (" + std::string(v.type_name()) + ")");
    }
  }
  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    return has(key) ? get<T>(key) : fallback;
  }

  double positive(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key)) {
      used_.insert(key);
      if (!fallback) throw ConfigError(where(key) + " is required");
      return *fallback;
    }
    const double v = get<double>(key);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where(key) + " must be a positive number");
    return v;
  }

  int count(const std::string& key, int fallback, int lo = 1) {
    const int v = get<int>(key, fallback);
    if (v < lo) throw ConfigError(where(key) + " must be at least " + std::to_string(lo));
    return v;
  }

  std::vector<int> degrees(const std::string& key, int lo, int hi) {
    const auto v = get<std::vector<int>>(key);
    if (v.empty()) throw ConfigError(where(key) + " must list at least one degree");
    std::set<int> seen;
    for (int d : v) {
      if (d < lo || d > hi)
        throw ConfigError(where(key) + ": degree " + std::to_string(d) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      if (!seen.insert(d).second) throw ConfigError(where(key) + ": degree " + std::to_string(d) + " listed twice");
    }
    return v;
  }

  std::vector<double> positives(const std::string& key) {
    const auto v = get<std::vector<double>>(key);
    if (v.empty()) throw ConfigError(where(key) + " must not be empty");
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(where(key) + " entries must be positive");
    return v;
  }

  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& allowed, std::vector<std::string> fallback) {
    used_.insert(key);
    const auto v = has(key) ? get<std::vector<std::string>>(key) : std::move(fallback);
    if (v.empty()) throw ConfigError(where(key) + " must not be empty");
    for (const auto& s : v)
      if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) throw ConfigError(where(key) + ": unknown entry '" + s + "'");
    return v;
  }

  Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline ShapePtr parse_shape(const nlohmann::json& j, const std::string& where) {
  try {
    return shape_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

/// DomainSpec with "omega" defaulting to the whole box.
inline DomainSpec parse_domain(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a domain object");
  nlohmann::json d = j;
  if (!d.contains("omega")) d["omega"] = {{"type", "all"}};
  for (const auto& [k, v] : d.items())
    if (k != "dim" && k != "box" && k != "h" && k != "omega" && k != "ambient" && k != "variant")
      throw ConfigError(where + ": unknown key '" + k + "'");
  try {
    DomainSpec s = DomainSpec::from_json(d);
    if (s.dim < 1 || s.dim > 3) throw ConfigError(where + ".dim must be 1, 2 or 3");
    if (!(s.h > 0)) throw ConfigError(where + ".h must be positive");
    for (int a = 0; a < s.dim; ++a)
      if (!(s.box.hi(a) > s.box.lo(a))) throw ConfigError(where + ".box must have hi > lo on every axis");
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline bool is_everything(const ShapePtr& s) { return dynamic_cast<const Everything*>(s.get()) != nullptr; }

/// The complex a constant is computed on: the omega part of K (or K itself).
inline ComplexPtr build_geometry(const DomainSpec& s) {
  ComplexPtr k = s.build_k();
  if (is_everything(s.omega)) return k;
  return extract_subcomplex(k, s.omega_selection(*k)).child;
}

/// Shape description moved by `offset` (centres and box corners).
inline nlohmann::json translate_shape_json(nlohmann::json j, const Vec& offset) {
  auto shift = [&](nlohmann::json& p) {
    for (std::size_t a = 0; a < p.size() && a < static_cast<std::size_t>(offset.size()); ++a)
      p[a] = p[a].get<double>() + offset(static_cast<Index>(a));
  };
  for (const char* key : {"center", "lo", "hi"})
    if (j.contains(key)) shift(j[key]);
  if (j.contains("parts"))
    for (auto& p : j["parts"]) p = translate_shape_json(p, offset);
  for (const char* key : {"base", "minus"})
    if (j.contains(key)) j[key] = translate_shape_json(j[key], offset);
  return j;
}

/// Independent generator per case key, stable across thread counts.
inline std::mt19937_64 case_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq ss(words.begin(), words.end());
  return std::mt19937_64(ss);
}

/// Runs f(0..n-1) on up to `threads` workers; the first exception (by index) is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string h_label(double h) {
  const double inv = 1.0 / h;
  if (std::abs(inv - std::round(inv)) < 1e-9) return "1/" + std::to_string(static_cast<long>(std::round(inv)));
  return format_double(h);
}

inline double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
inline double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

/// max/min of positive values (1 for a single value, inf if any is zero).
inline double spread(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  const double lo = min_of(v), hi = max_of(v);
  return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

struct Interval {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
};

inline Interval parse_interval(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + " must be [lo, hi]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.lo <= iv.hi)) throw ConfigError(where + " must satisfy lo <= hi");
  return iv;
}

/// {"0": [lo, hi], "1": [lo, hi]} keyed by degree.
inline std::map<int, Interval> parse_degree_intervals(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must map degrees to [lo, hi]");
  std::map<int, Interval> out;
  for (const auto& [k, v] : j.items()) {
    int d = 0;
    try {
      d = std::stoi(k);
    } catch (const std::exception&) {
      throw ConfigError(where + ": key '" + k + "' is not a degree");
    }
    out[d] = parse_interval(v, where + "." + k);
  }
  return out;
}

/// Tolerances block: every value positive, unknown names rejected.
inline std::map<std::string, double> parse_tolerances(Reader& r, std::map<std::string, double> defaults) {
  if (!r.has("tolerances")) {
    r.allow({"tolerances"});
    return defaults;
  }
  const nlohmann::json& t = r.raw("tolerances");
  if (!t.is_object()) throw ConfigError(r.where("tolerances") + " must be an object");
  for (const auto& [k, v] : t.items()) {
    if (!defaults.count(k)) throw ConfigError(r.where("tolerances") + ": unknown tolerance '" + k + "'");
    if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(r.where("tolerances") + "." + k + " must be positive");
    defaults[k] = v.get<double>();
  }
  return defaults;
}

struct Named {
  std::string name;
  nlohmann::json shape_doc;
  ShapePtr shape;
};

inline std::vector<Named> parse_named_shapes(Reader& r, const std::string& key) {
  const nlohmann::json& list = r.raw(key);
  if (!list.is_array() || list.empty()) throw ConfigError(r.where(key) + " must be a non-empty array");
  std::vector<Named> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Reader item(list[i], r.where(key) + "[" + std::to_string(i) + "]");
    Named n;
    n.name = item.get<std::string>("name");
    n.shape_doc = item.raw("shape");
    n.shape = parse_shape(n.shape_doc, item.where("shape"));
    item.finish();
    if (!names.insert(n.name).second) throw ConfigError(item.path() + ": duplicate name '" + n.name + "'");
    out.push_back(std::move(n));
  }
  return out;
}

// --------------------------------------------------------------------------
// mesh

struct MeshSpec {
  DomainSpec domain;
};

inline MeshSpec parse_mesh(Reader& r) {
  MeshSpec s;
  s.domain = parse_domain(r.raw("domain"), r.where("domain"));
  return s;
}

inline RunReport run_mesh(const MeshSpec& s, const ExperimentConfig&) {
  RunReport rep;
  const ComplexPtr k = s.domain.build_k();
  std::vector<std::pair<std::string, ComplexPtr>> parts{{"K", k}};
  if (!is_everything(s.domain.omega)) {
    const auto sel = s.domain.omega_selection(*k);
    parts.emplace_back("omega", extract_subcomplex(k, sel).child);
    std::vector<char> rest(sel.size());
    for (std::size_t i = 0; i < sel.size(); ++i) rest[i] = sel[i] ? 0 : 1;
    if (std::any_of(rest.begin(), rest.end(), [](char c) { return c != 0; }))
      parts.emplace_back("exterior", extract_subcomplex(k, rest).child);
  }
  const int n = k->dim();
  std::vector<std::string> cols{"part", "hash"};
  for (int d = 0; d <= n; ++d) cols.push_back("count" + std::to_string(d));
  for (int d = 0; d <= n; ++d) cols.push_back("betti" + std::to_string(d));
  cols.push_back("euler");
  Table& t = rep.table("mesh", cols);
  for (const auto& [name, c] : parts) {
    const auto b = betti_numbers(*c);
    std::vector<std::string> row{name, complex_hash(*c)};
    long euler = 0, beuler = 0;
    for (int d = 0; d <= n; ++d) {
      row.push_back(std::to_string(c->count(d)));
      euler += (d % 2 ? -1 : 1) * static_cast<long>(c->count(d));
    }
    for (int d = 0; d <= n; ++d) {
      row.push_back(std::to_string(b[static_cast<std::size_t>(d)]));
      beuler += (d % 2 ? -1 : 1) * static_cast<long>(b[static_cast<std::size_t>(d)]);
    }
    row.push_back(std::to_string(euler));
    t.rows.push_back(row);
    rep.add(assert_eq("Euler characteristic of " + name + " equals the alternating Betti sum",
                      "simplicial homology of the triangulation is consistent", static_cast<double>(euler), static_cast<double>(beuler)));
    rep.files[name + ".mesh.json"] = mesh_to_json(*c).dump(1) + "\n";
    rep.summary[name] = {{"hash", complex_hash(*c)}, {"betti", b}};
  }
  return rep;
}

// --------------------------------------------------------------------------
// extend

struct ExtendSpec {
  DomainSpec domain;
  int degree = 0;
  std::optional<std::filesystem::path> input;
  bool project_harmonic = false;
  std::map<std::string, double> tol;
};

inline ExtendSpec parse_extend(Reader& r, const ExperimentConfig& cfg) {
  ExtendSpec s;
  s.domain = parse_domain(r.raw("domain"), r.where("domain"));
  if (is_everything(s.domain.omega)) throw ConfigError(r.where("domain") + ".omega must be a proper subdomain");
  s.degree = r.get<int>("degree");
  if (s.degree < 0 || s.degree > s.domain.dim) throw ConfigError(r.where("degree") + " must lie in [0, dim]");
  if (r.has("input")) {
    std::filesystem::path p = r.get<std::string>("input");
    s.input = p.is_relative() && !cfg.base_dir.empty() ? cfg.base_dir / p : p;
  } else {
    r.allow({"input"});
  }
  s.project_harmonic = r.get<bool>("project_harmonic", false);
  s.tol = parse_tolerances(r, {{"cochain_identity", 1e-10}, {"gauge", 1e-9}});
  return s;
}

inline RunReport run_extend(const ExtendSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  const auto p = ExtensionProblem::from_domain(s.domain);
  const ComplexPtr& om = p->omega_map().child;
  Cochain w = Cochain::zero(s.degree, om);
  if (s.input) {
    w = load_cochain(*s.input, om, s.degree);
  } else {
    auto rng = case_rng(cfg.seed, {static_cast<std::uint64_t>(s.degree)});
    w = p->random_datum(s.degree, rng);
    rep.notes.push_back("no input given: extended a random datum orthogonal to the harmonic forms of Omega");
  }
  ExtendOptions opt;
  opt.project_harmonic = s.project_harmonic;
  const ExtensionResult r = p->extend(w, opt);
  const double restr = (restrict_to(r.extended, p->omega_map()).values - w.values).cwiseAbs().maxCoeff();
  double ktrace = 0.0;
  for (Index i : p->k_complex()->label(kBoundaryLabel, s.degree)) ktrace = std::max(ktrace, std::abs(r.extended.values(i)));

  Table& t = rep.table("residuals", {"degree", "variant", "ratio", "cochain_identity", "gauge", "coboundary", "trace", "moment",
                                     "compatibility", "restriction_error", "boundary_max", "harmonic_removed"});
  t.add(s.degree, to_string(p->variant()), r.ratio, r.cochain_identity, r.residuals.gauge, r.residuals.coboundary, r.residuals.trace,
        r.residuals.moment, r.residuals.compatibility, restr, ktrace, r.harmonic_removed);
  const std::string k = std::to_string(s.degree);
  rep.add(assert_eq("restriction of E^" + k + " omega to Omega is omega", "extension restricts to the identity on Omega", restr, 0.0));
  if (p->variant() == ExtensionVariant::ZeroTrace)
    rep.add(assert_eq("E^" + k + " omega vanishes on dK", "zero-trace extension has zero tangential trace on dK", ktrace, 0.0));
  if (s.degree < p->dim())
    rep.add(assert_le("|D E omega - E D omega| / |omega|_HL", "extension is a cochain map", r.cochain_identity, s.tol.at("cochain_identity")));
  rep.add(assert_le("gauge residual", "recursive step solution satisfies the gauge condition", r.residuals.gauge, s.tol.at("gauge")));

  rep.files["K.mesh.json"] = mesh_to_json(*p->k_complex()).dump(1) + "\n";
  rep.files["omega.mesh.json"] = mesh_to_json(*om).dump(1) + "\n";
  rep.files["exterior.mesh.json"] = mesh_to_json(*p->exterior_map().child).dump(1) + "\n";
  rep.files["omega.csv"] = cochain_to_csv(w);
  rep.files["extended.csv"] = cochain_to_csv(r.extended);
  rep.files["lambda.csv"] = cochain_to_csv(r.lambda);
  if (!r.extended_d.is_zero_object()) rep.files["extended_d.csv"] = cochain_to_csv(r.extended_d);
  rep.summary["coefficients"] = std::vector<double>(r.coefficients.data(), r.coefficients.data() + r.coefficients.size());
  rep.summary["rho"] = p->rho();
  if (!r.warning.empty()) rep.notes.push_back(r.warning);
  return rep;
}

// --------------------------------------------------------------------------
// verify

struct VerifySpec {
  std::string mode = "extension";
  DomainSpec domain;
  std::vector<double> h_levels;
  std::vector<ExtensionVariant> variants;
  std::vector<int> degrees;
  int samples = 20;
  std::vector<std::string> checks;
  std::map<std::string, double> tol;
  // probe mode
  struct Ambient {
    std::string name;
    ShapePtr shape;
    bool extends = true;
  };
  std::vector<Ambient> ambients;
  int degree = 1;
  double floor = 0.0;
};

inline VerifySpec parse_verify(Reader& r, const std::string& mode) {
  VerifySpec s;
  s.mode = mode.empty() ? "extension" : mode;
  s.domain = parse_domain(r.raw("domain"), r.where("domain"));
  if (is_everything(s.domain.omega)) throw ConfigError(r.where("domain") + ".omega must be a proper subdomain");
  const int n = s.domain.dim;
  if (s.mode == "extension") {
    s.h_levels = r.has("h_levels") ? r.positives("h_levels") : std::vector<double>{s.domain.h};
    for (const auto& v : r.strings("variants", {"zero-trace", "mixed"}, {to_string(s.domain.variant)}))
      s.variants.push_back(variant_from_string(v));
    s.degrees = r.degrees("degrees", 0, n);
    s.samples = r.count("samples", 20);
    s.checks = r.strings("checks", {"restriction", "zero_trace", "cochain_identity", "gauge", "stability_uniformity"},
                         {"restriction", "zero_trace", "cochain_identity", "gauge", "stability_uniformity"});
    s.tol = parse_tolerances(r, {{"cochain_identity", 1e-10}, {"gauge", 1e-9}, {"uniformity_factor", 2.0}});
  } else if (s.mode == "probe") {
    const nlohmann::json& list = r.raw("ambients");
    if (!list.is_array() || list.empty()) throw ConfigError(r.where("ambients") + " must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Reader a(list[i], r.where("ambients") + "[" + std::to_string(i) + "]");
      VerifySpec::Ambient amb;
      amb.name = a.get<std::string>("name");
      amb.shape = parse_shape(a.raw("shape"), a.where("shape"));
      const std::string e = a.get<std::string>("expect");
      if (e != "extends" && e != "obstructed") throw ConfigError(a.where("expect") + " must be 'extends' or 'obstructed'");
      amb.extends = e == "extends";
      a.finish();
      s.ambients.push_back(amb);
    }
    s.degree = r.get<int>("degree", 1);
    if (s.degree < 1 || s.degree >= n) throw ConfigError(r.where("degree") + " must lie in [1, dim-1]");
    s.floor = r.positive("floor");
    s.tol = parse_tolerances(r, {{"feasible", 1e-8}});
  } else {
    throw ConfigError("config.mode: verify supports 'extension' and 'probe', not '" + s.mode + "'");
  }
  return s;
}

inline bool wants(const std::vector<std::string>& checks, const std::string& c) {
  return std::find(checks.begin(), checks.end(), c) != checks.end();
}

inline RunReport run_verify_probe(const VerifySpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  rep.mode = "probe";
  const ComplexPtr bg = build_box_complex(s.domain.box, s.domain.h, s.domain.dim);
  Table& t = rep.table("probe", {"ambient", "expect", "ambient_betti", "basis_index", "residual", "feasible"});
  struct Out {
    std::vector<double> residuals;
    std::vector<char> feasible;
    Index betti = 0;
    double seconds = 0.0;
  };
  std::vector<Out> outs(s.ambients.size());
  parallel_for(s.ambients.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const ComplexPtr k = extract_subcomplex(bg, *s.ambients[i].shape).child;
    ExtensionProblem p(k, barycenter_selection(*k, *s.domain.omega), ExtensionVariant::Mixed);
    outs[i].betti = betti_numbers(*k)[static_cast<std::size_t>(s.degree)];
    const HarmonicBasis& hb = p.harmonic_omega(s.degree);
    for (Index j = 0; j < hb.dim(); ++j) {
      const auto pr = p.harmonic_extension_probe(hb.element(j), s.tol.at("feasible"));
      outs[i].residuals.push_back(pr.residual);
      outs[i].feasible.push_back(pr.feasible);
    }
    outs[i].seconds = seconds_since(t0);
  });
  for (std::size_t i = 0; i < s.ambients.size(); ++i) {
    const auto& a = s.ambients[i];
    const auto& o = outs[i];
    rep.timings.push_back({a.name, o.seconds});
    for (std::size_t j = 0; j < o.residuals.size(); ++j)
      t.add(a.name, a.extends ? "extends" : "obstructed", o.betti, static_cast<long>(j), o.residuals[j], static_cast<bool>(o.feasible[j]));
    rep.add(assert_gt("Omega carries harmonic " + std::to_string(s.degree) + "-fields to probe (" + a.name + ")",
                      "probe is non-vacuous", static_cast<double>(o.residuals.size()), 0.0));
    if (a.extends)
      rep.add(assert_le("max probe residual into " + a.name, "harmonic generator extends when the ambient keeps the hole",
                        max_of(o.residuals), s.tol.at("feasible")));
    else
      rep.add(assert_gt("min probe residual into " + a.name, "no closed extension exists when the ambient fills the hole",
                        o.residuals.empty() ? 0.0 : min_of(o.residuals), s.floor));
  }
  return rep;
}

inline RunReport run_verify(const VerifySpec& s, const ExperimentConfig& cfg) {
  if (s.mode == "probe") return run_verify_probe(s, cfg);
  RunReport rep;
  rep.mode = "extension";
  struct Sample {
    double hl = 0, ratio = 0, ci = 0, gauge = 0, restr = 0, bmax = 0;
  };
  struct Case {
    ExtensionVariant variant;
    double h;
    std::vector<std::vector<Sample>> per_degree;
    double seconds = 0.0;
  };
  std::vector<Case> cases;
  for (auto v : s.variants)
    for (double h : s.h_levels) cases.push_back(Case{v, h, {}, 0.0});
  parallel_for(cases.size(), cfg.threads, [&](std::size_t ci) {
    Case& c = cases[ci];
    const auto t0 = std::chrono::steady_clock::now();
    DomainSpec d = s.domain;
    d.h = c.h;
    d.variant = c.variant;
    const auto p = ExtensionProblem::from_domain(d);
    for (int k : s.degrees) {
      auto rng = case_rng(cfg.seed, {static_cast<std::uint64_t>(c.variant), static_cast<std::uint64_t>(std::llround(1.0 / c.h)),
                                     static_cast<std::uint64_t>(k)});
      std::vector<Sample> out;
      for (int i = 0; i < s.samples; ++i) {
        const Cochain w = p->random_datum(k, rng);
        const ExtensionResult r = p->extend(w);
        Sample sm;
        sm.hl = graph_norm(*p->ops_omega(), w);
        sm.ratio = r.ratio;
        sm.ci = r.cochain_identity;
        sm.gauge = p->gauge_residual(r);
        sm.restr = (restrict_to(r.extended, p->omega_map()).values - w.values).cwiseAbs().maxCoeff();
        for (Index b : p->k_complex()->label(kBoundaryLabel, k)) sm.bmax = std::max(sm.bmax, std::abs(r.extended.values(b)));
        out.push_back(sm);
      }
      c.per_degree.push_back(std::move(out));
    }
    c.seconds = seconds_since(t0);
  });

  Table& t = rep.table("extensions", {"variant", "h", "degree", "sample", "omega_hl_norm", "ratio", "cochain_identity", "gauge",
                                      "restriction_error", "boundary_max"});
  Table& st = rep.table("stability", {"variant", "degree", "h", "max_ratio"});
  for (const Case& c : cases) {
    rep.timings.push_back({to_string(c.variant) + " h=" + h_label(c.h), c.seconds});
    for (std::size_t di = 0; di < s.degrees.size(); ++di)
      for (std::size_t i = 0; i < c.per_degree[di].size(); ++i) {
        const Sample& sm = c.per_degree[di][i];
        t.add(to_string(c.variant), c.h, s.degrees[di], static_cast<long>(i), sm.hl, sm.ratio, sm.ci, sm.gauge, sm.restr, sm.bmax);
      }
  }
  svg::Plot plot;
  plot.file = "stability.svg";
  plot.title = "Extension stability: max HL-ratio vs h";
  plot.xlabel = "h (length)";
  plot.ylabel = "max |E w|_HL(K) / |w|_HL(Omega) (dimensionless)";
  plot.logx = true;
  for (auto v : s.variants)
    for (std::size_t di = 0; di < s.degrees.size(); ++di) {
      const int k = s.degrees[di];
      const std::string tag = to_string(v) + ", k=" + std::to_string(k);
      double ci = 0, gauge = 0, restr = 0, bmax = 0;
      std::vector<double> maxima;
      svg::Series ser{tag, {}, {}};
      for (const Case& c : cases) {
        if (c.variant != v) continue;
        double m = 0;
        for (const Sample& sm : c.per_degree[di]) {
          m = std::max(m, sm.ratio);
          ci = std::max(ci, sm.ci);
          gauge = std::max(gauge, sm.gauge);
          restr = std::max(restr, sm.restr);
          bmax = std::max(bmax, sm.bmax);
        }
        maxima.push_back(m);
        st.add(to_string(v), k, c.h, m);
        ser.x.push_back(c.h);
        ser.y.push_back(m);
      }
      plot.series.push_back(ser);
      if (wants(s.checks, "restriction"))
        rep.add(assert_eq("max |E w on Omega - w| (" + tag + ")", "extension restricts to the identity on Omega", restr, 0.0));
      if (wants(s.checks, "zero_trace") && v == ExtensionVariant::ZeroTrace)
        rep.add(assert_eq("max |E w| on dK (" + tag + ")", "zero-trace extension has zero tangential trace on dK", bmax, 0.0));
      if (wants(s.checks, "cochain_identity") && k < s.domain.dim)
        rep.add(assert_le("max |D E w - E D w|_M / |w|_HL (" + tag + ")", "extension is a cochain map", ci, s.tol.at("cochain_identity")));
      if (wants(s.checks, "gauge"))
        rep.add(assert_le("max gauge residual (" + tag + ")", "recursive step solution satisfies the gauge condition", gauge,
                          s.tol.at("gauge")));
      if (wants(s.checks, "stability_uniformity"))
        rep.add(assert_lt("max ratio spread across h (" + tag + ")", "extension is bounded in HL uniformly in h", spread(maxima),
                          s.tol.at("uniformity_factor")));
    }
  rep.plots.push_back(plot);
  return rep;
}

// --------------------------------------------------------------------------
// poincare

struct PoincareSpec {
  std::string mode = "constants";
  // constants
  DomainSpec domain;
  std::vector<double> h_levels;
  std::vector<int> degrees;
  std::vector<Convention> conventions;
  struct Reference {
    Convention convention;
    int degree;
    double value;
    double rel_tol;
  };
  std::vector<Reference> references;
  bool diameter_bounds = false;
  // relations
  struct Convex {
    std::string name;
    DomainSpec domain;
  };
  std::vector<Convex> convex;
  double slack = 0.05;
  // monotonicity
  std::vector<Convex> pairs;
  double tolerance = 1e-8;
};

inline PoincareSpec parse_poincare(Reader& r, const std::string& mode) {
  PoincareSpec s;
  s.mode = mode.empty() ? "constants" : mode;
  auto named_domains = [&](const std::string& key) {
    const nlohmann::json& list = r.raw(key);
    if (!list.is_array() || list.empty()) throw ConfigError(r.where(key) + " must be a non-empty array");
    std::vector<PoincareSpec::Convex> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      Reader it(list[i], r.where(key) + "[" + std::to_string(i) + "]");
      PoincareSpec::Convex c{it.get<std::string>("name"), parse_domain(it.raw("domain"), it.where("domain"))};
      it.finish();
      out.push_back(c);
    }
    return out;
  };
  if (s.mode == "constants") {
    s.domain = parse_domain(r.raw("domain"), r.where("domain"));
    s.h_levels = r.has("h_levels") ? r.positives("h_levels") : std::vector<double>{s.domain.h};
    s.degrees = r.degrees("degrees", 0, s.domain.dim - 1);
    for (const auto& c : r.strings("conventions", {"neumann", "neumann-coclosed", "dirichlet"}, {"neumann"}))
      s.conventions.push_back(convention_from_string(c));
    if (r.has("reference")) {
      const nlohmann::json& list = r.raw("reference");
      if (!list.is_array()) throw ConfigError(r.where("reference") + " must be an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader it(list[i], r.where("reference") + "[" + std::to_string(i) + "]");
        PoincareSpec::Reference ref{};
        const std::string conv = it.get<std::string>("convention");
        try {
          ref.convention = convention_from_string(conv);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(it.where("convention") + ": " + e.what());
        }
        ref.degree = it.get<int>("degree");
        ref.value = it.positive("lambda1");
        ref.rel_tol = it.positive("rel_tol");
        it.finish();
        if (std::find(s.conventions.begin(), s.conventions.end(), ref.convention) == s.conventions.end() ||
            std::find(s.degrees.begin(), s.degrees.end(), ref.degree) == s.degrees.end())
          throw ConfigError(it.path() + " refers to a convention/degree that is not computed");
        s.references.push_back(ref);
      }
    } else {
      r.allow({"reference"});
    }
    s.diameter_bounds = r.get<bool>("diameter_bounds", false);
  } else if (s.mode == "relations") {
    s.convex = named_domains("geometries");
    for (const auto& g : s.convex)
      if (!is_everything(g.domain.omega) && !dynamic_cast<const BoxShape*>(g.domain.omega.get()))
        throw ConfigError(r.where("geometries") + ": '" + g.name + "' must be convex (omega absent or a box)");
    s.slack = r.positive("slack", 0.05);
  } else if (s.mode == "monotonicity") {
    s.pairs = named_domains("pairs");
    int n = s.pairs.front().domain.dim;
    for (const auto& p : s.pairs) {
      if (p.domain.dim != n) throw ConfigError(r.where("pairs") + ": all pairs must share one dimension");
      if (is_everything(p.domain.omega)) throw ConfigError(r.where("pairs") + ": pair '" + p.name + "' needs a proper omega");
    }
    s.degrees = r.degrees("degrees", 0, n - 1);
    s.tolerance = r.positive("tolerance", 1e-8);
  } else {
    throw ConfigError("config.mode: poincare supports 'constants', 'relations' and 'monotonicity', not '" + s.mode + "'");
  }
  return s;
}

inline RunReport run_poincare_constants(const PoincareSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  rep.mode = "constants";
  struct Case {
    double h;
    double diameter = 0.0;
    std::vector<SpectralReport> reports;  // conventions x degrees
    double seconds = 0.0;
  };
  std::vector<Case> cases;
  for (double h : s.h_levels) cases.push_back(Case{h});
  parallel_for(cases.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    DomainSpec d = s.domain;
    d.h = cases[i].h;
    const ComplexPtr c = build_geometry(d);
    cases[i].diameter = hull_diameter(*c);
    const auto ops = assemble(c);
    for (Convention conv : s.conventions)
      for (int k : s.degrees) cases[i].reports.push_back(poincare_constant(ops, k, conv));
    cases[i].seconds = seconds_since(t0);
  });
  Table& t = rep.table("constants", {"convention", "degree", "h", "lambda1", "poincare_constant", "kernel_dim", "expected_kernel_dim",
                                     "residual", "iterations", "diameter"});
  bool kernels = true;
  double recip = 0.0;
  for (std::size_t ci = 0; ci < s.conventions.size(); ++ci)
    for (std::size_t di = 0; di < s.degrees.size(); ++di)
      for (const Case& c : cases) {
        const SpectralReport& r = c.reports[ci * s.degrees.size() + di];
        t.add(to_string(s.conventions[ci]), s.degrees[di], c.h, r.lambda1, r.poincare_constant, static_cast<long>(r.kernel_dim),
              static_cast<long>(r.expected_kernel_dim), r.residual, r.iterations, c.diameter);
        kernels = kernels && r.kernel_dim == r.expected_kernel_dim;
        recip = std::max(recip, std::abs(r.poincare_constant * std::sqrt(r.lambda1) - 1.0));
      }
  for (const Case& c : cases) rep.timings.push_back({"h=" + h_label(c.h), c.seconds});
  rep.add(assert_eq("kernel dimension matches Betti number plus exact-space dimension", "discrete eigenproblem kernel is the closed forms",
                    kernels ? 1.0 : 0.0, 1.0));
  rep.add(assert_le("|C sqrt(lambda_1) - 1|", "Poincare constant is 1/sqrt(lambda_1)", recip, 1e-14));
  // Finest level for the closed-form comparisons.
  const std::size_t fi = static_cast<std::size_t>(std::min_element(s.h_levels.begin(), s.h_levels.end()) - s.h_levels.begin());
  const Case& fine = cases[fi];
  auto lookup = [&](Convention conv, int k) -> const SpectralReport& {
    const std::size_t ci = static_cast<std::size_t>(std::find(s.conventions.begin(), s.conventions.end(), conv) - s.conventions.begin());
    const std::size_t di = static_cast<std::size_t>(std::find(s.degrees.begin(), s.degrees.end(), k) - s.degrees.begin());
    return fine.reports[ci * s.degrees.size() + di];
  };
  for (const auto& ref : s.references) {
    const double l = lookup(ref.convention, ref.degree).lambda1;
    rep.add(assert_le("|lambda_1 / reference - 1| (" + to_string(ref.convention) + ", k=" + std::to_string(ref.degree) + ", h=" +
                          h_label(fine.h) + ")",
                      "discrete eigenvalue approximates the closed-form value", std::abs(l / ref.value - 1.0), ref.rel_tol));
  }
  if (s.diameter_bounds) {
    const double diam = fine.diameter;
    const auto has = [&](Convention c) { return std::find(s.conventions.begin(), s.conventions.end(), c) != s.conventions.end(); };
    const bool k0 = std::find(s.degrees.begin(), s.degrees.end(), 0) != s.degrees.end();
    if (k0 && has(Convention::NeumannCoclosed))
      rep.add(assert_le("C_P^(0) vs diam/pi", "Neumann Poincare constant of a convex domain is at most diam/pi",
                        lookup(Convention::NeumannCoclosed, 0).poincare_constant, diam / M_PI));
    if (k0 && has(Convention::Dirichlet))
      rep.add(assert_ge("kappa_1^(0) vs n pi^2 / diam^2", "first Dirichlet eigenvalue of a convex domain is at least n pi^2/diam^2",
                        lookup(Convention::Dirichlet, 0).lambda1, s.domain.dim * M_PI * M_PI / (diam * diam)));
    if (!k0 || !(has(Convention::NeumannCoclosed) || has(Convention::Dirichlet)))
      rep.notes.push_back("diameter bounds need degree 0 in the degree list");
  }
  svg::Plot plot;
  plot.file = "constants.svg";
  plot.title = "Poincare constants vs h";
  plot.xlabel = "h (length)";
  plot.ylabel = "C = 1/sqrt(lambda_1) (length)";
  plot.logx = true;
  plot.style = svg::Style::Lines;
  for (std::size_t ci = 0; ci < s.conventions.size(); ++ci)
    for (std::size_t di = 0; di < s.degrees.size(); ++di) {
      svg::Series ser{to_string(s.conventions[ci]) + ", k=" + std::to_string(s.degrees[di]), {}, {}};
      for (const Case& c : cases) {
        ser.x.push_back(c.h);
        ser.y.push_back(c.reports[ci * s.degrees.size() + di].poincare_constant);
      }
      plot.series.push_back(ser);
    }
  rep.plots.push_back(plot);
  return rep;
}

inline RunReport run_poincare_relations(const PoincareSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  rep.mode = "relations";
  std::vector<ConvexRelationsReport> reps(s.convex.size());
  std::vector<double> secs(s.convex.size());
  parallel_for(s.convex.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    reps[i] = convex_relations(build_geometry(s.convex[i].domain), s.slack);
    secs[i] = seconds_since(t0);
  });
  Table& t = rep.table("relations", {"geometry", "degree", "lambda1_neumann", "kappa1_dirichlet", "diameter"});
  for (std::size_t i = 0; i < s.convex.size(); ++i) {
    rep.timings.push_back({s.convex[i].name, secs[i]});
    for (std::size_t k = 0; k < reps[i].lambda.size(); ++k)
      t.add(s.convex[i].name, static_cast<long>(k), reps[i].lambda[k], reps[i].kappa[k], reps[i].diameter);
    for (const Check& c : reps[i].checks) {
      Assertion a{c.name + " (" + s.convex[i].name + ")", c.claim, c.lhs, c.rhs, "<=", c.pass, c.informational};
      rep.add(a);
    }
  }
  return rep;
}

inline RunReport run_poincare_monotonicity(const PoincareSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  rep.mode = "monotonicity";
  std::vector<std::vector<MonotonicityReport>> out(s.pairs.size());
  std::vector<double> secs(s.pairs.size());
  parallel_for(s.pairs.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const ComplexPtr k = s.pairs[i].domain.build_k();
    ExtensionProblem p(k, s.pairs[i].domain.omega_selection(*k), ExtensionVariant::Mixed);
    for (int d : s.degrees) out[i].push_back(dirichlet_monotonicity_check(p, d, s.tolerance));
    secs[i] = seconds_since(t0);
  });
  Table& t = rep.table("monotonicity", {"pair", "degree", "c_p0_exterior", "c_p0_k", "c_exterior_closed_orth", "pass", "closed_orth_pass"});
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    rep.timings.push_back({s.pairs[i].name, secs[i]});
    for (const auto& m : out[i]) {
      const std::string tag = s.pairs[i].name + ", k=" + std::to_string(m.degree);
      t.add(s.pairs[i].name, m.degree, m.c_exterior, m.c_k, m.c_exterior_closed_orth, m.pass, m.closed_orth_pass);
      rep.add(assert_le("C_P0(A) vs C_P0(K) + tol (" + tag + ")", "Dirichlet Poincare constants are monotone: C_P0(A) <= C_P0(K)",
                        m.c_exterior, m.c_k + s.tolerance));
      rep.add(informational(assert_le("A constant over forms orthogonal to all closed forms vs C_P0(K) + tol (" + tag + ")",
                                      "extension by zero bounds forms orthogonal to every closed form on A", m.c_exterior_closed_orth,
                                      m.c_k + s.tolerance)));
    }
  }
  return rep;
}

inline RunReport run_poincare(const PoincareSpec& s, const ExperimentConfig& cfg) {
  if (s.mode == "relations") return run_poincare_relations(s, cfg);
  if (s.mode == "monotonicity") return run_poincare_monotonicity(s, cfg);
  return run_poincare_constants(s, cfg);
}

// --------------------------------------------------------------------------
// eigen-scan

struct EigenScanSpec {
  struct Member {
    std::string name;
    DomainSpec domain;
  };
  std::vector<Member> members;
  std::vector<double> scales;
  std::vector<int> degrees;
  std::vector<std::string> checks;
  std::map<int, double> floor;
  std::map<std::string, double> tol;
};

inline EigenScanSpec parse_eigen_scan(Reader& r) {
  EigenScanSpec s;
  if (r.has("members")) {
    const nlohmann::json& list = r.raw("members");
    if (!list.is_array() || list.empty()) throw ConfigError(r.where("members") + " must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Reader it(list[i], r.where("members") + "[" + std::to_string(i) + "]");
      s.members.push_back({it.get<std::string>("name"), parse_domain(it.raw("domain"), it.where("domain"))});
      it.finish();
    }
    r.allow({"domain"});
    if (r.has("domain")) throw ConfigError("config: give either 'domain' or 'members', not both");
  } else {
    r.allow({"members"});
    s.members.push_back({"base", parse_domain(r.raw("domain"), r.where("domain"))});
  }
  s.scales = r.positives("scales");
  s.degrees = r.degrees("degrees", 0, s.members.front().domain.dim - 1);
  s.checks = r.strings("checks", {"dilation", "floor", "exponent", "degree_floor"}, {"dilation", "exponent"});
  if (wants(s.checks, "floor")) {
    const nlohmann::json& f = r.raw("floor");
    if (f.is_number()) {
      for (int d : s.degrees) s.floor[d] = f.get<double>();
    } else if (f.is_object()) {
      for (const auto& [k, v] : f.items()) {
        if (!v.is_number()) throw ConfigError(r.where("floor") + "." + k + " must be a number");
        s.floor[std::stoi(k)] = v.get<double>();
      }
      for (int d : s.degrees)
        if (!s.floor.count(d)) throw ConfigError(r.where("floor") + " has no value for degree " + std::to_string(d));
    } else {
      throw ConfigError(r.where("floor") + " must be a number or a degree map");
    }
    for (const auto& [d, v] : s.floor)
      if (!(v > 0)) throw ConfigError(r.where("floor") + " values must be positive");
  } else {
    r.allow({"floor"});
  }
  s.tol = parse_tolerances(r, {{"dilation", 1e-10}, {"exponent", 0.1}, {"degree_floor_ratio", 10.0}});
  return s;
}

inline RunReport run_eigen_scan(const EigenScanSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  std::vector<EigenScanReport> out(s.members.size());
  std::vector<double> secs(s.members.size());
  parallel_for(s.members.size(), cfg.threads, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    out[i] = eigenvalue_lower_bound_scan(build_geometry(s.members[i].domain), s.scales, s.degrees);
    secs[i] = seconds_since(t0);
  });
  Table& t = rep.table("eigen_scan", {"member", "degree", "scale", "diameter", "lambda1", "lambda1_diam2", "lambda1_diam4"});
  Table& ft = rep.table("eigen_fit", {"member", "degree", "exponent", "dilation_spread", "floor_lambda1_diam4"});
  svg::Plot plot;
  plot.file = "lambda_vs_diameter.svg";
  plot.title = "First nonzero Neumann eigenvalue vs diameter";
  plot.xlabel = "diam (length)";
  plot.ylabel = "lambda_1 (1/length^2)";
  plot.logx = plot.logy = true;
  std::map<int, double> floor_by_degree;
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    const std::string& name = s.members[i].name;
    rep.timings.push_back({name, secs[i]});
    for (const auto& row : out[i].rows)
      t.add(name, row.degree, row.scale, row.diameter, row.lambda1, row.lambda_d2, row.lambda_d4);
    for (std::size_t di = 0; di < s.degrees.size(); ++di) {
      const int k = s.degrees[di];
      const std::string tag = name + ", k=" + std::to_string(k);
      ft.add(name, k, out[i].exponent[di], out[i].dilation_spread[di], out[i].floor[di]);
      floor_by_degree[k] = floor_by_degree.count(k) ? std::min(floor_by_degree[k], out[i].floor[di]) : out[i].floor[di];
      svg::Series ser{tag, {}, {}};
      for (const auto& row : out[i].rows)
        if (row.degree == k) {
          ser.x.push_back(row.diameter);
          ser.y.push_back(row.lambda1);
        }
      plot.series.push_back(ser);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s: fitted slope %.4f", tag.c_str(), out[i].exponent[di]);
      plot.annotations.push_back(buf);
      if (wants(s.checks, "dilation"))
        rep.add(assert_le("relative spread of lambda_1 s^2 (" + tag + ")", "lambda_1 scales exactly as s^-2 under dilation",
                          out[i].dilation_spread[di], s.tol.at("dilation")));
      if (wants(s.checks, "floor"))
        rep.add(assert_ge("min lambda_1 diam^4 (" + tag + ")", "first Neumann eigenvalue is bounded below by C/diam^4",
                          out[i].floor[di], s.floor.at(k)));
      if (wants(s.checks, "exponent"))
        rep.add(informational(assert_le("|fitted exponent + 2| (" + tag + ")",
                                        "observed diameter exponent is -2, better than the guaranteed -4",
                                        std::abs(out[i].exponent[di] + 2.0), s.tol.at("exponent"))));
    }
  }
  if (wants(s.checks, "degree_floor") && floor_by_degree.size() > 1) {
    std::vector<double> f;
    for (const auto& [k, v] : floor_by_degree) f.push_back(v);
    rep.add(informational(assert_le("max/min over degrees of min lambda_1 diam^4", "all degrees share one lower bound", spread(f),
                                    s.tol.at("degree_floor_ratio"))));
  }
  rep.plots.push_back(plot);
  return rep;
}

// --------------------------------------------------------------------------
// uniform-scan

struct UniformScanSpec {
  DomainSpec domain;  // K
  std::vector<Named> family;
  std::vector<int> degrees;
  int samples = 5;
  ExtensionVariant variant = ExtensionVariant::Mixed;
};

inline UniformScanSpec parse_uniform_scan(Reader& r) {
  UniformScanSpec s;
  s.domain = parse_domain(r.raw("domain"), r.where("domain"));
  if (!is_everything(s.domain.omega)) throw ConfigError(r.where("domain") + " describes K; give the subdomains under 'family'");
  s.family = parse_named_shapes(r, "family");
  s.degrees = r.degrees("degrees", 0, s.domain.dim - 1);
  s.samples = r.count("samples", 5, 0);
  s.variant = variant_from_string(r.get<std::string>("variant", "mixed"));
  return s;
}

inline RunReport run_uniform_scan(const UniformScanSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  const ComplexPtr k = s.domain.build_k();
  std::vector<std::pair<std::string, ShapePtr>> fam;
  for (const auto& m : s.family) fam.emplace_back(m.name, m.shape);
  const UniformScanReport u = uniform_poincare_scan(k, fam, s.degrees, s.samples, cfg.seed, s.variant);
  Table& t = rep.table("uniform_scan", {"member", "degree", "components", "holes", "c_neumann", "c_dirichlet", "extension_ratio",
                                        "bound_proxy", "c_neumann_k", "c_dirichlet_k"});
  for (const auto& r : u.rows) {
    t.add(r.member, r.degree, static_cast<long>(r.components), static_cast<long>(r.holes), r.c_neumann, r.c_dirichlet, r.extension_ratio,
          r.bound_proxy, u.c_k_by_degree[static_cast<std::size_t>(r.degree)], u.c0_k_by_degree[static_cast<std::size_t>(r.degree)]);
    rep.timings.push_back({r.member + " k=" + std::to_string(r.degree), r.seconds});
  }
  for (const Check& c : u.checks) rep.add(Assertion{c.name, c.claim, c.lhs, c.rhs, "<=", c.pass, c.informational});
  bool disconnected = false;
  for (const auto& r : u.rows) disconnected = disconnected || r.components > 1;
  if (disconnected) {
    double worst = 0.0;
    for (const auto& r : u.rows)
      if (r.components > 1) worst = std::max(worst, r.c_neumann);
    rep.add(assert_lt("C_P of disconnected members", "constant stays finite for domains with several components", worst,
                      std::numeric_limits<double>::infinity()));
  }
  svg::Plot plot;
  plot.file = "uniform_scan.svg";
  plot.title = "Poincare constants per family member";
  plot.xlabel = "family member";
  plot.ylabel = "constant (length)";
  plot.style = svg::Style::Bars;
  for (const auto& m : s.family) plot.categories.push_back(m.name);
  for (int d : s.degrees)
    for (const char* which : {"C_P", "C_P0"}) {
      svg::Series ser{std::string(which) + " k=" + std::to_string(d), {}, {}};
      for (std::size_t i = 0; i < s.family.size(); ++i)
        for (const auto& r : u.rows)
          if (r.member == s.family[i].name && r.degree == d) {
            ser.x.push_back(static_cast<double>(i));
            ser.y.push_back(std::string(which) == "C_P" ? r.c_neumann : r.c_dirichlet);
          }
      plot.series.push_back(ser);
    }
  for (int d : s.degrees) {
    double proxy = 0.0;
    for (const auto& r : u.rows)
      if (r.degree == d) proxy = r.bound_proxy;
    char buf[96];
    std::snprintf(buf, sizeof buf, "k=%d: C_P(K) = %.4g, proxy bound = %.4g", d, u.c_k_by_degree[static_cast<std::size_t>(d)], proxy);
    plot.annotations.push_back(buf);
  }
  rep.plots.push_back(plot);
  return rep;
}

// --------------------------------------------------------------------------
// cutfem-scan

struct CutfemSpec {
  int dim = 2;
  Box box = unit_box(2);
  std::vector<Named> levelsets;
  std::vector<double> h_levels;
  int offsets = 1;
  std::vector<int> degrees;
  int samples = 10;
  double penalty_scale = kDefaultPenaltyScale;
  std::vector<std::string> measures;
  std::string pipeline = "same-grid";
  std::string datum = "smooth";
  std::map<int, Interval> pin_cs, pin_ne;
  std::map<std::string, double> tol;
};

inline CutfemSpec parse_cutfem(Reader& r) {
  CutfemSpec s;
  Reader bg = r.child("background");
  s.dim = bg.get<int>("dim", 2);
  if (s.dim != 2) throw ConfigError(bg.where("dim") + ": cut-element quadrature is implemented for dim = 2");
  if (bg.has("box")) {
    const nlohmann::json& b = bg.raw("box");
    if (!b.is_array() || b.size() != 2) throw ConfigError(bg.where("box") + " must list [lo, hi] per axis");
    s.box = Box{Vec(2), Vec(2)};
    for (int a = 0; a < 2; ++a) {
      const Interval iv = parse_interval(b[static_cast<std::size_t>(a)], bg.where("box"));
      if (!(iv.hi > iv.lo)) throw ConfigError(bg.where("box") + " must have hi > lo");
      s.box.lo(a) = iv.lo;
      s.box.hi(a) = iv.hi;
    }
  } else {
    bg.allow({"box"});
  }
  bg.finish();
  s.levelsets = parse_named_shapes(r, "levelsets");
  s.h_levels = r.positives("h_levels");
  s.offsets = r.count("offsets", 1);
  s.degrees = r.degrees("degrees", 0, s.dim - 1);
  s.samples = r.count("samples", 10);
  s.penalty_scale = r.get<double>("penalty_scale", kDefaultPenaltyScale);
  if (!(s.penalty_scale >= 0.0)) throw ConfigError(r.where("penalty_scale") + " must be non-negative");
  s.measures = r.strings("measures", {"stabilized", "discrete"}, {"stabilized", "discrete"});
  s.pipeline = r.get<std::string>("pipeline", "same-grid");
  if (s.pipeline != "same-grid" && s.pipeline != "refined") throw ConfigError(r.where("pipeline") + " must be 'same-grid' or 'refined'");
  s.datum = r.get<std::string>("datum", "smooth");
  if (s.datum != "smooth" && s.datum != "white") throw ConfigError(r.where("datum") + " must be 'smooth' or 'white'");
  if (r.has("pins")) {
    Reader p = r.child("pins");
    if (p.has("c_s")) s.pin_cs = parse_degree_intervals(p.raw("c_s"), p.where("c_s"));
    if (p.has("norm_equivalence")) s.pin_ne = parse_degree_intervals(p.raw("norm_equivalence"), p.where("norm_equivalence"));
    p.allow({"c_s", "norm_equivalence"});
    p.finish();
  } else {
    r.allow({"pins"});
  }
  s.tol = parse_tolerances(r, {{"identity", 1e-10}, {"uniformity_factor", 2.0}});
  return s;
}

inline RunReport run_cutfem_scan(const CutfemSpec& s, const ExperimentConfig& cfg) {
  RunReport rep;
  const bool do_stab = wants(s.measures, "stabilized");
  const bool do_disc = wants(s.measures, "discrete");
  struct StabRow {
    int degree;
    double cs, ne_lo, ne_hi;
    Index hdim;
  };
  struct DiscRow {
    int degree, sample;
    double ratio, identity, ext_ratio;
  };
  struct Case {
    std::size_t ls, hi;
    int offset;
    Vec shift;
    Index active = 0, cut = 0, ghost = 0;
    std::string warning;
    std::vector<StabRow> stab;
    std::vector<DiscRow> disc;
    double seconds = 0.0;
  };
  std::vector<Case> cases;
  for (std::size_t l = 0; l < s.levelsets.size(); ++l)
    for (std::size_t hi = 0; hi < s.h_levels.size(); ++hi)
      for (int o = 0; o < s.offsets; ++o) {
        Case c{l, hi, o, Vec::Zero(s.dim)};
        if (s.offsets > 1) {
          auto rng = case_rng(cfg.seed, {0x0ffULL, l, hi, static_cast<std::uint64_t>(o)});
          std::uniform_real_distribution<double> u(0.0, 1.0);
          for (int a = 0; a < s.dim; ++a) c.shift(a) = u(rng) * s.h_levels[hi];
        }
        cases.push_back(c);
      }
  parallel_for(cases.size(), cfg.threads, [&](std::size_t ci) {
    Case& c = cases[ci];
    const auto t0 = std::chrono::steady_clock::now();
    const double h = s.h_levels[c.hi];
    const ShapePtr shape = shape_from_json(translate_shape_json(s.levelsets[c.ls].shape_doc, c.shift));
    const ComplexPtr bg = build_box_complex(s.box, h, s.dim);
    const ActiveMesh am = build_active_mesh(bg, shape, h);
    c.active = am.complex()->count(s.dim);
    c.cut = static_cast<Index>(am.cut_elements.size());
    c.ghost = static_cast<Index>(am.ghost_facets.size());
    c.warning = am.warning;
    if (do_stab) {
      const StabilizedOps st = assemble_stabilized(am, s.penalty_scale);
      for (int k : s.degrees) {
        const auto ne = norm_equivalence(st, k);
        const auto sp = stabilized_poincare_constant(st, k);
        c.stab.push_back({k, sp.poincare_constant, ne.lower, ne.upper, stabilized_harmonic_basis(st, k).dim()});
      }
    }
    if (do_disc) {
      auto run_one = [&](auto&& omega_complex, auto&& fn) {
        for (int k : s.degrees) {
          auto rng = case_rng(cfg.seed, {0xd15cULL, c.ls, c.hi, static_cast<std::uint64_t>(c.offset), static_cast<std::uint64_t>(k)});
          for (int i = 0; i < s.samples; ++i) {
            const Cochain w = s.datum == "smooth" ? smooth_random_cochain(omega_complex, k, rng)
                                                  : Cochain(k, omega_complex, random_normal(omega_complex->count(k), rng));
            const DiscretePotential dp = fn(w);
            c.disc.push_back({k, i, dp.ratio, dp.identity_residual, dp.extension_ratio});
          }
        }
      };
      if (s.pipeline == "same-grid") {
        ExtensionProblem p(bg, am.active.kept, ExtensionVariant::Mixed);
        const HodgeSolver ks(p.ops_k(), BoundaryCondition::absolute());
        run_one(p.omega_map().child, [&](const Cochain& w) { return discrete_uniform_poincare(p, ks, w); });
      } else {
        const RefinedPotentialPipeline pipe(s.box, h, s.dim, am.active.kept, shape, 2);
        run_one(pipe.coarse_omega.child, [&](const Cochain& w) { return pipe.run(w); });
      }
    }
    c.seconds = seconds_since(t0);
  });

  Table& mt = rep.table("active_meshes", {"levelset", "h", "offset", "shift_x", "shift_y", "active_elements", "cut_elements", "ghost_facets"});
  for (const Case& c : cases) {
    const std::string key = s.levelsets[c.ls].name + " h=" + h_label(s.h_levels[c.hi]) + " offset=" + std::to_string(c.offset);
    rep.timings.push_back({key, c.seconds});
    mt.add(s.levelsets[c.ls].name, s.h_levels[c.hi], c.offset, c.shift(0), c.shift(1), static_cast<long>(c.active), static_cast<long>(c.cut),
           static_cast<long>(c.ghost));
    if (!c.warning.empty()) rep.notes.push_back(key + ": " + c.warning);
  }
  if (do_stab) {
    Table& t = rep.table("stabilized", {"levelset", "h", "offset", "degree", "c_s", "norm_equiv_lower", "norm_equiv_upper", "harmonic_dim"});
    svg::Plot plot;
    plot.file = "stabilized_constant_vs_offset.svg";
    plot.title = "Stabilized Poincare constant vs cut offset";
    plot.xlabel = "offset |shift| / h (dimensionless)";
    plot.ylabel = "C_S (length)";
    plot.style = svg::Style::Markers;
    for (const Case& c : cases)
      for (const StabRow& r : c.stab)
        t.add(s.levelsets[c.ls].name, s.h_levels[c.hi], c.offset, r.degree, r.cs, r.ne_lo, r.ne_hi, static_cast<long>(r.hdim));
    for (std::size_t l = 0; l < s.levelsets.size(); ++l)
      for (int k : s.degrees) {
        const std::string tag = s.levelsets[l].name + ", k=" + std::to_string(k);
        std::vector<double> cs, lo, hi;
        for (std::size_t hidx = 0; hidx < s.h_levels.size(); ++hidx) {
          svg::Series ser{tag + ", h=" + h_label(s.h_levels[hidx]), {}, {}};
          for (const Case& c : cases)
            if (c.ls == l && c.hi == hidx)
              for (const StabRow& r : c.stab)
                if (r.degree == k) {
                  cs.push_back(r.cs);
                  lo.push_back(r.ne_lo);
                  hi.push_back(r.ne_hi);
                  ser.x.push_back(c.shift.norm() / s.h_levels[hidx]);
                  ser.y.push_back(r.cs);
                }
          plot.series.push_back(ser);
        }
        rep.add(assert_lt("C_S spread max/min over offsets and h (" + tag + ")",
                          "stabilized Poincare constant is independent of h and of the cut position", spread(cs),
                          s.tol.at("uniformity_factor")));
        rep.add(assert_gt("min norm-equivalence lower ratio (" + tag + ")", "stabilized norm is equivalent to the L2 norm on the active domain",
                          min_of(lo), 0.0));
        if (s.pin_cs.count(k)) {
          rep.add(assert_ge("min C_S (" + tag + ")", "stabilized Poincare constant stays in its regression interval", min_of(cs), s.pin_cs.at(k).lo));
          rep.add(assert_le("max C_S (" + tag + ")", "stabilized Poincare constant stays in its regression interval", max_of(cs), s.pin_cs.at(k).hi));
        }
        if (s.pin_ne.count(k)) {
          rep.add(assert_ge("min norm-equivalence ratio (" + tag + ")", "norm-equivalence constants stay in their regression interval",
                            min_of(lo), s.pin_ne.at(k).lo));
          rep.add(assert_le("max norm-equivalence ratio (" + tag + ")", "norm-equivalence constants stay in their regression interval",
                            max_of(hi), s.pin_ne.at(k).hi));
        }
        rep.summary["c_s"][tag] = {{"min", min_of(cs)}, {"max", max_of(cs)}};
        rep.summary["norm_equivalence"][tag] = {{"min", min_of(lo)}, {"max", max_of(hi)}};
      }
    rep.plots.push_back(plot);
  }
  if (do_disc) {
    Table& t = rep.table("discrete_poincare", {"levelset", "h", "offset", "degree", "sample", "ratio", "identity_residual", "extension_ratio"});
    Table& lt = rep.table("discrete_poincare_levels", {"levelset", "degree", "h", "max_ratio"});
    svg::Plot plot;
    plot.file = "discrete_poincare_vs_h.svg";
    plot.title = "Discrete potential ratio vs h";
    plot.xlabel = "h (length)";
    plot.ylabel = "max |tau_h| / |d omega_h| (length)";
    plot.logx = true;
    for (const Case& c : cases)
      for (const DiscRow& r : c.disc)
        t.add(s.levelsets[c.ls].name, s.h_levels[c.hi], c.offset, r.degree, r.sample, r.ratio, r.identity, r.ext_ratio);
    for (std::size_t l = 0; l < s.levelsets.size(); ++l)
      for (int k : s.degrees) {
        const std::string tag = s.levelsets[l].name + ", k=" + std::to_string(k);
        svg::Series ser{tag, {}, {}};
        std::vector<double> maxima;
        double identity = 0.0;
        for (std::size_t hidx = 0; hidx < s.h_levels.size(); ++hidx) {
          double m = 0.0;
          for (const Case& c : cases)
            if (c.ls == l && c.hi == hidx)
              for (const DiscRow& r : c.disc)
                if (r.degree == k) {
                  m = std::max(m, r.ratio);
                  identity = std::max(identity, r.identity);
                }
          maxima.push_back(m);
          lt.add(s.levelsets[l].name, k, s.h_levels[hidx], m);
          ser.x.push_back(s.h_levels[hidx]);
          ser.y.push_back(m);
        }
        plot.series.push_back(ser);
        rep.add(assert_le("max |D tau_h - D omega_h| / max |D omega_h| (" + tag + ")", "discrete potential reproduces d omega_h",
                          identity, s.tol.at("identity")));
        rep.add(assert_lt("max ratio spread across h (" + tag + ")", "discrete Poincare constant is uniform in h", spread(maxima),
                          s.tol.at("uniformity_factor")));
      }
    rep.plots.push_back(plot);
  }
  return rep;
}

// --------------------------------------------------------------------------

using Parsed = std::variant<MeshSpec, ExtendSpec, VerifySpec, PoincareSpec, EigenScanSpec, UniformScanSpec, CutfemSpec>;

/// Full validation of the kind-specific part of a config.
inline Parsed parse(const ExperimentConfig& cfg) {
  Reader r(cfg.doc, "config");
  r.allow({"kind", "mode", "seed", "threads", "output", "description", "criterion", "time_limit_seconds"});
  Parsed out;
  if (cfg.kind == "mesh") out = parse_mesh(r);
  else if (cfg.kind == "extend") out = parse_extend(r, cfg);
  else if (cfg.kind == "verify") out = parse_verify(r, cfg.mode);
  else if (cfg.kind == "poincare") out = parse_poincare(r, cfg.mode);
  else if (cfg.kind == "eigen-scan") out = parse_eigen_scan(r);
  else if (cfg.kind == "uniform-scan") out = parse_uniform_scan(r);
  else if (cfg.kind == "cutfem-scan") out = parse_cutfem(r);
  else throw ConfigError("config.kind: unknown kind '" + cfg.kind + "'");
  if (!cfg.mode.empty() && cfg.kind != "verify" && cfg.kind != "poincare")
    throw ConfigError("config.mode is only meaningful for verify and poincare");
  r.finish();
  return out;
}

}  // namespace experiment

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, std::filesystem::path base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.doc = j;
  c.base_dir = std::move(base_dir);
  experiment::Reader r(j, "config");
  c.kind = r.get<std::string>("kind");
  const auto& ks = experiment::kinds();
  if (std::find(ks.begin(), ks.end(), c.kind) == ks.end()) throw ConfigError("config.kind: unknown kind '" + c.kind + "'");
  c.mode = r.get<std::string>("mode", "");
  const auto seed = r.get<std::int64_t>("seed", 1);
  if (seed < 0) throw ConfigError("config.seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.threads = r.count("threads", 1);
  if (r.has("output")) {
    c.output = r.get<std::string>("output");
    if (c.output.is_relative() && !c.base_dir.empty()) c.output = c.base_dir / c.output;
  }
  experiment::parse(c);  // validate now, before any work
  return c;
}

inline ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

/// Runs the configured pipeline. Config errors surface as ConfigError before
/// any computation; solver failures propagate.
inline RunReport run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const experiment::Parsed spec = experiment::parse(cfg);
  RunReport rep = std::visit(
      [&](const auto& s) -> RunReport {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, experiment::MeshSpec>) return experiment::run_mesh(s, cfg);
        else if constexpr (std::is_same_v<T, experiment::ExtendSpec>) return experiment::run_extend(s, cfg);
        else if constexpr (std::is_same_v<T, experiment::VerifySpec>) return experiment::run_verify(s, cfg);
        else if constexpr (std::is_same_v<T, experiment::PoincareSpec>) return experiment::run_poincare(s, cfg);
        else if constexpr (std::is_same_v<T, experiment::EigenScanSpec>) return experiment::run_eigen_scan(s, cfg);
        else if constexpr (std::is_same_v<T, experiment::UniformScanSpec>) return experiment::run_uniform_scan(s, cfg);
        else return experiment::run_cutfem_scan(s, cfg);
      },
      spec);
  rep.kind = cfg.kind;
  rep.config = cfg.doc;
  rep.config["seed"] = cfg.seed;
  rep.seconds = experiment::seconds_since(t0);
  return rep;
}

/// <dir>/<table>.csv, <dir>/<plot>.svg, extra files and <dir>/report.json.
inline void write_artifacts(const RunReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : rep.tables) write_text(dir / (t.name + ".csv"), t.csv());
  for (const auto& p : rep.plots) write_text(dir / p.file, svg::render(p));
  for (const auto& [name, text] : rep.files) write_text(dir / name, text);
  write_text(dir / "report.json", rep.to_json().dump(2) + "\n");
}

}  // namespace cext
