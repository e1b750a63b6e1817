// cext: command-line front end of the experiment runner.
//
//   cext <subcommand> [--config FILE] [--out DIR] [--seed N] [--threads N] [subcommand flags]
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid
// config or usage, 3 solver or I/O failure. Errors are printed to stderr as
// a single JSON object {"error": {"type", "message"}}.
#include <cext/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace cext;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config, out, domain, variant, input, convention, levelset, h_levels;
  std::optional<std::int64_t> seed;
  std::optional<int> threads, degree, offsets;
};

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

/// "0.125,1/16,1/32" -> [0.125, 0.0625, 0.03125]
std::vector<double> parse_h_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      const auto slash = tok.find('/');
      out.push_back(slash == std::string::npos ? std::stod(tok) : std::stod(tok.substr(0, slash)) / std::stod(tok.substr(slash + 1)));
    } catch (const std::exception&) {
      throw ConfigError("--h-levels: cannot read '" + tok + "'");
    }
  }
  return out;
}

ExperimentConfig build_config(const std::string& kind, const Options& o) {
  nlohmann::json doc = nlohmann::json::object();
  fs::path base;
  if (!o.config.empty()) {
    doc = read_json(o.config);
    if (!doc.is_object()) throw ConfigError(o.config + ": config must be a JSON object");
    base = fs::path(o.config).parent_path();
    if (doc.contains("kind") && doc["kind"] != kind)
      throw ConfigError("config kind '" + doc["kind"].get<std::string>() + "' does not match subcommand '" + kind + "'");
  }
  doc["kind"] = kind;
  if (!o.domain.empty()) doc["domain"] = read_json(o.domain);
  if (!o.variant.empty()) {
    if (!doc.contains("domain")) throw ConfigError("--variant needs a domain (--domain or config)");
    doc["domain"]["variant"] = o.variant;
  }
  if (o.degree) doc[kind == "extend" ? "degree" : "degrees"] = kind == "extend" ? nlohmann::json(*o.degree) : nlohmann::json::array({*o.degree});
  if (!o.input.empty()) doc["input"] = fs::absolute(o.input).string();
  if (!o.convention.empty()) doc["conventions"] = {o.convention};
  if (!o.levelset.empty()) {
    ShapePtr s;
    try {
      s = shape_from_string(o.levelset);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--levelset: ") + e.what());
    }
    doc["levelsets"] = {{{"name", o.levelset}, {"shape", s->to_json()}}};
    if (!doc.contains("background")) doc["background"] = {{"dim", 2}};
  }
  if (o.offsets) doc["offsets"] = *o.offsets;
  if (!o.h_levels.empty()) doc["h_levels"] = parse_h_list(o.h_levels);
  if (o.seed) doc["seed"] = *o.seed;
  if (o.threads) doc["threads"] = *o.threads;
  ExperimentConfig cfg = ExperimentConfig::from_json(doc, base);
  if (!o.out.empty()) cfg.output = o.out;
  if (cfg.output.empty()) cfg.output = fs::path("cext-out") / kind;
  return cfg;
}

int fail(const std::string& type, const std::string& message, const fs::path& out = {}) {
  const nlohmann::json err{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
  if (!out.empty()) {
    try {
      write_text(out / "error.json", err.dump(2) + "\n");
    } catch (const std::exception&) {
    }
  }
  return type == "config" || type == "usage" ? 2 : 3;
}

int run_subcommand(const std::string& kind, const Options& o) {
  fs::path out = o.out;
  try {
    const ExperimentConfig cfg = build_config(kind, o);
    out = cfg.output;
    const RunReport rep = run(cfg);
    write_artifacts(rep, cfg.output);
    for (const auto& a : rep.assertions)
      std::cout << (a.informational ? "INFO" : a.pass ? "PASS" : "FAIL") << "  " << a.name << ": " << format_double(a.value) << " "
                << a.relation << " " << format_double(a.bound) << (a.informational && !a.pass ? " (does not hold)" : "") << "  [" << a.claim
                << "]\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    std::cout << (rep.pass() ? "result: PASS" : "result: FAIL") << " (" << rep.assertions.size() << " assertions, " << rep.failures()
              << " failed) -> " << cfg.output.string() << std::endl;
    return rep.pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    return fail("config", e.what(), out);
  } catch (const FormatError& e) {
    return fail("format", e.what(), out);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), out);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cochain extension, Hodge decomposition and Poincare constant experiments"};
  app.require_subcommand(1);
  Options o;
  std::string chosen;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed of the random data");
    sub->add_option("--threads", o.threads, "worker threads for independent cases")->check(CLI::PositiveNumber);
    sub->callback([&chosen, sub] { chosen = sub->get_name(); });
  };
  auto* mesh = app.add_subcommand("mesh", "build K, Omega and the exterior and write them as mesh JSON");
  common(mesh);
  mesh->add_option("--domain", o.domain, "domain description (JSON)");

  auto* extend = app.add_subcommand("extend", "extend a cochain from Omega to K");
  common(extend);
  extend->add_option("--domain", o.domain, "domain description (JSON)");
  extend->add_option("--degree", o.degree, "form degree k");
  extend->add_option("--variant", o.variant, "zero-trace | mixed");
  extend->add_option("--input", o.input, "cochain CSV on the Omega mesh (random datum if omitted)");

  auto* verify = app.add_subcommand("verify", "property checks of the extension operator");
  common(verify);

  auto* poincare = app.add_subcommand("poincare", "first eigenvalues and Poincare constants");
  common(poincare);
  poincare->add_option("--domain", o.domain, "domain description (JSON)");
  poincare->add_option("--degree", o.degree, "form degree k");
  poincare->add_option("--convention", o.convention, "neumann | dirichlet");

  auto* eigen = app.add_subcommand("eigen-scan", "eigenvalue scan over scaled domains");
  common(eigen);
  auto* uniform = app.add_subcommand("uniform-scan", "Poincare constants over a family of subdomains of K");
  common(uniform);

  auto* cut = app.add_subcommand("cutfem-scan", "unfitted-mesh stabilized and discrete Poincare sweeps");
  common(cut);
  cut->add_option("--levelset", o.levelset, "circle:cx,cy,r or annulus:cx,cy,r_in,r_out");
  cut->add_option("--offsets", o.offsets, "random cut offsets per level");
  cut->add_option("--h-levels", o.h_levels, "comma-separated mesh sizes, e.g. 1/8,1/16,1/32");
  cut->add_option("--degree", o.degree, "form degree k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }
  return run_subcommand(chosen, o);
}
