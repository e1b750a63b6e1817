#include <cext/experiment.hpp>
#include <gtest/gtest.h>

#include <cstdlib>

using namespace cext;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cext_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string bin() {
  const char* b = std::getenv("CEXT_BIN");
  return b ? b : "cext";
}

struct CliResult {
  int code = -1;
  std::string out, err;
};

/// Runs the CLI with stdout/stderr captured to files in `dir`.
CliResult cli(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = "\"" + bin() + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
  const int st = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = read_text(o);
  r.err = read_text(e);
  return r;
}

fs::path write_json(const fs::path& p, const nlohmann::json& j) {
  write_text(p, j.dump(1));
  return p;
}

const nlohmann::json kAnnulus = {{"dim", 2},
                                 {"box", {{0, 1}, {0, 1}}},
                                 {"h", 0.125},
                                 {"omega", {{"type", "annulus"}, {"center", {0.5, 0.5}}, {"inner", 0.15}, {"outer", 0.4}}}};

nlohmann::json small_verify() {
  nlohmann::json d = kAnnulus;
  d.erase("h");
  return {{"kind", "verify"}, {"mode", "extension"}, {"seed", 3},      {"domain", d},         {"h_levels", {0.25, 0.125}},
          {"degrees", {0, 1}}, {"samples", 3},       {"variants", {"mixed"}}, {"checks", {"cochain_identity", "gauge"}}};
}

}  // namespace

TEST(Cli, VerifyRunsAndWritesArtifacts) {
  const auto dir = scratch("verify");
  const auto cfg = write_json(dir / "v.json", small_verify());
  const CliResult r = cli("verify --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("result: PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  const auto rep = nlohmann::json::parse(read_text(dir / "out" / "report.json"));
  EXPECT_EQ(rep.at("kind"), "verify");
  EXPECT_TRUE(rep.at("pass").get<bool>());
}

TEST(Cli, RepeatedRunsAndThreadCountsGiveIdenticalCsv) {
  const auto dir = scratch("determinism");
  const auto cfg = write_json(dir / "v.json", small_verify());
  const std::pair<const char*, const char*> runs[] = {{"a", "1"}, {"b", "1"}, {"c", "2"}};
  for (const auto& [name, threads] : runs)
    ASSERT_EQ(cli("verify --config \"" + cfg.string() + "\" --threads " + threads + " --out \"" + (dir / name).string() + "\"", dir).code, 0);
  int csv = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++csv;
    const std::string a = read_text(e.path());
    EXPECT_EQ(a, read_text(dir / "b" / e.path().filename())) << e.path();
    EXPECT_EQ(a, read_text(dir / "c" / e.path().filename())) << e.path();
  }
  EXPECT_GT(csv, 0);
}

TEST(Cli, EmptyDegreeListIsConfigError) {
  const auto dir = scratch("empty_degrees");
  auto j = small_verify();
  j["degrees"] = nlohmann::json::array();
  const auto cfg = write_json(dir / "v.json", j);
  const CliResult r = cli("verify --config \"" + cfg.string() + "\" --out \"" + (dir / "out").string() + "\"", dir);
  EXPECT_EQ(r.code, 2);
  const auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err.at("error").at("type"), "config");
  EXPECT_NE(err.at("error").at("message").get<std::string>().find("degrees"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "error.json"));
}

TEST(Cli, KindMismatchAndUnknownKeysAreRejected) {
  const auto dir = scratch("reject");
  const auto cfg = write_json(dir / "v.json", small_verify());
  EXPECT_EQ(cli("poincare --config \"" + cfg.string() + "\"", dir).code, 2);
  auto j = small_verify();
  j["sampels"] = 3;
  const auto typo = write_json(dir / "typo.json", j);
  const CliResult r = cli("verify --config \"" + typo.string() + "\"", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sampels"), std::string::npos);
  write_text(dir / "broken.json", "{\"kind\": ");
  EXPECT_EQ(cli("verify --config \"" + (dir / "broken.json").string() + "\"", dir).code, 2);
  EXPECT_EQ(cli("no-such-command", dir).code, 2);
}

TEST(Cli, ExtendReadsItsOwnCochainDump) {
  const auto dir = scratch("extend");
  const auto dom = write_json(dir / "domain.json", kAnnulus);
  const fs::path first = dir / "first", second = dir / "second";
  ASSERT_EQ(cli("extend --domain \"" + dom.string() + "\" --degree 1 --variant zero-trace --out \"" + first.string() + "\"", dir).code, 0);
  const CliResult r = cli("extend --domain \"" + dom.string() + "\" --degree 1 --variant zero-trace --input \"" + (first / "omega.csv").string() +
                        "\" --out \"" + second.string() + "\"",
                    dir);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(read_text(first / "extended.csv"), read_text(second / "extended.csv"));
  // The mesh written next to the dump is the one the dump was hashed against.
  const auto om = load_mesh(first / "omega.mesh.json");
  EXPECT_NO_THROW(load_cochain(first / "omega.csv", om, 1));

  // A dump of the wrong degree is a format error.
  const CliResult bad = cli("extend --domain \"" + dom.string() + "\" --degree 0 --input \"" + (first / "omega.csv").string() + "\" --out \"" +
                          (dir / "bad").string() + "\"",
                      dir);
  EXPECT_EQ(bad.code, 3);
  EXPECT_EQ(nlohmann::json::parse(bad.err).at("error").at("type"), "format");
}

TEST(Cli, CutfemFlagsBuildAConfig) {
  const auto dir = scratch("cutfem");
  const CliResult r = cli("cutfem-scan --levelset circle:0.5,0.5,0.3 --h-levels 1/4,1/8 --degree 0 --offsets 2 --out \"" + (dir / "out").string() + "\"", dir);
  ASSERT_TRUE(r.code == 0 || r.code == 1) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "stabilized.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "stabilized_constant_vs_offset.svg"));
  EXPECT_EQ(cli("cutfem-scan --levelset circle:0.5,0.5 --out \"" + (dir / "x").string() + "\"", dir).code, 2);
  EXPECT_EQ(cli("cutfem-scan --levelset circle:0.5,0.5,0.3 --h-levels 1/0x --out \"" + (dir / "y").string() + "\"", dir).code, 2);
}

TEST(Config, ValidationHappensBeforeAnyWork) {
  auto j = small_verify();
  EXPECT_NO_THROW(ExperimentConfig::from_json(j));
  j["checks"] = {"gauge", "colour"};
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = small_verify();
  j["h_levels"] = {0.125, -1.0};
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = small_verify();
  j["kind"] = "oracle";
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = small_verify();
  j["domain"]["omega"] = {{"type", "hexagon"}};
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
  j = {{"kind", "poincare"}, {"mode", "constants"}, {"domain", kAnnulus}, {"degrees", {3}}};
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  const char* src = std::getenv("CEXT_SOURCE_DIR");
  if (!src) GTEST_SKIP() << "CEXT_SOURCE_DIR not set";
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(fs::path(src) / "configs")) {
    if (e.path().extension() != ".json") continue;
    const auto j = nlohmann::json::parse(read_text(e.path()));
    if (j.value("kind", "") == "oracle") continue;  // run by the acceptance harness
    EXPECT_NO_THROW(ExperimentConfig::load(e.path())) << e.path();
    ++n;
  }
  EXPECT_GT(n, 0);
}

TEST(Svg, SinglePointEmptySeriesAndNoData) {
  svg::Plot p;
  p.title = "t";
  p.series = {{"one", {1.0}, {2.0}}, {"empty", {}, {}}};
  const std::string s = svg::render(p);
  EXPECT_EQ(s.find("<polyline"), std::string::npos);
  EXPECT_NE(s.find("<circle"), std::string::npos);
  EXPECT_NE(s.find("skipped empty series 'empty'"), std::string::npos);

  p.series = {};
  EXPECT_NE(svg::render(p).find("no data"), std::string::npos);

  p.logy = true;
  p.series = {{"mixed", {1.0, 2.0, 3.0}, {1.0, 0.0, std::nan("")}}};
  const std::string l = svg::render(p);
  EXPECT_NE(l.find("2 point(s) of 'mixed'"), std::string::npos);
  EXPECT_EQ(l.find("nan"), std::string::npos);
}

TEST(Svg, BarsAndEscaping) {
  svg::Plot p;
  p.style = svg::Style::Bars;
  p.title = "a < b & c";
  p.categories = {"k=0", "k=1"};
  p.series = {{"C_P", {0, 1}, {0.3, 0.1}}, {"C_P0", {0, 1}, {0.2, 0.25}}};
  const std::string s = svg::render(p);
  EXPECT_NE(s.find("a &lt; b &amp; c"), std::string::npos);
  std::size_t rects = 0;
  for (std::size_t at = s.find("<rect"); at != std::string::npos; at = s.find("<rect", at + 1)) ++rects;
  EXPECT_EQ(rects, 2u + 4u + 2u);  // background, frame, bars, legend keys
}
