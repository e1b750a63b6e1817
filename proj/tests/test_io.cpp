#include <cext/io.hpp>
#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace cext;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cext_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Io, MeshRoundTripKeepsSimplicesAndTags) {
  auto pr = fixtures::split(0.25, fixtures::disk(0.3));
  const auto& c = *pr.omega.child;
  const auto dir = scratch_dir("mesh");
  save_mesh(dir / "omega.json", c);
  auto back = load_mesh(dir / "omega.json");
  ASSERT_EQ(back->dim(), c.dim());
  for (int k = 0; k <= c.dim(); ++k) EXPECT_EQ(back->simplices(k), c.simplices(k));
  EXPECT_EQ(complex_hash(*back), complex_hash(c));
  for (const std::string& l : {kBoundaryLabel, kInterfaceLabel})
    for (int k = 0; k <= c.dim(); ++k) EXPECT_EQ(back->label(l, k), c.label(l, k)) << l << k;
}

TEST(Io, MeshLoaderRejectsInvalidDocuments) {
  const nlohmann::json good = mesh_to_json(*fixtures::square(0.5));
  auto bad = good;
  bad["simplices"]["1"][0] = {3, 1};  // unsorted
  EXPECT_THROW(mesh_from_json(bad), FormatError);
  bad = good;
  bad["simplices"]["1"].erase(0);  // a triangle loses a face
  EXPECT_THROW(mesh_from_json(bad), FormatError);
  bad = good;
  bad["tags"]["patch"] = {{"0", nlohmann::json::array()}, {"1", {0}}, {"2", nlohmann::json::array()}};  // edge without its vertices
  EXPECT_THROW(mesh_from_json(bad), FormatError);
  bad = good;
  bad["vertices"][0] = {0.0};
  EXPECT_THROW(mesh_from_json(bad), FormatError);
  bad = good;
  bad.erase("dim");
  EXPECT_THROW(mesh_from_json(bad), FormatError);
}

TEST(Io, CochainCsvRoundTripIsBitExact) {
  auto c = fixtures::square(0.25);
  std::mt19937_64 rng(1);
  const Cochain a(1, c, random_normal(c->count(1), rng));
  const std::string text = cochain_to_csv(a);
  EXPECT_EQ(text.rfind("# {", 0), 0u);
  const Cochain b = cochain_from_csv(text, c, 1);
  EXPECT_EQ(b.degree, 1);
  EXPECT_TRUE((b.values.array() == a.values.array()).all());
  EXPECT_EQ(cochain_to_csv(b), text);
}

TEST(Io, CochainCsvIntegrityChecks) {
  auto c = fixtures::square(0.25);
  const Cochain a(0, c, Vec::LinSpaced(c->count(0), 0.0, 1.0));
  const std::string text = cochain_to_csv(a);
  EXPECT_THROW(cochain_from_csv(text, fixtures::square(0.5)), FormatError);  // other complex
  EXPECT_THROW(cochain_from_csv(text, c, 1), FormatError);                   // wrong degree
  EXPECT_THROW(cochain_from_csv(text.substr(text.find('\n') + 1), c), FormatError);
  std::string missing = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  EXPECT_THROW(cochain_from_csv(missing, c), FormatError);
  EXPECT_THROW(cochain_from_csv(text + "0,1.0\n", c), FormatError);  // duplicate
  EXPECT_THROW(cochain_to_csv(Cochain::zero(3, c)), std::invalid_argument);
}

TEST(Io, HarmonicExportWritesSidecar) {
  auto pr = fixtures::split(0.125, fixtures::annulus(0.15, 0.4));
  auto ops = assemble(pr.omega.child);
  const auto hb = harmonic_basis(ops, 1);
  ASSERT_EQ(hb.dim(), 1);
  const auto dir = scratch_dir("harmonic");
  const auto side = export_harmonic_basis(dir, "h1", hb);
  EXPECT_EQ(side.at("dim").get<int>(), 1);
  EXPECT_EQ(side.at("variant").get<std::string>(), "absolute");
  EXPECT_LT(side.at("orthonormality_residual").get<double>(), 1e-10);
  const Cochain back = load_cochain(dir / "h1_0.csv", pr.omega.child, 1);
  EXPECT_TRUE((back.values.array() == hb.columns.col(0).array()).all());
  const auto j = nlohmann::json::parse(read_text(dir / "h1.json"));
  EXPECT_EQ(j.at("files").size(), 1u);
}
