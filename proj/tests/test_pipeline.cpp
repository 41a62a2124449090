#include "doctest.h"

#include <fstream>
#include <iterator>

#include "vswir/errors.hpp"
#include "vswir/pipeline.hpp"
#include "vswir/synthetic.hpp"

using namespace vswir;

namespace {

fs::path tmpdir(const std::string& name) {
  const fs::path p = fs::path(VSWIR_TEST_TMP) / "pipeline" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Writes a bundled scene to `dir` and returns a config pointing at it.
RetrievalConfig write_scene(const fs::path& dir, std::size_t n, LutKind kind, double calib) {
  const auto grid = make_wavelength_grid(n, {});
  auto lut = std::make_shared<const AtmLookupTable>(synthetic_lut(grid.wavelengths, kind));
  ForwardModel model(lut, Geometry(default_cos_solar_zenith(), synthetic_solar_irradiance(grid.wavelengths)));
  const auto comps = synthetic_components(grid.wavelengths);
  const auto scene = generate_synthetic_scene(comps, "vegetation", {0.1, 1.5}, {500.0, calib, {}}, 7, model);
  write_lut(dir / "lut.vlut", *lut);
  write_components(dir / "comps.vcmp", comps);
  write_spectrum(dir / "radiance.csv", {grid, scene.y_obs});

  RetrievalConfig cfg;
  cfg.radiance = {dir / "radiance.csv"};
  cfg.lut = dir / "lut.vlut";
  cfg.components = dir / "comps.vcmp";
  cfg.output_dir = dir / "out";
  cfg.calib_frac = calib;
  return cfg;
}

}  // namespace

TEST_CASE("config file parsing") {
  const fs::path dir = tmpdir("config");
  std::ofstream(dir / "a.cfg") << "# scene\n"
                                  "radiance = r1.csv, sub/r2.csv\n"
                                  "lut = /abs/lut.vlut\n"
                                  "snr = 250   # low\n"
                                  "\n"
                                  "atm_prior_mean = 0.1, 2\n"
                                  "mode = oe_only\n"
                                  "refl_proposal = linear_inversion\n"
                                  "snr = 300\n";
  const RetrievalConfig c = load_config(dir / "a.cfg");
  REQUIRE(c.radiance.size() == 2);
  CHECK(c.radiance[1] == dir / "sub/r2.csv");
  CHECK(c.lut == "/abs/lut.vlut");
  CHECK(c.snr == 300.0);
  CHECK(c.atm_prior_mean == Eigen::Vector2d(0.1, 2.0));
  CHECK(c.mode == RunMode::oe_only);
  CHECK(c.mcmc.refl_proposal == ReflProposal::linear_inversion);
  CHECK(config_keys().size() == c.entries().size());

  std::ofstream(dir / "b.cfg") << "snr = 1\nfoo = 2\n";
  std::string msg;
  try {
    load_config(dir / "b.cfg");
  } catch (const InputError& e) {
    msg = e.what();
  }
  CHECK(msg.find(":2:") != std::string::npos);
  CHECK(msg.find("foo") != std::string::npos);

  std::ofstream(dir / "c.cfg") << "snr 5\n";
  CHECK_THROWS_AS(load_config(dir / "c.cfg"), InputError);
  RetrievalConfig d;
  CHECK_THROWS_AS(d.set("thin", "2.5"), InputError);
  CHECK_THROWS_AS(d.set("mode", "fast"), InputError);
  CHECK_THROWS_AS(d.validate(), InputError);
}

TEST_CASE("canonical text and hash") {
  const fs::path dir = tmpdir("hash");
  RetrievalConfig a;
  a.radiance = {"/x/r.csv"};
  a.lut = "/x/lut.vlut";
  a.mcmc.eps2 = 0.0123456789;
  a.output_dir = dir / "out";
  std::ofstream(dir / "c.cfg") << canonical_text(a);
  const RetrievalConfig b = load_config(dir / "c.cfg");
  CHECK(canonical_text(b) == canonical_text(a));
  CHECK(config_hash(b) == config_hash(a));
  CHECK(config_hash(a).size() == 16);

  RetrievalConfig c = a;
  c.output_dir = "elsewhere";
  c.jobs = 4;
  CHECK(config_hash(c) == config_hash(a));
  c.snr = 501;
  CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("oe_only writes no chain") {
  const fs::path dir = tmpdir("oe_only");
  RetrievalConfig cfg = write_scene(dir, 16, LutKind::nonlinear, 0.05);
  cfg.mode = RunMode::oe_only;
  const SceneResult r = run_scene(cfg, 0, "test");
  CHECK(r.oe->converged);
  CHECK(fs::exists(r.out_dir / "manifest.json"));
  CHECK(fs::exists(r.out_dir / "oe.json"));
  CHECK(fs::exists(r.out_dir / "oe.cov.bin"));
  CHECK_FALSE(fs::exists(r.out_dir / "chain.bin"));
  CHECK_FALSE(fs::exists(r.out_dir / "report"));
  CHECK_FALSE(r.chain.has_value());
}

TEST_CASE("grid mismatch is an input error") {
  const fs::path dir = tmpdir("mismatch");
  RetrievalConfig cfg = write_scene(dir, 16, LutKind::nonlinear, 0.05);
  const auto other = make_wavelength_grid(17, {});
  write_lut(dir / "lut.vlut", synthetic_lut(other.wavelengths));
  CHECK_THROWS_AS(prepare_scene(cfg, cfg.radiance[0]), InputError);
}

TEST_CASE("compare on a linear scene and reproducibility") {
  const fs::path dir = tmpdir("compare");
  RetrievalConfig cfg = write_scene(dir, 16, LutKind::linear, 0.01);
  cfg.output_dir = dir / "run1";
  const SceneResult r1 = run_compare(cfg);
  REQUIRE(r1.report.has_value());
  const auto& rep = *r1.report;
  CHECK(rep["schema_version"] == kReportSchemaVersion);
  CHECK(rep["cov_compare"]["d_norm"].get<double>() < 0.1);
  CHECK(rep["cov_compare"]["d_tr"].get<double>() < 0.1);
  for (const auto& f : rep["files"]) CHECK(fs::exists(r1.out_dir / "report" / f.get<std::string>()));

  cfg.output_dir = dir / "run2";
  const SceneResult r2 = run_compare(cfg);
  CHECK(slurp(r1.out_dir / "chain.bin") == slurp(r2.out_dir / "chain.bin"));
  CHECK(slurp(r1.out_dir / "chain.json") == slurp(r2.out_dir / "chain.json"));
  CHECK(slurp(r1.out_dir / "oe.json") == slurp(r2.out_dir / "oe.json"));
  for (const auto& e : fs::directory_iterator(r1.out_dir / "report")) {
    CHECK(slurp(e.path()) == slurp(r2.out_dir / "report" / e.path().filename()));
  }

  const nlohmann::json rebuilt = rebuild_report(cfg, 0);
  CHECK(rebuilt == rep);
}
