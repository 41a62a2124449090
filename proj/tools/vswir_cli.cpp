// vswir: command-line driver for the retrieval library.
//
//   vswir gen-lut   --out lut.vlut [--channels 64] [--linear]
//   vswir gen-scene --lut lut.vlut --out-dir scene [--terrain vegetation] [--aod 0.1] [--h2o 1.5]
//   vswir oe|mcmc|compare|report [--config file] [--<key> value ...]
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vswir/config.hpp"
#include "vswir/errors.hpp"
#include "vswir/io.hpp"
#include "vswir/pipeline.hpp"
#include "vswir/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string dashed(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return s;
}

struct RunArgs {
  std::string config;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config, "key = value configuration file");
  for (const auto& key : vswir::config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + dashed(key.name), [&args, name = key.name](const std::string& v) { args.overrides[name] = v; },
        key.help);
  }
}

vswir::RetrievalConfig resolve_config(const RunArgs& args, std::optional<vswir::RunMode> mode) {
  vswir::RetrievalConfig cfg = args.config.empty() ? vswir::RetrievalConfig{} : vswir::load_config(args.config);
  for (const auto& [k, v] : args.overrides) cfg.set(k, v);
  if (mode) cfg.mode = *mode;
  cfg.validate();
  return cfg;
}

void print_scene(const vswir::SceneResult& r) {
  std::cout << r.out_dir.string() << ": OE " << (r.oe->converged ? "converged" : "stopped") << " after "
            << r.oe->iterations << " iterations (aod " << r.oe->x_map.aod << ", h2o " << r.oe->x_map.h2o << ")";
  if (r.chain) std::cout << "; MCMC acceptance " << r.chain->overall_acceptance();
  if (r.report && !(*r.report)["cov_compare"].is_null()) {
    std::cout << "; d_norm " << (*r.report)["cov_compare"]["d_norm"].get<double>();
  }
  std::cout << "\n";
}

int gen_lut(const std::string& out, std::size_t channels, bool linear) {
  const auto grid = vswir::make_wavelength_grid(channels);
  const auto lut = vswir::synthetic_lut(grid.wavelengths, linear ? vswir::LutKind::linear : vswir::LutKind::nonlinear);
  if (fs::path(out).extension() == ".csv") {
    vswir::write_lut_csv(out, lut);
  } else {
    vswir::write_lut(out, lut);
  }
  std::cout << "wrote " << out << " (" << channels << " channels, " << lut.aod_grid().size() << " x "
            << lut.h2o_grid().size() << " atmosphere grid)\n";
  return 0;
}

struct SceneArgs {
  std::string lut;
  std::string out_dir = "scene";
  std::string terrain = "vegetation";
  double aod = 0.1;
  double h2o = 1.5;
  double snr = 500.0;
  double calib_frac = 0.05;
  double cos_sza = 0.0;
  std::uint64_t seed = 7;
  bool noise_free = false;
};

int gen_scene(const SceneArgs& a) {
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  auto lut = vswir::load_lut(a.lut);
  const auto& wl = lut->wavelengths();
  vswir::WavelengthGrid masked(wl, {});
  // Mask the default bands on the table's own wavelengths.
  for (std::size_t i = 0; i < wl.size(); ++i) {
    for (const auto& [lo, hi] : vswir::default_masked_bands()) {
      if (wl[i] >= lo && wl[i] <= hi) masked.mask[i] = false;
    }
  }
  const double mu0 = a.cos_sza > 0.0 ? a.cos_sza : vswir::default_cos_solar_zenith();
  const Eigen::VectorXd e0 = vswir::synthetic_solar_irradiance(wl);
  vswir::ForwardModel model(lut, vswir::Geometry(mu0, e0));
  const auto comps = vswir::synthetic_components(wl);
  vswir::NoiseModel noise{a.snr, a.calib_frac, {}};
  const auto scene =
      vswir::generate_synthetic_scene(comps, a.terrain, {a.aod, a.h2o}, noise, a.seed, model, !a.noise_free);

  vswir::write_components(dir / "components.vcmp", comps);
  vswir::write_spectrum(dir / "radiance.csv", {masked, scene.y_obs});
  vswir::write_spectrum(dir / "irradiance.csv", {vswir::WavelengthGrid(wl), e0});
  vswir::write_spectrum(dir / "truth_reflectance.csv", {vswir::WavelengthGrid(wl), scene.x_true.refl});
  {
    std::ofstream t(dir / "truth.json");
    t << nlohmann::json{{"terrain", a.terrain},
                        {"aod", a.aod},
                        {"h2o", a.h2o},
                        {"seed", a.seed},
                        {"snr", a.snr},
                        {"calib_frac", a.calib_frac},
                        {"noise_free", a.noise_free}}
             .dump(2)
      << "\n";
  }
  {
    std::ofstream c(dir / "scene.cfg");
    c << "# generated by vswir gen-scene\n"
      << "radiance = radiance.csv\n"
      << "lut = " << fs::absolute(a.lut).string() << "\n"
      << "components = components.vcmp\n"
      << "irradiance = irradiance.csv\n"
      << "output_dir = out\n"
      << "cos_solar_zenith = " << mu0 << "\n"
      << "snr = " << a.snr << "\n"
      << "calib_frac = " << a.calib_frac << "\n"
      << "seed = 1\n";
  }
  std::cout << "wrote scene to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian VSWIR surface reflectance retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vswir::kVersion);

  auto* lut_cmd = app.add_subcommand("gen-lut", "write the synthetic atmospheric lookup table");
  std::string lut_out;
  std::size_t channels = 64;
  bool linear = false;
  lut_cmd->add_option("--out", lut_out, "output path (.vlut container, or .csv)")->required();
  lut_cmd->add_option("--channels", channels, "number of channels over 380-2500 nm")->check(CLI::Range(2, 5000));
  lut_cmd->add_flag("--linear", linear, "s = 0 and an atmosphere-independent table (affine forward model)");

  auto* scene_cmd = app.add_subcommand("gen-scene", "simulate a radiance spectrum from the bundled surfaces");
  SceneArgs sa;
  scene_cmd->add_option("--lut", sa.lut, "lookup table")->required()->check(CLI::ExistingFile);
  scene_cmd->add_option("--out-dir", sa.out_dir, "output directory");
  scene_cmd->add_option("--terrain", sa.terrain, "surface component label (vegetation, soil)");
  scene_cmd->add_option("--aod", sa.aod, "true aerosol optical depth");
  scene_cmd->add_option("--h2o", sa.h2o, "true water vapour column (cm)");
  scene_cmd->add_option("--snr", sa.snr, "signal-to-noise ratio");
  scene_cmd->add_option("--calib-frac", sa.calib_frac, "fractional calibration uncertainty");
  scene_cmd->add_option("--cos-solar-zenith", sa.cos_sza, "cosine of the solar zenith; 0 means cos 30 deg");
  scene_cmd->add_option("--seed", sa.seed, "random seed");
  scene_cmd->add_flag("--noise-free", sa.noise_free, "skip the noise draw");

  RunArgs oe_args, mcmc_args, cmp_args, rep_args;
  auto* oe_cmd = app.add_subcommand("oe", "MAP estimate and Laplace covariance");
  auto* mcmc_cmd = app.add_subcommand("mcmc", "OE followed by the block Metropolis sampler");
  auto* cmp_cmd = app.add_subcommand("compare", "OE, MCMC and the diagnostic report");
  auto* rep_cmd = app.add_subcommand("report", "rebuild reports from existing OE results and chains");
  add_config_flags(oe_cmd, oe_args);
  add_config_flags(mcmc_cmd, mcmc_args);
  add_config_flags(cmp_cmd, cmp_args);
  add_config_flags(rep_cmd, rep_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*lut_cmd) return gen_lut(lut_out, channels, linear);
    if (*scene_cmd) return gen_scene(sa);
    const std::string command = app.get_subcommands().front()->get_name();
    if (*rep_cmd) {
      const auto cfg = resolve_config(rep_args, std::nullopt);
      for (std::size_t k = 0; k < cfg.radiance.size(); ++k) {
        vswir::rebuild_report(cfg, k);
        std::cout << "wrote " << (vswir::scene_dir(cfg, k) / "report").string() << "\n";
      }
      return 0;
    }
    const RunArgs& args = *oe_cmd ? oe_args : *mcmc_cmd ? mcmc_args : cmp_args;
    const vswir::RunMode mode = *oe_cmd     ? vswir::RunMode::oe_only
                                : *mcmc_cmd ? vswir::RunMode::mcmc_only
                                            : vswir::RunMode::compare;
    const auto cfg = resolve_config(args, mode);
    for (const auto& r : vswir::run_batch(cfg, command)) print_scene(r);
    return 0;
  } catch (const vswir::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vswir::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}
