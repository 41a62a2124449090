#pragma once

// End-to-end driver: load inputs, run OE and MCMC, write chains, reports and
// a manifest.
//
// Output layout for one scene (the scene directory is output_dir itself for
// a single radiance file, output_dir/<radiance stem> for a batch):
//   manifest.json          config hash, seed, versions, canonical config
//   oe.json, oe.cov.bin    OE result
//   chain.bin, chain.json  MCMC chain (not in oe_only mode)
//   report/                report.json plus per-figure CSV files (compare mode)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vswir/config.hpp"
#include "vswir/io.hpp"
#include "vswir/mcmc.hpp"
#include "vswir/oe.hpp"

namespace vswir {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

struct PreparedScene {
  RetrievalProblem problem;
  WavelengthGrid grid;
  std::string component_label;
  std::vector<std::size_t> degenerate_channels;
};

/// Loads the LUT, irradiance, components and one radiance file, selects the
/// surface component and builds the noise model. Throws InputError when the
/// files disagree on wavelengths.
PreparedScene prepare_scene(const RetrievalConfig& cfg, const std::filesystem::path& radiance_path);

/// Crude reflectance guess (y - b) / a at the prior-mean atmosphere, used to
/// pick the surface component. Channels with negligible transmission take
/// the average component mean.
Eigen::VectorXd first_guess_reflectance(const Eigen::VectorXd& y, const ForwardModel& model,
                                        const Eigen::Vector2d& atm, const ComponentSet& components);

struct SceneResult {
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  /// Set once the optimizer has returned.
  std::optional<OeResult> oe;
  std::optional<Chain> chain;
  std::optional<nlohmann::json> report;
};

/// Runs scene `index` of cfg.radiance according to cfg.mode with seed
/// cfg.mcmc.seed + index.
SceneResult run_scene(const RetrievalConfig& cfg, std::size_t index, const std::string& command);

/// All scenes, cfg.jobs at a time. The first failure is rethrown after every
/// scene has finished; artifacts of completed scenes stay on disk.
std::vector<SceneResult> run_batch(const RetrievalConfig& cfg, const std::string& command);

/// Compare mode for the first radiance file.
SceneResult run_compare(const RetrievalConfig& cfg);

/// Diagnostics from a finished OE result and chain; writes report/ under
/// `scene_dir` and returns report.json's contents.
nlohmann::json write_report(const std::filesystem::path& scene_dir, const PreparedScene& scene,
                            const OeResult& oe, const Chain& chain);

/// Rebuilds the report from oe.* and chain.* already in the scene directory.
nlohmann::json rebuild_report(const RetrievalConfig& cfg, std::size_t index);

std::filesystem::path scene_dir(const RetrievalConfig& cfg, std::size_t index);

void write_manifest(const std::filesystem::path& dir, const RetrievalConfig& cfg, const std::string& command,
                    std::uint64_t seed);

}  // namespace vswir
