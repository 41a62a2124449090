#pragma once

// Retrieval configuration and its key-value text format.
//
//   # comment
//   key = value
//
// One setting per line; blank lines and text after '#' are ignored; later
// lines override earlier ones. Lists are comma-separated. Relative paths are
// resolved against the directory of the config file. See config_keys() for
// the accepted keys.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vswir/mcmc.hpp"
#include "vswir/prior_noise.hpp"

namespace vswir {

enum class RunMode { oe_only, mcmc_only, compare };
std::string to_string(RunMode m);

struct RetrievalConfig {
  std::vector<std::filesystem::path> radiance;
  std::filesystem::path lut;
  std::filesystem::path components;
  /// Solar irradiance spectrum; the synthetic blackbody when empty.
  std::filesystem::path irradiance;
  std::filesystem::path output_dir = "out";

  double cos_solar_zenith = 0.0;  // 0 selects the default (cos 30 deg)

  double snr = 500.0;
  double calib_frac = 0.01;
  double rt_model_var = 0.0;

  Eigen::Vector2d atm_prior_mean{0.2, 1.5};
  Eigen::Vector2d atm_prior_var{1.0, 1.0};
  /// Force a surface component by label instead of the nearest one.
  std::string component;

  int oe_max_iterations = 200;

  McmcConfig mcmc{.n_samples = 200'000, .burn_in = 20'000};
  /// Bisect the reflectance proposal scale to this overall acceptance rate
  /// before the production chain; 0 disables tuning.
  double tune_target = 0.0;

  RunMode mode = RunMode::compare;
  int jobs = 1;

  /// Sets one key from its text value. Throws InputError on unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});
  /// Every key with its canonical text value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Throws InputError when a required path is missing or a value is out of range.
  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};
const std::vector<ConfigKey>& config_keys();

RetrievalConfig load_config(const std::filesystem::path& path);
/// The key = value text for entries(); parses back to the same config.
std::string canonical_text(const RetrievalConfig& cfg);
/// 64-bit FNV-1a of canonical_text with output_dir and jobs blanked, as 16
/// hex digits.
std::string config_hash(const RetrievalConfig& cfg);

}  // namespace vswir
