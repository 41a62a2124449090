#pragma once

// Bundled synthetic inputs: a smooth analytic atmosphere tabulated on an
// (AOD, H2O) grid, a blackbody-shaped solar spectrum, two surface classes,
// and a scene generator.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vswir/io.hpp"
#include "vswir/model.hpp"
#include "vswir/prior_noise.hpp"

namespace vswir {

/// Deep water-vapour bands excluded from the likelihood by default (nm).
std::vector<std::pair<double, double>> default_masked_bands();

/// n channels evenly spaced over [380, 2500] nm; channels inside any band
/// are masked.
WavelengthGrid make_wavelength_grid(std::size_t n,
                                    const std::vector<std::pair<double, double>>& masked = default_masked_bands());

std::vector<double> default_aod_grid();
std::vector<double> default_h2o_grid();

enum class LutKind {
  /// Full analytic atmosphere, nonlinear in reflectance through s.
  nonlinear,
  /// s = 0 and rho_a, t frozen at a reference atmosphere: radiance is affine
  /// in reflectance and independent of (AOD, H2O).
  linear,
};

/// Analytic two-stream-like atmosphere. Per channel at wavelength l (nm),
/// with Rayleigh depth 0.0088 (l/1000)^-4.05, aerosol depth
/// aod (l/550)^-1.3 and water absorption k_w(l) h2o (Gaussian bands at 720,
/// 820, 940, 1140, 1380 and 1880 nm), transmission decays exponentially
/// with the total depth along a two-way air mass of 2.15; rho_a grows with
/// the scattering depths; s = 0.29 (1 - exp(-scattering depth)).
AtmLookupTable synthetic_lut(const std::vector<double>& wavelengths, LutKind kind = LutKind::nonlinear,
                             const std::vector<double>& aod_grid = default_aod_grid(),
                             const std::vector<double>& h2o_grid = default_h2o_grid());

/// 5778 K blackbody shape scaled to 190 at 500 nm.
Eigen::VectorXd synthetic_solar_irradiance(const std::vector<double>& wavelengths);

/// cos(30 deg).
double default_cos_solar_zenith();

/// "vegetation" and "soil" mean spectra with covariance
///   C_ij = sd_i sd_j exp(-(l_i - l_j)^2 / (2 ell^2)) + nugget delta_ij,
/// sd_i = rel_sd * mean_i + abs_sd. Parameters are recorded in the set.
ComponentSet synthetic_components(const std::vector<double>& wavelengths);

struct SyntheticScene {
  Eigen::VectorXd y_obs;
  StateVector x_true;
  /// Noise-free forward radiance at x_true.
  Eigen::VectorXd y_clean;
};

/// Draws the surface from the named component (clipped to [0, 1]),
/// evaluates the forward model and adds N(0, build_noise_cov(y_clean)) noise.
SyntheticScene generate_synthetic_scene(const ComponentSet& components, const std::string& terrain,
                                        const Eigen::Vector2d& atm_true, const NoiseModel& noise,
                                        std::uint64_t seed, const ForwardModel& model, bool add_noise = true);

}  // namespace vswir
