#pragma once

// File formats: lookup tables, mixture components, spectra, chains and OE
// results. Binary formats are little-endian float64.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vswir/mcmc.hpp"
#include "vswir/model.hpp"
#include "vswir/oe.hpp"
#include "vswir/prior_noise.hpp"

namespace vswir {

namespace fs = std::filesystem;

// --- lookup table -----------------------------------------------------------
// Container magic "VSWIRLUT". Arrays: wavelengths [n], aod_grid [na],
// h2o_grid [nh], rho_a / s / t with shape [na, nh, n] column-major, so the
// AOD index varies fastest: element (ia, ih, c) sits at ia + na * (ih + nh * c).

void write_lut(const fs::path& path, const AtmLookupTable& lut);
std::shared_ptr<const AtmLookupTable> read_lut(const fs::path& path);

/// CSV with header `aod,h2o,wavelength_nm,rho_a,s,t`, one row per grid node
/// and channel in any order. The grid must be complete.
std::shared_ptr<const AtmLookupTable> read_lut_csv(const fs::path& path);
void write_lut_csv(const fs::path& path, const AtmLookupTable& lut);

/// Dispatches on the extension: ".csv" reads CSV, anything else the container.
std::shared_ptr<const AtmLookupTable> load_lut(const fs::path& path);

// --- mixture components -----------------------------------------------------
// Container magic "VSWIRCMP". Header "components": list of {label, params}.
// Arrays: wavelengths [n], then per component k: mean_k [n] and cov_lower_k
// [n (n + 1) / 2], the lower triangle packed row by row
// ((0,0), (1,0), (1,1), (2,0), ...).

struct ComponentSet {
  std::vector<double> wavelengths;
  std::vector<MixtureComponent> components;
  /// Free-form generator parameters per component, stored in the header.
  std::vector<nlohmann::json> params;

  const MixtureComponent& by_label(const std::string& label) const;
};

void write_components(const fs::path& path, const ComponentSet& set);
ComponentSet read_components(const fs::path& path);

// --- spectra ----------------------------------------------------------------
// Two-column CSV `wavelength_nm,value` with a header line. The optional mask
// sidecar `<stem>.mask.csv` has header `wavelength_nm,retained` and 0/1
// values on the same wavelengths.

struct Spectrum {
  WavelengthGrid grid;
  Eigen::VectorXd values;
};

fs::path mask_sidecar_path(const fs::path& spectrum_path);
Spectrum load_spectrum(const fs::path& path);
/// Values are written with 17 significant digits, so a round trip is exact.
/// The sidecar is written only when some channel is masked.
void write_spectrum(const fs::path& path, const Spectrum& spectrum);

// --- chains -----------------------------------------------------------------
// `<stem>.bin`: kept x (n + 2) float64, row-major. `<stem>.json`: dims, seed,
// full sampler config, acceptance tallies, initial state, and the
// log-posterior trace.

void write_chain(const fs::path& stem, const Chain& chain);
Chain read_chain(const fs::path& stem);
/// Header refl_0 .. refl_{n-1}, aod, h2o.
void write_chain_csv(const fs::path& path, const Eigen::MatrixXd& samples);
Eigen::MatrixXd read_chain_csv(const fs::path& path);

nlohmann::json to_json(const McmcConfig& cfg);

// --- OE results -------------------------------------------------------------
// `<stem>.json` (MAP, convergence, cost trace) + `<stem>.cov.bin`, the
// (n + 2)^2 Laplace covariance, row-major.

void write_oe_result(const fs::path& stem, const OeResult& result);
OeResult read_oe_result(const fs::path& stem);

}  // namespace vswir
