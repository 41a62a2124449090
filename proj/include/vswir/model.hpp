#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace vswir {

/// Channel centers (nm, strictly ascending, within 380..2500) plus a
/// retrieval mask; mask[i] == true means channel i enters the likelihood.
struct WavelengthGrid {
  std::vector<double> wavelengths;
  std::vector<bool> mask;

  WavelengthGrid() = default;
  /// Validates; an empty mask means every channel is retained.
  WavelengthGrid(std::vector<double> wl, std::vector<bool> retained = {});

  std::size_t size() const { return wavelengths.size(); }
  std::size_t retained_count() const;
};

/// x = [refl (n), aod, h2o].
struct StateVector {
  Eigen::VectorXd refl;
  double aod = 0.0;
  double h2o = 0.0;

  Eigen::Index dim() const { return refl.size() + 2; }
  Eigen::VectorXd stacked() const;
  Eigen::Vector2d atm() const { return {aod, h2o}; }
  static StateVector from_stacked(const Eigen::VectorXd& x);
};

/// Path reflectance, spherical albedo and transmission for one atmosphere.
struct AtmSpectra {
  Eigen::VectorXd rho_a;
  Eigen::VectorXd s;
  Eigen::VectorXd t;
  /// The query fell outside the grid and was linearly extrapolated.
  bool extrapolated = false;
};

enum class RangePolicy {
  /// Out-of-grid queries throw DomainError.
  strict,
  /// Out-of-grid queries extend the boundary cell linearly.
  extrapolate,
};

/// Radiative-transfer intermediates on a rectangular (AOD, H2O) grid.
/// Stored channel-fastest: index (ia, ih, ch) -> (ia * n_h2o + ih) * n + ch.
class AtmLookupTable {
 public:
  AtmLookupTable(std::vector<double> aod_grid, std::vector<double> h2o_grid,
                 std::vector<double> wavelengths, std::vector<double> rho_a,
                 std::vector<double> s, std::vector<double> t);

  const std::vector<double>& aod_grid() const { return aod_grid_; }
  const std::vector<double>& h2o_grid() const { return h2o_grid_; }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  std::size_t channels() const { return wavelengths_.size(); }

  std::size_t offset(std::size_t ia, std::size_t ih) const {
    return (ia * h2o_grid_.size() + ih) * channels();
  }
  const std::vector<double>& rho_a() const { return rho_a_; }
  const std::vector<double>& s() const { return s_; }
  const std::vector<double>& t() const { return t_; }

  bool contains(double aod, double h2o) const;

 private:
  std::vector<double> aod_grid_;
  std::vector<double> h2o_grid_;
  std::vector<double> wavelengths_;
  std::vector<double> rho_a_;
  std::vector<double> s_;
  std::vector<double> t_;
};

struct Geometry {
  double cos_solar_zenith = 1.0;
  Eigen::VectorXd solar_irradiance;

  Geometry() = default;
  Geometry(double cos_sza, Eigen::VectorXd e0);
  /// phi0 / pi * e0, the per-channel radiance scale.
  Eigen::VectorXd radiance_scale() const;
};

/// f_refl(x) ~= diag(a_diag) x + b for a fixed atmosphere.
struct LinearSubmodel {
  Eigen::VectorXd a_diag;
  Eigen::VectorXd b;

  Eigen::VectorXd apply(const Eigen::VectorXd& refl) const {
    return (a_diag.array() * refl.array()).matrix() + b;
  }
};

/// Bilinear interpolation of the table at (aod, h2o), per channel.
AtmSpectra interpolate_atm(const AtmLookupTable& lut, double aod, double h2o,
                           RangePolicy policy = RangePolicy::strict);

/// y_i = phi0/pi e0_i [rho_a_i + t_i r_i / (1 - s_i r_i)].
/// Throws SingularityError when any 1 - s_i r_i <= 0.
Eigen::VectorXd radiance(const Eigen::VectorXd& refl, const AtmSpectra& atm, const Geometry& geom);

Eigen::VectorXd forward(const StateVector& state, const AtmLookupTable& lut, const Geometry& geom,
                        RangePolicy policy = RangePolicy::strict);

/// n x (n + 2). Reflectance block analytic (diagonal); the two atmospheric
/// columns by central differences with step 1e-4 * grid span. Under the strict
/// policy the difference goes one-sided at the grid edge.
Eigen::MatrixXd jacobian(const StateVector& state, const AtmLookupTable& lut, const Geometry& geom,
                         RangePolicy policy = RangePolicy::strict);

LinearSubmodel linearize_given_atm(double aod, double h2o, const AtmLookupTable& lut,
                                   const Geometry& geom);

/// Lookup table plus viewing geometry; cheap to copy.
class ForwardModel {
 public:
  ForwardModel(std::shared_ptr<const AtmLookupTable> lut, Geometry geom);

  std::size_t channels() const { return lut_->channels(); }
  const AtmLookupTable& lut() const { return *lut_; }
  const Geometry& geometry() const { return geom_; }
  std::shared_ptr<const AtmLookupTable> lut_ptr() const { return lut_; }

  AtmSpectra atm(double aod, double h2o, RangePolicy policy = RangePolicy::strict) const {
    return interpolate_atm(*lut_, aod, h2o, policy);
  }
  Eigen::VectorXd radiance(const Eigen::VectorXd& refl, const AtmSpectra& atm) const {
    return vswir::radiance(refl, atm, geom_);
  }
  Eigen::VectorXd forward(const StateVector& x, RangePolicy policy = RangePolicy::strict) const {
    return vswir::forward(x, *lut_, geom_, policy);
  }
  Eigen::MatrixXd jacobian(const StateVector& x, RangePolicy policy = RangePolicy::strict) const {
    return vswir::jacobian(x, *lut_, geom_, policy);
  }
  LinearSubmodel linearize(double aod, double h2o) const {
    return linearize_given_atm(aod, h2o, *lut_, geom_);
  }

 private:
  std::shared_ptr<const AtmLookupTable> lut_;
  Geometry geom_;
};

}  // namespace vswir
