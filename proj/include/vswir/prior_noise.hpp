#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vswir/linalg_spd.hpp"
#include "vswir/model.hpp"

namespace vswir {

/// One Gaussian component of the surface-reflectance mixture.
struct MixtureComponent {
  Eigen::VectorXd mean;
  SpdMatrix cov;
  std::string label;
};

/// N([mu_refl, mu_atm], blockdiag(G_refl, G_atm)). The surface and
/// atmosphere blocks are independent; the cross block is exactly zero.
class GaussianPrior {
 public:
  GaussianPrior(Eigen::VectorXd refl_mean, SpdMatrix refl_cov, Eigen::Vector2d atm_mean,
                SpdMatrix atm_cov);

  Eigen::Index refl_dim() const { return refl_mean_.size(); }
  Eigen::Index dim() const { return refl_mean_.size() + 2; }

  /// Full (n+2) mean.
  Eigen::VectorXd mean() const;
  /// Full (n+2) x (n+2) block-diagonal covariance.
  SpdMatrix cov() const;

  const Eigen::VectorXd& refl_mean() const { return refl_mean_; }
  const Eigen::Vector2d& atm_mean() const { return atm_mean_; }
  const SpdMatrix& refl_cov() const { return refl_cov_; }
  const SpdMatrix& atm_cov() const { return atm_cov_; }

  /// Mahalanobis terms (x - mu)^T G^{-1} (x - mu) per block.
  double refl_quad(const Eigen::VectorXd& refl) const;
  double atm_quad(const Eigen::Vector2d& atm) const;

  double log_det() const { return refl_cov_.log_det() + atm_cov_.log_det(); }

 private:
  Eigen::VectorXd refl_mean_;
  SpdMatrix refl_cov_;
  Eigen::Vector2d atm_mean_;
  SpdMatrix atm_cov_;
};

/// Instrument, calibration and model-error terms of the observation noise.
struct NoiseModel {
  double snr = 500.0;
  double calib_frac = 0.01;
  /// Per-channel systematic model-error variance; empty means zero.
  Eigen::VectorXd rt_model_var;
};

/// Added to every observation variance so zero-signal channels stay finite.
inline constexpr double kVarianceFloor = 1e-12;

/// Diagonal observation covariance.
struct ObservationCovariance {
  Eigen::VectorXd variance;
  /// Channels whose variance was zero before the floor was added.
  std::vector<std::size_t> degenerate_channels;
};

/// Observed radiance with its fixed noise covariance and channel mask.
/// Masked channels are reported but contribute nothing to the likelihood.
struct Observation {
  Eigen::VectorXd radiance;
  Eigen::VectorXd variance;
  std::vector<bool> retained;

  Observation(Eigen::VectorXd y, Eigen::VectorXd var, std::vector<bool> mask = {});

  /// 1 / variance on retained channels, 0 on masked ones.
  const Eigen::VectorXd& precision() const { return precision_; }
  /// (y - f)^T W (y - f) with W = precision().
  double misfit(const Eigen::VectorXd& predicted) const;

 private:
  Eigen::VectorXd precision_;
};

/// argmin_k (x0 - mu_k)^T G_k^{-1} (x0 - mu_k); ties go to the lowest index.
const MixtureComponent& select_component(const std::vector<MixtureComponent>& components,
                                         const Eigen::VectorXd& x0);

/// Mahalanobis distance squared of x0 from one component.
double mahalanobis_sq(const MixtureComponent& component, const Eigen::VectorXd& x0);

/// G_obs,ii = (y_i / snr)^2 + (calib_frac y_i)^2 + rt_model_var_i + floor.
ObservationCovariance build_noise_cov(const Eigen::VectorXd& y_obs, const NoiseModel& noise);

GaussianPrior assemble_prior(const MixtureComponent& surface, const Eigen::Vector2d& atm_mean,
                             const SpdMatrix& atm_cov);

/// Normalized log density:
///   -1/2 (x - mu)^T G^{-1} (x - mu) - 1/2 log((2 pi)^(n+2) det G).
double log_prior(const StateVector& state, const GaussianPrior& prior);

/// Atmospheric prior defaults: wide, centred on a moderate atmosphere.
inline Eigen::Vector2d default_atm_mean() { return {0.2, 1.5}; }
inline SpdMatrix default_atm_cov() { return SpdMatrix::identity(2); }

}  // namespace vswir
