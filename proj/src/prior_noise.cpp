#include "vswir/prior_noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "vswir/errors.hpp"

namespace vswir {

GaussianPrior::GaussianPrior(Eigen::VectorXd refl_mean, SpdMatrix refl_cov,
                             Eigen::Vector2d atm_mean, SpdMatrix atm_cov)
    : refl_mean_(std::move(refl_mean)),
      refl_cov_(std::move(refl_cov)),
      atm_mean_(atm_mean),
      atm_cov_(std::move(atm_cov)) {
  if (refl_cov_.dim() != refl_mean_.size()) throw InputError("surface prior dimension mismatch");
  if (atm_cov_.dim() != 2) throw InputError("atmospheric prior covariance must be 2x2");
}

Eigen::VectorXd GaussianPrior::mean() const {
  Eigen::VectorXd m(dim());
  m << refl_mean_, atm_mean_;
  return m;
}

SpdMatrix GaussianPrior::cov() const {
  const Eigen::Index n = refl_dim();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 2, n + 2);
  c.topLeftCorner(n, n) = refl_cov_.values();
  c.bottomRightCorner(2, 2) = atm_cov_.values();
  return SpdMatrix(std::move(c), "prior covariance");
}

double GaussianPrior::refl_quad(const Eigen::VectorXd& refl) const {
  return refl_cov_.quad_form(refl - refl_mean_);
}

double GaussianPrior::atm_quad(const Eigen::Vector2d& atm) const {
  return atm_cov_.quad_form(atm - atm_mean_);
}

Observation::Observation(Eigen::VectorXd y, Eigen::VectorXd var, std::vector<bool> mask)
    : radiance(std::move(y)), variance(std::move(var)), retained(std::move(mask)) {
  const Eigen::Index n = radiance.size();
  if (variance.size() != n) throw InputError("observation variance length mismatch");
  if (retained.empty()) retained.assign(static_cast<std::size_t>(n), true);
  if (static_cast<Eigen::Index>(retained.size()) != n) throw InputError("mask length mismatch");
  precision_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(variance[i] > 0.0)) throw InputError("observation variance must be positive");
    precision_[i] = retained[static_cast<std::size_t>(i)] ? 1.0 / variance[i] : 0.0;
  }
}

double Observation::misfit(const Eigen::VectorXd& predicted) const {
  return ((radiance - predicted).array().square() * precision_.array()).sum();
}

double mahalanobis_sq(const MixtureComponent& component, const Eigen::VectorXd& x0) {
  if (component.mean.size() != x0.size()) {
    throw InputError("component '" + component.label + "' dimension differs from state");
  }
  return component.cov.quad_form(x0 - component.mean);
}

const MixtureComponent& select_component(const std::vector<MixtureComponent>& components,
                                         const Eigen::VectorXd& x0) {
  if (components.empty()) throw InputError("select_component: no mixture components");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double d = mahalanobis_sq(components[k], x0);
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return components[best];
}

ObservationCovariance build_noise_cov(const Eigen::VectorXd& y_obs, const NoiseModel& noise) {
  if (!(noise.snr > 0.0) || !(noise.calib_frac >= 0.0)) {
    throw InputError("noise model needs snr > 0 and calib_frac >= 0");
  }
  const Eigen::Index n = y_obs.size();
  if (noise.rt_model_var.size() != 0 && noise.rt_model_var.size() != n) {
    throw InputError("rt_model_var length differs from radiance length");
  }
  ObservationCovariance out;
  out.variance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = y_obs[i];
    if (!std::isfinite(y)) throw InputError("radiance channel " + std::to_string(i) + " not finite");
    const double rt = noise.rt_model_var.size() ? noise.rt_model_var[i] : 0.0;
    if (rt < 0.0) throw InputError("rt_model_var must be nonnegative");
    const double photon = y / noise.snr;
    const double calib = noise.calib_frac * y;
    const double v = photon * photon + calib * calib + rt;
    if (v == 0.0) out.degenerate_channels.push_back(static_cast<std::size_t>(i));
    out.variance[i] = v + kVarianceFloor;
  }
  return out;
}

GaussianPrior assemble_prior(const MixtureComponent& surface, const Eigen::Vector2d& atm_mean,
                             const SpdMatrix& atm_cov) {
  return GaussianPrior(surface.mean, surface.cov, atm_mean, atm_cov);
}

double log_prior(const StateVector& state, const GaussianPrior& prior) {
  if (state.refl.size() != prior.refl_dim()) throw InputError("log_prior: dimension mismatch");
  const double quad = prior.refl_quad(state.refl) + prior.atm_quad(state.atm());
  const double d = static_cast<double>(prior.dim());
  return -0.5 * quad - 0.5 * (d * std::log(2.0 * std::numbers::pi) + prior.log_det());
}

}  // namespace vswir
