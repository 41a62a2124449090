#pragma once

// Scenes shared by the unit and acceptance tests.

#include <memory>

#include "vswir/oe.hpp"
#include "vswir/synthetic.hpp"

namespace fixtures {

using namespace vswir;

/// s = 0 and atmosphere-independent table: radiance = diag(a) r + b exactly.
struct LinearScene {
  RetrievalProblem problem;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

inline LinearScene linear_scene(Eigen::Index n, std::uint64_t seed, double calib = 0.01) {
  const auto grid = make_wavelength_grid(static_cast<std::size_t>(n), {});
  auto lut = std::make_shared<const AtmLookupTable>(synthetic_lut(grid.wavelengths, LutKind::linear));
  ForwardModel model(lut, Geometry(default_cos_solar_zenith(), synthetic_solar_irradiance(grid.wavelengths)));
  const ComponentSet comps = synthetic_components(grid.wavelengths);
  const MixtureComponent& surf = comps.components[0];
  const GaussianPrior prior = assemble_prior(surf, default_atm_mean(), default_atm_cov());
  NoiseModel noise{500.0, calib, {}};
  const auto scene = generate_synthetic_scene(comps, "vegetation", {0.1, 1.0}, noise, seed, model);
  LinearScene out{make_problem(scene.y_obs, grid.mask, prior, noise, model), {}, {}};
  const LinearSubmodel lin = model.linearize(0.1, 1.0);
  out.a = lin.a_diag;
  out.b = lin.b;
  return out;
}

/// Closed-form Gaussian posterior of the reflectance block for a linear scene.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline GaussianPosterior closed_form(const LinearScene& s) {
  const auto& p = s.problem;
  const Eigen::MatrixXd prior = p.prior.refl_cov().values();
  const Eigen::VectorXd w = p.obs.precision();
  const Eigen::MatrixXd info = prior.inverse() + (s.a.array().square() * w.array()).matrix().asDiagonal().toDenseMatrix();
  const Eigen::MatrixXd cov = info.inverse();
  const Eigen::VectorXd rhs =
      prior.inverse() * p.prior.refl_mean() + (s.a.array() * w.array() * (p.obs.radiance - s.b).array()).matrix();
  return {cov * rhs, 0.5 * (cov + cov.transpose())};
}

struct NonlinearScene {
  RetrievalProblem problem;
  StateVector truth;
};

inline NonlinearScene nonlinear_scene(std::size_t n, const Eigen::Vector2d& atm, std::uint64_t seed,
                                      double calib = 0.05, bool noisy = true) {
  const auto grid = make_wavelength_grid(n);
  auto lut = std::make_shared<const AtmLookupTable>(synthetic_lut(grid.wavelengths));
  ForwardModel model(lut, Geometry(default_cos_solar_zenith(), synthetic_solar_irradiance(grid.wavelengths)));
  const ComponentSet comps = synthetic_components(grid.wavelengths);
  const GaussianPrior prior = assemble_prior(comps.components[0], default_atm_mean(), default_atm_cov());
  NoiseModel noise{500.0, calib, {}};
  const auto scene = generate_synthetic_scene(comps, "vegetation", atm, noise, seed, model, noisy);
  return {make_problem(scene.y_obs, grid.mask, prior, noise, model), scene.x_true};
}

}  // namespace fixtures
