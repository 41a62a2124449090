#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "vswir/errors.hpp"
#include "vswir/oe.hpp"

using namespace vswir;

TEST_CASE("cost is the negative log posterior up to a constant") {
  const auto s = fixtures::nonlinear_scene(24, {0.2, 1.5}, 3);
  const auto& p = s.problem;
  StateVector x = s.truth;
  const Eigen::VectorXd r = x.stacked() - p.prior.mean();
  const Eigen::VectorXd f = p.model.forward(x);
  double misfit = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (p.obs.retained[static_cast<std::size_t>(i)]) misfit += std::pow(p.obs.radiance[i] - f[i], 2) / p.obs.variance[i];
  }
  const double ref = 0.5 * (r.dot(p.prior.cov().inverse() * r) + misfit);
  CHECK(cost(x, p) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("cost gradient against finite differences") {
  const auto s = fixtures::nonlinear_scene(12, {0.25, 1.7}, 5);
  StateVector x = s.truth;
  x.aod = 0.27;
  x.h2o = 1.62;
  const Eigen::VectorXd g = cost_gradient(x, s.problem);
  const Eigen::VectorXd xs = x.stacked();
  for (Eigen::Index k = 0; k < xs.size(); ++k) {
    const double h = k < 12 ? 1e-6 : 1e-5;
    Eigen::VectorXd p = xs, m = xs;
    p[k] += h;
    m[k] -= h;
    const double fd = (cost(StateVector::from_stacked(p), s.problem) - cost(StateVector::from_stacked(m), s.problem)) / (2 * h);
    CHECK(g[k] == doctest::Approx(fd).epsilon(2e-3).scale(1e-3 * g.norm()));
  }
}

TEST_CASE("linear-Gaussian MAP and Laplace covariance equal the closed form") {
  const auto s = fixtures::linear_scene(12, 17);
  const auto ref = fixtures::closed_form(s);
  const OeResult r = solve_map(s.problem);
  CHECK(r.converged);
  const Eigen::Index n = 12;
  CHECK((r.x_map.refl - ref.mean).norm() <= 1e-8 * ref.mean.norm());
  CHECK(r.x_map.aod == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.x_map.h2o == doctest::Approx(1.5).epsilon(1e-12));
  const Eigen::MatrixXd g = r.gamma_laplace.values();
  CHECK((g.topLeftCorner(n, n) - ref.cov).norm() <= 1e-10 * ref.cov.norm());
  CHECK((g.bottomRightCorner(2, 2) - Eigen::Matrix2d::Identity()).norm() <= 1e-10);
  CHECK(g.topRightCorner(n, 2).norm() <= 1e-12);
  // The same posterior from the conditional-linear formula.
  const SpdMatrix lin = linear_posterior_cov(s.a, s.problem.prior.refl_cov(), s.problem.obs.variance, s.problem.obs.retained);
  CHECK((lin.values() - ref.cov).norm() <= 1e-10 * ref.cov.norm());
}

TEST_CASE("masked channels do not influence the MAP") {
  auto s = fixtures::nonlinear_scene(32, {0.2, 1.5}, 8);
  const OeResult a = solve_map(s.problem);
  RetrievalProblem p2 = s.problem;
  Eigen::VectorXd y = p2.obs.radiance;
  Eigen::Index masked = -1;
  for (std::size_t i = 0; i < p2.obs.retained.size(); ++i) {
    if (!p2.obs.retained[i]) masked = static_cast<Eigen::Index>(i);
  }
  REQUIRE(masked >= 0);
  y[masked] *= 3.0;
  p2.obs = Observation(y, p2.obs.variance, p2.obs.retained);
  const OeResult b = solve_map(p2);
  CHECK((a.x_map.stacked() - b.x_map.stacked()).norm() < 1e-12);
}

TEST_CASE("zero-noise scene with a wide prior") {
  const auto grid = make_wavelength_grid(64);
  auto lut = std::make_shared<const AtmLookupTable>(synthetic_lut(grid.wavelengths));
  ForwardModel model(lut, Geometry(default_cos_solar_zenith(), synthetic_solar_irradiance(grid.wavelengths)));
  const ComponentSet comps = synthetic_components(grid.wavelengths);
  NoiseModel noise{500.0, 0.0, {}};
  const auto scene = generate_synthetic_scene(comps, "vegetation", {0.3, 2.0}, noise, 4, model, false);
  // Wide surface prior: the component covariance inflated 100x.
  const MixtureComponent wide{comps.components[0].mean, comps.components[0].cov.scaled(100.0), "wide"};
  const GaussianPrior prior = assemble_prior(wide, default_atm_mean(), default_atm_cov());
  const RetrievalProblem p = make_problem(scene.y_obs, grid.mask, prior, noise, model);
  const OeResult r = solve_map(p);
  CHECK(r.converged);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.mask[i]) worst = std::max(worst, std::abs(r.x_map.refl[static_cast<Eigen::Index>(i)] - scene.x_true.refl[static_cast<Eigen::Index>(i)]));
  }
  // n data for n + 2 unknowns: aerosol trades against a smooth reflectance
  // offset, so the MAP need only fit at least as well as the truth.
  CHECK(cost(r.x_map, p) <= cost(scene.x_true, p));
  CHECK(worst < 0.02);
  CHECK(r.x_map.aod == doctest::Approx(0.3).epsilon(0.15));
  CHECK(r.x_map.h2o == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("optimizer termination bookkeeping") {
  const auto s = fixtures::nonlinear_scene(16, {0.2, 1.5}, 2);
  OeOptions o;
  o.max_iterations = 1;
  const OeResult r = solve_map(s.problem, o);
  CHECK(r.iterations <= 1);
  CHECK(r.cost_trace.size() >= 1);
  const OeResult full = solve_map(s.problem);
  for (std::size_t i = 1; i < full.cost_trace.size(); ++i) CHECK(full.cost_trace[i] <= full.cost_trace[i - 1]);
}

TEST_CASE("laplace covariance rejects mismatched shapes") {
  const auto s = fixtures::nonlinear_scene(8, {0.2, 1.5}, 2);
  CHECK_THROWS_AS(laplace_cov(Eigen::MatrixXd::Zero(8, 9), s.problem.prior, s.problem.obs), InputError);
}
