#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vswir/linalg_spd.hpp"
#include "vswir/model.hpp"
#include "vswir/prior_noise.hpp"

namespace vswir {

/// Everything the posterior depends on for one pixel.
struct RetrievalProblem {
  ForwardModel model;
  GaussianPrior prior;
  Observation obs;

  Eigen::Index refl_dim() const { return prior.refl_dim(); }
};

/// Builds the observation covariance from the measurement itself and holds it
/// fixed for the rest of the retrieval.
RetrievalProblem make_problem(const Eigen::VectorXd& y_obs, const std::vector<bool>& retained,
                              const GaussianPrior& prior, const NoiseModel& noise,
                              const ForwardModel& model);

/// Negative log posterior
///   1/2 (x - mu)^T G_pr^{-1} (x - mu) + 1/2 (y - f(x))^T G_obs^{-1} (y - f(x))
/// with masked channels dropped from the misfit. The default policy
/// extrapolates the lookup table so unconstrained iterates stay evaluable.
double cost(const StateVector& state, const RetrievalProblem& problem,
            RangePolicy policy = RangePolicy::extrapolate);

/// Gradient of cost at `state`, using jacobian().
Eigen::VectorXd cost_gradient(const StateVector& state, const RetrievalProblem& problem,
                              RangePolicy policy = RangePolicy::extrapolate);

struct OeOptions {
  int max_iterations = 200;
  double rel_cost_tol = 1e-8;
  /// Converged when |grad| <= grad_tol * max(1, |x|).
  double grad_tol = 1e-6;
  /// Starting point; the prior mean when empty.
  std::optional<StateVector> initial;
};

struct OeResult {
  StateVector x_map;
  SpdMatrix gamma_laplace;
  std::vector<double> cost_trace;
  bool converged = false;
  int iterations = 0;
  /// Some accepted iterate queried the lookup table outside its grid.
  bool extrapolated = false;
  std::string termination;
};

/// Levenberg-Marquardt damped Gauss-Newton on cost(). Damping starts at zero
/// (a pure Gauss-Newton step) and grows tenfold per rejected trial.
/// Throws DivergedError when no trial step has finite cost.
OeResult solve_map(const RetrievalProblem& problem, const OeOptions& opts = {});

/// (J^T G_obs^{-1} J + G_pr^{-1})^{-1} at x_map, masked rows of J dropped.
SpdMatrix laplace_cov(const StateVector& x_map, const RetrievalProblem& problem);

/// Same formula for an explicit Jacobian.
SpdMatrix laplace_cov(const Eigen::MatrixXd& jac, const GaussianPrior& prior, const Observation& obs);

/// G_pr^{-1}, assembled blockwise.
Eigen::MatrixXd prior_precision(const GaussianPrior& prior);

}  // namespace vswir
