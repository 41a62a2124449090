#include "vswir/oe.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vswir/errors.hpp"

namespace vswir {

RetrievalProblem make_problem(const Eigen::VectorXd& y_obs, const std::vector<bool>& retained,
                              const GaussianPrior& prior, const NoiseModel& noise,
                              const ForwardModel& model) {
  if (static_cast<std::size_t>(y_obs.size()) != model.channels() ||
      prior.refl_dim() != y_obs.size()) {
    throw InputError("radiance, prior and lookup table disagree on channel count");
  }
  ObservationCovariance oc = build_noise_cov(y_obs, noise);
  return RetrievalProblem{model, prior, Observation(y_obs, std::move(oc.variance), retained)};
}

double cost(const StateVector& state, const RetrievalProblem& problem, RangePolicy policy) {
  const double prior_term = problem.prior.refl_quad(state.refl) + problem.prior.atm_quad(state.atm());
  const Eigen::VectorXd f = problem.model.forward(state, policy);
  return 0.5 * (prior_term + problem.obs.misfit(f));
}

Eigen::MatrixXd prior_precision(const GaussianPrior& prior) {
  const Eigen::Index n = prior.refl_dim();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n + 2, n + 2);
  p.topLeftCorner(n, n) = prior.refl_cov().inverse();
  p.bottomRightCorner(2, 2) = prior.atm_cov().inverse();
  return p;
}

namespace {

Eigen::VectorXd prior_gradient(const StateVector& state, const GaussianPrior& prior) {
  const Eigen::Index n = prior.refl_dim();
  Eigen::VectorXd g(n + 2);
  g.head(n) = prior.refl_cov().solve(Eigen::VectorXd(state.refl - prior.refl_mean()));
  g.tail(2) = prior.atm_cov().solve(Eigen::VectorXd(state.atm() - prior.atm_mean()));
  return g;
}

double safe_cost(const StateVector& x, const RetrievalProblem& problem, bool* extrapolated) {
  try {
    const AtmSpectra atm = problem.model.atm(x.aod, x.h2o, RangePolicy::extrapolate);
    if (extrapolated) *extrapolated = atm.extrapolated;
    const Eigen::VectorXd f = problem.model.radiance(x.refl, atm);
    const double c =
        0.5 * (problem.prior.refl_quad(x.refl) + problem.prior.atm_quad(x.atm()) + problem.obs.misfit(f));
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const SingularityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Eigen::VectorXd cost_gradient(const StateVector& state, const RetrievalProblem& problem,
                              RangePolicy policy) {
  const Eigen::MatrixXd jac = problem.model.jacobian(state, policy);
  const Eigen::VectorXd resid = problem.obs.radiance - problem.model.forward(state, policy);
  const Eigen::VectorXd weighted = (problem.obs.precision().array() * resid.array()).matrix();
  return prior_gradient(state, problem.prior) - jac.transpose() * weighted;
}

OeResult solve_map(const RetrievalProblem& problem, const OeOptions& opts) {
  const GaussianPrior& prior = problem.prior;
  StateVector x = opts.initial ? *opts.initial
                               : StateVector{prior.refl_mean(), prior.atm_mean()[0], prior.atm_mean()[1]};
  const Eigen::MatrixXd prior_prec = prior_precision(prior);
  const Eigen::VectorXd& w = problem.obs.precision();

  bool extrapolated = false;
  double c = safe_cost(x, problem, &extrapolated);
  if (!std::isfinite(c)) throw DivergedError("OE: cost is not finite at the initial state");

  std::vector<double> trace{c};
  bool converged = false;
  std::string termination = "max_iterations";
  double lambda = 0.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const Eigen::MatrixXd jac = problem.model.jacobian(x, RangePolicy::extrapolate);
    const Eigen::VectorXd resid = problem.obs.radiance - problem.model.forward(x, RangePolicy::extrapolate);
    const Eigen::VectorXd grad =
        prior_gradient(x, prior) - jac.transpose() * (w.array() * resid.array()).matrix();
    const Eigen::VectorXd xs = x.stacked();
    if (grad.norm() <= opts.grad_tol * std::max(1.0, xs.norm())) {
      converged = true;
      termination = "gradient";
      break;
    }
    const Eigen::MatrixXd hess = jac.transpose() * w.asDiagonal() * jac + prior_prec;

    bool accepted = false;
    bool any_finite = false;
    double c_new = c;
    StateVector x_new = x;
    bool ext_new = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd damped = hess;
      damped.diagonal() *= (1.0 + lambda);
      Eigen::LLT<Eigen::MatrixXd> llt(damped);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd step = llt.solve(-grad);
        x_new = StateVector::from_stacked(xs + step);
        c_new = safe_cost(x_new, problem, &ext_new);
        if (std::isfinite(c_new)) any_finite = true;
        if (c_new <= c) {
          accepted = true;
          break;
        }
      }
      lambda = lambda == 0.0 ? 1e-4 : lambda * 10.0;
    }
    if (!accepted) {
      if (!any_finite) throw DivergedError("OE: every damped step produced a non-finite cost");
      termination = "stalled";
      break;
    }
    lambda = lambda < 1e-10 ? 0.0 : lambda / 10.0;
    const double rel_decrease = (c - c_new) / std::max(std::abs(c), std::numeric_limits<double>::min());
    x = x_new;
    c = c_new;
    extrapolated = extrapolated || ext_new;
    trace.push_back(c);
    if (rel_decrease < opts.rel_cost_tol) {
      converged = true;
      termination = "cost";
      ++iter;
      break;
    }
  }

  SpdMatrix gamma = laplace_cov(x, problem);
  return OeResult{x, std::move(gamma), std::move(trace), converged, iter, extrapolated, termination};
}

SpdMatrix laplace_cov(const Eigen::MatrixXd& jac, const GaussianPrior& prior, const Observation& obs) {
  if (jac.rows() != obs.radiance.size() || jac.cols() != prior.dim()) {
    throw InputError("laplace_cov: Jacobian shape mismatch");
  }
  const Eigen::MatrixXd info =
      jac.transpose() * obs.precision().asDiagonal() * jac + prior_precision(prior);
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (info + info.transpose()));
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "laplace_cov: information matrix ill-conditioned (eigenvalue range "
        << eig.eigenvalues().minCoeff() << " .. " << eig.eigenvalues().maxCoeff() << ")";
    throw FactorizationError(msg.str());
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  return SpdMatrix::symmetrized(cov, "Laplace covariance");
}

SpdMatrix laplace_cov(const StateVector& x_map, const RetrievalProblem& problem) {
  return laplace_cov(problem.model.jacobian(x_map, RangePolicy::extrapolate), problem.prior, problem.obs);
}

}  // namespace vswir
