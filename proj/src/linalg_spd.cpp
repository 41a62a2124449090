#include "vswir/linalg_spd.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "vswir/errors.hpp"
#include "vswir/stats.hpp"

namespace vswir {

SpdMatrix::SpdMatrix(Eigen::MatrixXd values, std::string_view what) : values_(std::move(values)) {
  if (values_.rows() != values_.cols() || values_.rows() == 0) {
    throw FactorizationError(std::string(what) + ": SPD matrix must be square and non-empty");
  }
  if (!values_.allFinite()) {
    throw FactorizationError(std::string(what) + ": non-finite entries");
  }
  const double scale = values_.cwiseAbs().maxCoeff();
  const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw FactorizationError(std::string(what) + ": not symmetric (max |A - A^T| = " +
                             std::to_string(asym) + ")");
  }
  llt_.compute(values_);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationError(std::string(what) + ": Cholesky factorization failed");
  }
}

SpdMatrix SpdMatrix::symmetrized(const Eigen::MatrixXd& m, std::string_view what) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  return SpdMatrix(std::move(sym), what);
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& diag) {
  return SpdMatrix(Eigen::MatrixXd(diag.asDiagonal()));
}

double SpdMatrix::quad_form(const Eigen::VectorXd& r) const { return whiten(r).squaredNorm(); }

Eigen::VectorXd SpdMatrix::whiten(const Eigen::VectorXd& r) const {
  return llt_.matrixL().solve(r);
}

Eigen::VectorXd SpdMatrix::color(const Eigen::VectorXd& z) const { return llt_.matrixL() * z; }

double SpdMatrix::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  Eigen::MatrixXd inv = llt_.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  return 0.5 * (inv + inv.transpose());
}

SpdMatrix SpdMatrix::scaled(double factor) const { return SpdMatrix(factor * values_); }

SpdMatrix SpdMatrix::block(Eigen::Index begin, Eigen::Index size) const {
  return SpdMatrix(values_.block(begin, begin, size, size));
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, Rng& rng) {
  if (mean.size() != cov.dim()) throw InputError("sample_mvn: dimension mismatch");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean + cov.color(z);
}

double nonneg_orthant_mass(const Eigen::Vector2d& mean, const SpdMatrix& cov) {
  const auto& c = cov.values();
  const double s1 = std::sqrt(c(0, 0));
  const double s2 = std::sqrt(c(1, 1));
  const double rho = c(0, 1) / (s1 * s2);
  // P(X1 >= 0, X2 >= 0) = P(-X1 <= 0, -X2 <= 0) with -X ~ N(-mean, cov).
  return stats::bivariate_normal_cdf(mean[0] / s1, mean[1] / s2, rho);
}

namespace {

double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  while (u <= 0.0) u = unif(rng);
  return u;
}

// N(mu, sigma^2) truncated to [lower, inf) by inversion in the upper tail.
double truncated_normal_lower(double mu, double sigma, double lower, Rng& rng) {
  const double alpha = (lower - mu) / sigma;
  const double tail = stats::normal_sf(alpha);
  const double z = -stats::normal_quantile(open_uniform(rng) * tail);
  return mu + sigma * std::max(z, alpha);
}

}  // namespace

TruncatedDraw sample_truncated_mvn_nonneg(const Eigen::Vector2d& mean, const SpdMatrix& cov,
                                          Rng& rng, double min_mass) {
  if (cov.dim() != 2) throw InputError("sample_truncated_mvn_nonneg: covariance must be 2x2");
  TruncatedDraw draw;
  draw.mass = nonneg_orthant_mass(mean, cov);
  if (draw.mass >= min_mass) {
    std::normal_distribution<double> normal;
    while (true) {
      const Eigen::Vector2d z(normal(rng), normal(rng));
      const Eigen::Vector2d x = mean + cov.color(z);
      if (x[0] >= 0.0 && x[1] >= 0.0) {
        draw.value = x;
        return draw;
      }
    }
  }
  std::cerr << "warning: truncated normal quadrant mass " << draw.mass
            << " below threshold; using coordinatewise inverse-CDF sampling\n";
  draw.fallback = true;
  const auto& c = cov.values();
  const double x0 = truncated_normal_lower(mean[0], std::sqrt(c(0, 0)), 0.0, rng);
  const double cond_mean = mean[1] + c(1, 0) / c(0, 0) * (x0 - mean[0]);
  const double cond_sd = std::sqrt(std::max(c(1, 1) - c(1, 0) * c(1, 0) / c(0, 0), 1e-300));
  draw.value = Eigen::Vector2d(x0, truncated_normal_lower(cond_mean, cond_sd, 0.0, rng));
  return draw;
}

Eigen::VectorXd generalized_eigvals(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw InputError("generalized_eigvals: dimension mismatch");
  const Eigen::MatrixXd l = b.chol_lower();
  const auto tri = l.triangularView<Eigen::Lower>();
  // C = L^{-1} A L^{-T}
  Eigen::MatrixXd tmp = tri.solve(a.values());
  Eigen::MatrixXd c = tri.solve(tmp.transpose());
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw FactorizationError("generalized_eigvals: eigensolver failed");
  return eig.eigenvalues().reverse();
}

SpdMatrix linear_posterior_cov(const Eigen::VectorXd& a_diag, const SpdMatrix& prior,
                               const Eigen::VectorXd& obs_var,
                               const std::vector<bool>& retained) {
  const Eigen::Index n = prior.dim();
  if (a_diag.size() != n || obs_var.size() != n ||
      (!retained.empty() && static_cast<Eigen::Index>(retained.size()) != n)) {
    throw InputError("linear_posterior_cov: dimension mismatch");
  }
  Eigen::VectorXd a = a_diag;
  for (Eigen::Index i = 0; i < n && !retained.empty(); ++i) {
    if (!retained[static_cast<std::size_t>(i)]) a[i] = 0.0;
  }
  const Eigen::MatrixXd& p = prior.values();
  // P A^T, with A diagonal this scales columns.
  const Eigen::MatrixXd pat = p * a.asDiagonal();
  Eigen::MatrixXd gamma_y = a.asDiagonal() * pat;
  gamma_y.diagonal() += obs_var;
  gamma_y = 0.5 * (gamma_y + gamma_y.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(gamma_y);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("linear_posterior_cov: marginal data covariance not SPD");
  }
  // (I - P A^T Gy^{-1} A) P = P - (P A^T) Gy^{-1} (A P)
  const Eigen::MatrixXd gain_rhs = llt.solve(pat.transpose());
  Eigen::MatrixXd post = p - pat * gain_rhs;
  return SpdMatrix::symmetrized(post, "linear posterior covariance");
}

}  // namespace vswir
