#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vswir {

/// Random stream used by every sampler. One per chain; never shared.
using Rng = std::mt19937_64;

/// Symmetric positive-definite matrix with its Cholesky factor.
///
/// The factorization runs at construction, so an SpdMatrix that exists is
/// known to be SPD and can be shared read-only between threads.
class SpdMatrix {
 public:
  /// Throws FactorizationError when `values` is not symmetric to 1e-12
  /// (relative to its largest entry) or the Cholesky factorization fails.
  explicit SpdMatrix(Eigen::MatrixXd values, std::string_view what = "matrix");

  /// Replaces `m` by (m + m^T)/2 before validating.
  static SpdMatrix symmetrized(const Eigen::MatrixXd& m, std::string_view what = "matrix");
  static SpdMatrix identity(Eigen::Index dim);
  static SpdMatrix diagonal(const Eigen::VectorXd& diag);

  Eigen::Index dim() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }
  /// Lower-triangular L with values() = L L^T.
  Eigen::MatrixXd chol_lower() const { return llt_.matrixL(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  /// r^T A^{-1} r.
  double quad_form(const Eigen::VectorXd& r) const;
  /// L^{-1} r, the whitened residual.
  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const;
  /// L z.
  Eigen::VectorXd color(const Eigen::VectorXd& z) const;
  double log_det() const;
  Eigen::MatrixXd inverse() const;
  SpdMatrix scaled(double factor) const;
  /// Principal submatrix [begin, begin + size).
  SpdMatrix block(Eigen::Index begin, Eigen::Index size) const;

 private:
  Eigen::MatrixXd values_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// mean + L z with z ~ N(0, I).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, Rng& rng);

struct TruncatedDraw {
  Eigen::Vector2d value;
  /// P(X >= 0) under the untruncated N(mean, cov).
  double mass = 1.0;
  /// Mass was below the rejection threshold; the coordinatewise sampler ran.
  bool fallback = false;
};

/// Probability that N(mean, cov) lies in the nonnegative quadrant.
double nonneg_orthant_mass(const Eigen::Vector2d& mean, const SpdMatrix& cov);

/// Draw from N(mean, cov) conditioned on both coordinates >= 0.
/// Rejection from the untruncated proposal while the quadrant mass is at
/// least `min_mass`; below that, sequential inverse-CDF draws (approximate).
TruncatedDraw sample_truncated_mvn_nonneg(const Eigen::Vector2d& mean, const SpdMatrix& cov,
                                          Rng& rng, double min_mass = 1e-6);

/// Eigenvalues sigma of A v = sigma B v, descending. Reduces to the standard
/// problem L^{-1} A L^{-T} with B = L L^T.
Eigen::VectorXd generalized_eigvals(const SpdMatrix& a, const SpdMatrix& b);

/// Posterior covariance of x under y = diag(a) x + b + e, x ~ N(., prior),
/// e ~ N(0, diag(obs_var)):
///   (I - P A^T (A P A^T + O)^{-1} A) P
/// Channels with retained[i] == false carry no information (their row of A
/// is zeroed). Symmetrized before validation.
SpdMatrix linear_posterior_cov(const Eigen::VectorXd& a_diag, const SpdMatrix& prior,
                               const Eigen::VectorXd& obs_var,
                               const std::vector<bool>& retained = {});

}  // namespace vswir
