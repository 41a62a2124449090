#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vswir/linalg_spd.hpp"
#include "vswir/mcmc.hpp"

namespace vswir {

struct AutocorrResult {
  double tau = 1.0;
  /// Constant series; tau is set to N.
  bool degenerate = false;
};

/// Integrated autocorrelation time tau = 1 + 2 sum_k rho(k), truncated by
/// Geyer's initial positive sequence and clamped to >= 1. Autocovariances
/// come from a zero-padded FFT. Requires N >= 100 finite values.
AutocorrResult autocorr_time(std::span<const double> series);

struct EssSummary {
  double refl_min = 0.0;
  double refl_med = 0.0;
  double refl_max = 0.0;
  double aod = 0.0;
  double h2o = 0.0;
};

struct EssReport {
  Eigen::VectorXd tau;
  Eigen::VectorXd ess;
  std::vector<bool> degenerate;
  long n_used = 0;
  EssSummary summary;
};

/// ESS = N / tau for every column of the chain after dropping the first
/// `discard` kept rows. The reflectance summary covers retained channels.
EssReport ess(const Eigen::MatrixXd& samples, long discard = 0,
              const std::vector<bool>& retained = {});
inline EssReport ess(const Chain& chain, long discard = 0, const std::vector<bool>& retained = {}) {
  return ess(chain.samples, discard, retained);
}

struct CovCompare {
  double d_tr = 0.0;
  double d_norm = 0.0;
  /// Forstner distance between the sampled and Laplace covariances.
  double d_f_raw = 0.0;
  /// d_f(M, L) / d_f(M, prior).
  double d_f_normalized = 0.0;
};

/// sqrt(sum ln^2 sigma_i) over the generalized eigenvalues of (a, b).
double forstner_distance(const SpdMatrix& a, const SpdMatrix& b);

CovCompare cov_compare(const SpdMatrix& gamma_m, const SpdMatrix& gamma_l, const SpdMatrix& gamma_pr);

struct EigenDirection {
  double lambda = 0.0;
  /// v^T G_L v / lambda.
  double quotient = 0.0;
  Eigen::VectorXd eigvec;
  /// False when lambda < 1e-12 * lambda_max.
  bool reliable = true;
};

/// Directional variance ratio of gamma_l along the eigenvectors of gamma_m,
/// ordered by descending eigenvalue.
std::vector<EigenDirection> eigen_quotient(const SpdMatrix& gamma_m, const SpdMatrix& gamma_l);

enum class NullDist { normal, truncated_normal_at_zero };

std::string to_string(NullDist d);

/// A location/scale reference distribution. For the truncated case
/// (loc, scale) are the parent normal's parameters and support is [0, inf).
struct NullFit {
  NullDist kind = NullDist::normal;
  double loc = 0.0;
  double scale = 1.0;
  /// Moment matching hit the most-skewed admissible truncation.
  bool clamped = false;

  double cdf(double x) const;
  double quantile(double p) const;
};

/// Moments fitted from the series: mean and sample sd for the normal;
/// matched truncated mean and variance for the truncated normal.
NullFit fit_null(std::span<const double> series, NullDist kind);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
  NullFit null;
  /// Parameters came from the same series, so p is approximate
  /// (conservative; the Lilliefors effect).
  bool params_fitted = true;
};

/// One-sample KS statistic against `null`; p from the asymptotic Kolmogorov
/// distribution at sqrt(N) D.
KsResult ks_test(std::span<const double> series, const NullFit& null);

/// KS against a null with moments fitted from the series. N >= 50.
KsResult ks_normality(std::span<const double> series, NullDist kind);

struct QqPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

/// Sorted sample vs null quantiles at plotting positions (k - 0.5) / N.
std::vector<QqPoint> qq_data(std::span<const double> series, const NullFit& null);
std::vector<QqPoint> qq_data(std::span<const double> series, NullDist kind);

struct ParameterSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  /// |mean - reference| / |mean|.
  Eigen::VectorXd rel_diff;
  /// |mean| below 1e-12; the relative difference is not meaningful.
  std::vector<bool> rel_diff_unreliable;
};

ParameterSummary posterior_summary(const Eigen::MatrixXd& samples, const Eigen::VectorXd& reference);

struct Histogram2d {
  Eigen::VectorXd x_edges;
  Eigen::VectorXd y_edges;
  Eigen::MatrixXd counts;
};

Histogram2d histogram2d(std::span<const double> x, std::span<const double> y, int bins);

}  // namespace vswir
