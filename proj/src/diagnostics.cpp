#include "vswir/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fftw3.h>
#include <boost/math/tools/roots.hpp>

#include "vswir/errors.hpp"
#include "vswir/kernels.hpp"
#include "vswir/stats.hpp"

namespace vswir {

namespace {

// Unnormalized autocovariance sums c[k] = sum_t (x_t - m)(x_{t+k} - m), k < N.
std::vector<double> autocovariance_sums(std::span<const double> x, double mean) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  double* buf = fftw_alloc_real(m);
  fftw_complex* spec = fftw_alloc_complex(m / 2 + 1);
  fftw_plan fwd;
  fftw_plan inv;
  // Only plan creation and destruction touch FFTW's global planner state.
#pragma omp critical(vswir_fftw_planner)
  {
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec, buf, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
  std::fill(buf + n, buf + m, 0.0);
  fftw_execute(fwd);
  for (std::size_t k = 0; k < m / 2 + 1; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(inv);
  std::vector<double> out(buf, buf + n);
  for (double& v : out) v /= static_cast<double>(m);
#pragma omp critical(vswir_fftw_planner)
  {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  fftw_free(spec);
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Standard normal truncated below at alpha: inverse Mills ratio, and the
// ratio mean/sd of the shifted variable Z - alpha (location-free).
double mills(double alpha) { return stats::normal_pdf(alpha) / stats::normal_sf(alpha); }

double trunc_var_std(double alpha) {
  const double l = mills(alpha);
  return 1.0 + alpha * l - l * l;
}

double trunc_mean_over_sd(double alpha) {
  return (mills(alpha) - alpha) / std::sqrt(trunc_var_std(alpha));
}

constexpr double kAlphaMin = -40.0;
constexpr double kAlphaMax = 20.0;

}  // namespace

AutocorrResult autocorr_time(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw InputError("autocorr_time: need at least 100 samples");
  double mean = 0.0;
  for (double v : series) {
    if (!std::isfinite(v)) throw InputError("autocorr_time: non-finite sample");
    mean += v;
  }
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double v : series) spread = std::max(spread, std::abs(v - mean));
  AutocorrResult out;
  if (spread <= 1e-14 * std::max(1.0, std::abs(mean))) {
    out.tau = static_cast<double>(n);
    out.degenerate = true;
    return out;
  }
  const std::vector<double> c = autocovariance_sums(series, mean);
  const double c0 = c[0];
  double pair_sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double p = (c[2 * k] + c[2 * k + 1]) / c0;
    if (p <= 0.0) break;
    pair_sum += p;
  }
  out.tau = std::max(1.0, 2.0 * pair_sum - 1.0);
  return out;
}

EssReport ess(const Eigen::MatrixXd& samples, long discard, const std::vector<bool>& retained) {
  if (discard < 0 || discard >= samples.rows()) throw InputError("ess: discard leaves no samples");
  const Eigen::MatrixXd window = samples.bottomRows(samples.rows() - discard);
  const Eigen::Index d = window.cols();
  if (d < 3) throw InputError("ess: chain needs reflectance and atmospheric columns");
  const auto tau = kernels::column_autocorr(window);

  EssReport rep;
  rep.n_used = static_cast<long>(window.rows());
  rep.tau.resize(d);
  rep.ess.resize(d);
  rep.degenerate.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    rep.tau[j] = tau[static_cast<std::size_t>(j)].tau;
    rep.ess[j] = static_cast<double>(rep.n_used) / rep.tau[j];
    rep.degenerate[static_cast<std::size_t>(j)] = tau[static_cast<std::size_t>(j)].degenerate;
  }
  const Eigen::Index n = d - 2;
  std::vector<double> refl;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (retained.empty() || retained[static_cast<std::size_t>(i)]) refl.push_back(rep.ess[i]);
  }
  if (!refl.empty()) {
    rep.summary.refl_min = *std::min_element(refl.begin(), refl.end());
    rep.summary.refl_max = *std::max_element(refl.begin(), refl.end());
    rep.summary.refl_med = median(refl);
  }
  rep.summary.aod = rep.ess[n];
  rep.summary.h2o = rep.ess[n + 1];
  return rep;
}

double forstner_distance(const SpdMatrix& a, const SpdMatrix& b) {
  const Eigen::VectorXd sigma = generalized_eigvals(a, b);
  return std::sqrt(sigma.array().log().square().sum());
}

CovCompare cov_compare(const SpdMatrix& gamma_m, const SpdMatrix& gamma_l, const SpdMatrix& gamma_pr) {
  if (gamma_m.dim() != gamma_l.dim() || gamma_m.dim() != gamma_pr.dim()) {
    throw InputError("cov_compare: dimension mismatch");
  }
  const Eigen::MatrixXd& m = gamma_m.values();
  const Eigen::MatrixXd& l = gamma_l.values();
  CovCompare out;
  out.d_tr = std::abs((m.trace() - l.trace()) / m.trace());
  out.d_norm = (m - l).norm() / m.norm();
  out.d_f_raw = forstner_distance(gamma_m, gamma_l);
  const double to_prior = forstner_distance(gamma_m, gamma_pr);
  out.d_f_normalized = to_prior > 0.0 ? out.d_f_raw / to_prior : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<EigenDirection> eigen_quotient(const SpdMatrix& gamma_m, const SpdMatrix& gamma_l) {
  if (gamma_m.dim() != gamma_l.dim()) throw InputError("eigen_quotient: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gamma_m.values());
  if (eig.info() != Eigen::Success) throw FactorizationError("eigen_quotient: eigensolver failed");
  const Eigen::Index d = gamma_m.dim();
  const double lmax = eig.eigenvalues()[d - 1];
  std::vector<EigenDirection> out;
  out.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index k = d - 1; k >= 0; --k) {
    EigenDirection e;
    e.lambda = eig.eigenvalues()[k];
    e.eigvec = eig.eigenvectors().col(k);
    e.quotient = e.eigvec.dot(gamma_l.values() * e.eigvec) / e.lambda;
    e.reliable = e.lambda >= 1e-12 * lmax;
    out.push_back(std::move(e));
  }
  return out;
}

std::string to_string(NullDist d) {
  return d == NullDist::normal ? "normal" : "truncated_normal_at_zero";
}

double NullFit::cdf(double x) const {
  const double z = (x - loc) / scale;
  if (kind == NullDist::normal) return stats::normal_cdf(z);
  if (x <= 0.0) return 0.0;
  const double alpha = -loc / scale;
  if (alpha > 0.0) return 1.0 - stats::normal_sf(z) / stats::normal_sf(alpha);
  return (stats::normal_cdf(z) - stats::normal_cdf(alpha)) / stats::normal_sf(alpha);
}

double NullFit::quantile(double p) const {
  if (kind == NullDist::normal) return loc + scale * stats::normal_quantile(p);
  const double alpha = -loc / scale;
  // sf(z) = (1 - p) sf(alpha)
  const double z = -stats::normal_quantile((1.0 - p) * stats::normal_sf(alpha));
  return std::max(0.0, loc + scale * z);
}

NullFit fit_null(std::span<const double> series, NullDist kind) {
  const std::size_t n = series.size();
  if (n < 2) throw InputError("fit_null: need at least two samples");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw InputError("fit_null: zero variance (degenerate series)");

  NullFit fit;
  fit.kind = kind;
  if (kind == NullDist::normal) {
    fit.loc = mean;
    fit.scale = sd;
    return fit;
  }
  if (mean <= 0.0) throw InputError("fit_null: truncated-at-zero null needs a positive mean");
  const double ratio = mean / sd;
  double alpha;
  if (ratio >= trunc_mean_over_sd(kAlphaMin)) {
    alpha = -ratio;
  } else if (ratio <= trunc_mean_over_sd(kAlphaMax)) {
    alpha = kAlphaMax;
    fit.clamped = true;
  } else {
    boost::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        [ratio](double a) { return trunc_mean_over_sd(a) - ratio; }, kAlphaMin, kAlphaMax,
        boost::math::tools::eps_tolerance<double>(50), iters);
    alpha = 0.5 * (root.first + root.second);
  }
  fit.scale = sd / std::sqrt(trunc_var_std(alpha));
  fit.loc = -alpha * fit.scale;
  return fit;
}

KsResult ks_test(std::span<const double> series, const NullFit& null) {
  std::vector<double> x(series.begin(), series.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = null.cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult out;
  out.d = d;
  out.p = stats::kolmogorov_sf(std::sqrt(n) * d);
  out.null = null;
  out.params_fitted = false;
  return out;
}

KsResult ks_normality(std::span<const double> series, NullDist kind) {
  if (series.size() < 50) throw InputError("ks_normality: need at least 50 samples");
  KsResult out = ks_test(series, fit_null(series, kind));
  out.params_fitted = true;
  return out;
}

std::vector<QqPoint> qq_data(std::span<const double> series, const NullFit& null) {
  if (series.size() < 10) throw InputError("qq_data: need at least 10 samples");
  std::vector<double> x(series.begin(), series.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  std::vector<QqPoint> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k].theoretical = null.quantile((static_cast<double>(k) + 0.5) / n);
    out[k].sample = x[k];
  }
  return out;
}

std::vector<QqPoint> qq_data(std::span<const double> series, NullDist kind) {
  return qq_data(series, fit_null(series, kind));
}

ParameterSummary posterior_summary(const Eigen::MatrixXd& samples, const Eigen::VectorXd& reference) {
  if (samples.rows() == 0) throw InputError("posterior_summary: empty chain");
  if (reference.size() != samples.cols()) throw InputError("posterior_summary: reference length mismatch");
  ParameterSummary s;
  s.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd xc = samples.rowwise() - s.mean.transpose();
  const double denom = samples.rows() > 1 ? static_cast<double>(samples.rows() - 1) : 1.0;
  s.variance = xc.array().square().colwise().sum().transpose() / denom;
  s.rel_diff.resize(s.mean.size());
  s.rel_diff_unreliable.resize(static_cast<std::size_t>(s.mean.size()));
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
    const double m = std::abs(s.mean[j]);
    s.rel_diff_unreliable[static_cast<std::size_t>(j)] = m < 1e-12;
    s.rel_diff[j] = m < 1e-12 ? std::numeric_limits<double>::quiet_NaN()
                              : std::abs(s.mean[j] - reference[j]) / m;
  }
  return s;
}

Histogram2d histogram2d(std::span<const double> x, std::span<const double> y, int bins) {
  if (x.size() != y.size() || x.empty() || bins <= 0) throw InputError("histogram2d: bad input");
  auto edges = [bins](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double a = *lo;
    const double b = *hi > *lo ? *hi : *lo + 1.0;
    return Eigen::VectorXd(Eigen::VectorXd::LinSpaced(bins + 1, a, b));
  };
  Histogram2d h{edges(x), edges(y), Eigen::MatrixXd::Zero(bins, bins)};
  auto index = [bins](const Eigen::VectorXd& e, double v) {
    const double t = (v - e[0]) / (e[bins] - e[0]);
    return std::clamp(static_cast<int>(t * bins), 0, bins - 1);
  };
  for (std::size_t k = 0; k < x.size(); ++k) h.counts(index(h.x_edges, x[k]), index(h.y_edges, y[k])) += 1.0;
  return h;
}

}  // namespace vswir
