#include "vswir/kernels.hpp"

#include <span>

namespace vswir::kernels {

namespace {

std::span<const double> column_span(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& samples) {
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  return samples.rowwise() - mean;
}

double cross_sum(const Eigen::MatrixXd& xc, Eigen::Index i, Eigen::Index j) {
  const double* a = xc.col(i).data();
  const double* b = xc.col(j).data();
  double s = 0.0;
  for (Eigen::Index k = 0; k < xc.rows(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::vector<AutocorrResult> column_autocorr(const Eigen::MatrixXd& samples) {
  const Eigen::Index d = samples.cols();
  std::vector<AutocorrResult> out(static_cast<std::size_t>(d));
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index j = 0; j < d; ++j) {
    out[static_cast<std::size_t>(j)] = autocorr_time(column_span(samples, j));
  }
  return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& samples) {
  const Eigen::Index d = samples.cols();
  const double denom = static_cast<double>(samples.rows() - 1);
  const Eigen::MatrixXd xc = centered(samples);
  Eigen::MatrixXd cov(d, d);
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      const double v = cross_sum(xc, i, j) / denom;
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

std::vector<KsResult> column_ks(const Eigen::MatrixXd& samples, NullDist kind) {
  const Eigen::Index d = samples.cols();
  std::vector<KsResult> out(static_cast<std::size_t>(d));
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index j = 0; j < d; ++j) {
    out[static_cast<std::size_t>(j)] = ks_normality(column_span(samples, j), kind);
  }
  return out;
}

namespace serial {

std::vector<AutocorrResult> column_autocorr(const Eigen::MatrixXd& samples) {
  std::vector<AutocorrResult> out;
  out.reserve(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) out.push_back(autocorr_time(column_span(samples, j)));
  return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& samples) {
  const Eigen::Index d = samples.cols();
  const double denom = static_cast<double>(samples.rows() - 1);
  const Eigen::MatrixXd xc = centered(samples);
  Eigen::MatrixXd cov(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j; i < d; ++i) {
      cov(i, j) = cov(j, i) = cross_sum(xc, i, j) / denom;
    }
  }
  return cov;
}

std::vector<KsResult> column_ks(const Eigen::MatrixXd& samples, NullDist kind) {
  std::vector<KsResult> out;
  out.reserve(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) out.push_back(ks_normality(column_span(samples, j), kind));
  return out;
}

}  // namespace serial

}  // namespace vswir::kernels
