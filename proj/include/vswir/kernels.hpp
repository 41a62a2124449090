#pragma once

// Column-parallel kernels over chain sample matrices (rows = draws,
// columns = parameters). The OpenMP versions split work by column so each
// output entry is computed by the same arithmetic as the serial reference.

#include <vector>

#include <Eigen/Dense>

#include "vswir/diagnostics.hpp"

namespace vswir::kernels {

std::vector<AutocorrResult> column_autocorr(const Eigen::MatrixXd& samples);
/// Unbiased sample covariance of the columns.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& samples);
std::vector<KsResult> column_ks(const Eigen::MatrixXd& samples, NullDist kind);

namespace serial {
std::vector<AutocorrResult> column_autocorr(const Eigen::MatrixXd& samples);
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& samples);
std::vector<KsResult> column_ks(const Eigen::MatrixXd& samples, NullDist kind);
}  // namespace serial

}  // namespace vswir::kernels
