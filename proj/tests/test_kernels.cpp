#include "doctest.h"

#include <initializer_list>
#include <omp.h>

#include <random>

#include "vswir/kernels.hpp"

using namespace vswir;

namespace {

Eigen::MatrixXd chainlike(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    double x = 0.0;
    const double phi = 0.1 + 0.8 * static_cast<double>(c) / static_cast<double>(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      x = phi * x + z(rng);
      m(r, c) = x + static_cast<double>(c);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("parallel kernels reproduce the serial reference exactly") {
  omp_set_num_threads(4);
  const Eigen::MatrixXd m = chainlike(5000, 13);
  const auto a = kernels::column_autocorr(m), b = kernels::serial::column_autocorr(m);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].tau == b[i].tau);
  CHECK(kernels::sample_covariance(m) == kernels::serial::sample_covariance(m));
  for (NullDist k : {NullDist::normal, NullDist::truncated_normal_at_zero}) {
    const Eigen::MatrixXd pos = m.array() + 10.0;
    const auto x = kernels::column_ks(pos, k), y = kernels::serial::column_ks(pos, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].d == y[i].d);
      CHECK(x[i].p == y[i].p);
    }
  }
}

TEST_CASE("sample covariance matches the dense formula") {
  const Eigen::MatrixXd m = chainlike(400, 5);
  const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
  const Eigen::MatrixXd ref = c.transpose() * c / 399.0;
  CHECK((kernels::sample_covariance(m) - ref).norm() < 1e-12 * ref.norm());
}
