// Serial reference vs OpenMP column kernels on chain-shaped inputs.

#include <benchmark/benchmark.h>

#include <random>

#include "vswir/kernels.hpp"

namespace {

Eigen::MatrixXd ar1_matrix(Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    double x = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      x = 0.7 * x + z(rng);
      m(r, c) = x;
    }
  }
  return m;
}

void BM_AutocorrSerial(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::serial::column_autocorr(m));
}
void BM_AutocorrParallel(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::column_autocorr(m));
}
void BM_CovarianceSerial(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::serial::sample_covariance(m));
}
void BM_CovarianceParallel(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::sample_covariance(m));
}
void BM_KsSerial(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::serial::column_ks(m, vswir::NullDist::normal));
}
void BM_KsParallel(benchmark::State& st) {
  const auto m = ar1_matrix(st.range(0), 66);
  for (auto _ : st) benchmark::DoNotOptimize(vswir::kernels::column_ks(m, vswir::NullDist::normal));
}

}  // namespace

BENCHMARK(BM_AutocorrSerial)->Arg(18000);
BENCHMARK(BM_AutocorrParallel)->Arg(18000);
BENCHMARK(BM_CovarianceSerial)->Arg(18000);
BENCHMARK(BM_CovarianceParallel)->Arg(18000);
BENCHMARK(BM_KsSerial)->Arg(18000);
BENCHMARK(BM_KsParallel)->Arg(18000);

BENCHMARK_MAIN();
