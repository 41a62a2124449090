#include "doctest.h"

#include <cmath>
#include <initializer_list>
#include <random>

#include "vswir/diagnostics.hpp"
#include "vswir/errors.hpp"
#include "vswir/stats.hpp"

using namespace vswir;

namespace {

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  double v = z(rng) / std::sqrt(1.0 - phi * phi);
  for (auto& e : x) {
    v = phi * v + z(rng);
    e = v;
  }
  return x;
}

Eigen::MatrixXd random_spd(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return a * a.transpose() + 0.5 * static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

// Direct O(N K) autocorrelation sum with the same Geyer truncation.
double tau_direct(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(n);
  auto c = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += (x[t] - m) * (x[t + k] - m);
    return s;
  };
  const double c0 = c(0);
  double sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double p = (c(2 * k) + c(2 * k + 1)) / c0;
    if (p <= 0.0) break;
    sum += p;
  }
  return std::max(1.0, 2.0 * sum - 1.0);
}

}  // namespace

TEST_CASE("autocorrelation time") {
  SUBCASE("FFT sums equal direct sums") {
    const auto x = ar1(0.7, 3000, 2);
    CHECK(autocorr_time(x).tau == doctest::Approx(tau_direct(x)).epsilon(1e-10));
  }
  SUBCASE("AR(1) theory") {
    for (double phi : {0.5, 0.9}) {
      const auto x = ar1(phi, 200000, 7);
      CHECK(autocorr_time(x).tau == doctest::Approx((1 + phi) / (1 - phi)).epsilon(0.15));
    }
  }
  SUBCASE("iid and degenerate") {
    CHECK(autocorr_time(ar1(0.0, 50000, 3)).tau == doctest::Approx(1.0).epsilon(0.1));
    const std::vector<double> flat(500, 0.3);
    const auto r = autocorr_time(flat);
    CHECK(r.degenerate);
    CHECK(r.tau == 500.0);
    CHECK_THROWS_AS(autocorr_time(std::vector<double>(99, 1.0)), InputError);
  }
}

TEST_CASE("ess report") {
  const std::size_t n = 20000;
  Eigen::MatrixXd s(n, 4);
  const auto a = ar1(0.0, n, 1), b = ar1(0.5, n, 2), c = ar1(0.9, n, 3), d = ar1(0.0, n, 4);
  for (std::size_t i = 0; i < n; ++i) s.row(static_cast<Eigen::Index>(i)) << a[i], b[i], c[i], d[i];
  const EssReport r = ess(s, 0, {true, false});
  CHECK(r.n_used == static_cast<long>(n));
  CHECK(r.ess[0] == doctest::Approx(static_cast<double>(n) / r.tau[0]));
  CHECK(r.summary.refl_min == r.ess[0]);  // column 1 is masked
  CHECK(r.summary.aod == r.ess[2]);
  CHECK(r.summary.h2o == r.ess[3]);
  CHECK(ess(s, 5000).n_used == 15000);
  CHECK_THROWS_AS(ess(s, 20000), InputError);
}

TEST_CASE("covariance distances against dense oracles") {
  Rng rng(12);
  for (Eigen::Index d : {2, 5, 20, 50}) {
    const Eigen::MatrixXd m = random_spd(d, rng), l = random_spd(d, rng), p = random_spd(d, rng) * 3.0;
    const SpdMatrix sm(m), sl(l), sp(p);
    Eigen::EigenSolver<Eigen::MatrixXd> es(l.inverse() * m);
    const double df = std::sqrt(es.eigenvalues().real().array().log().square().sum());
    Eigen::EigenSolver<Eigen::MatrixXd> ep(p.inverse() * m);
    const double dfp = std::sqrt(ep.eigenvalues().real().array().log().square().sum());
    const CovCompare c = cov_compare(sm, sl, sp);
    CHECK(c.d_f_raw == doctest::Approx(df).epsilon(1e-10));
    CHECK(c.d_f_normalized == doctest::Approx(df / dfp).epsilon(1e-10));
    CHECK(c.d_tr == doctest::Approx(std::abs(m.trace() - l.trace()) / m.trace()).epsilon(1e-12));
    CHECK(c.d_norm == doctest::Approx((m - l).norm() / m.norm()).epsilon(1e-12));
    CHECK(std::abs(forstner_distance(sm, sl) - forstner_distance(sl, sm)) < 1e-10);
    CHECK(forstner_distance(sm, sm) < 1e-12);
  }
}

TEST_CASE("eigen quotient of scaled covariances") {
  Rng rng(5);
  const SpdMatrix g(random_spd(15, rng));
  for (double c : {0.25, 1.0, 3.0}) {
    const auto q = eigen_quotient(g, g.scaled(c));
    REQUIRE(q.size() == 15);
    for (std::size_t k = 0; k < q.size(); ++k) {
      CHECK(q[k].quotient == doctest::Approx(c).epsilon(1e-10));
      if (k > 0) CHECK(q[k].lambda <= q[k - 1].lambda);
    }
  }
}

TEST_CASE("null fits") {
  Rng rng(3);
  SUBCASE("truncated normal moment matching recovers parent parameters") {
    const NullFit parent{NullDist::truncated_normal_at_zero, 0.02, 0.05};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(200000);
    for (auto& v : x) v = parent.quantile(u(rng));
    const NullFit f = fit_null(x, NullDist::truncated_normal_at_zero);
    CHECK(f.loc == doctest::Approx(0.02).epsilon(0.1));
    CHECK(f.scale == doctest::Approx(0.05).epsilon(0.02));
    CHECK_FALSE(f.clamped);
  }
  SUBCASE("cdf and quantile are inverse") {
    const NullFit t{NullDist::truncated_normal_at_zero, -0.03, 0.05};
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(t.cdf(t.quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    CHECK(t.cdf(-1.0) == 0.0);
    const NullFit n{NullDist::normal, 1.0, 2.0};
    CHECK(n.quantile(0.5) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(fit_null(std::vector<double>(10, 1.0), NullDist::normal), InputError);
}

TEST_CASE("KS statistic and p-value") {
  SUBCASE("statistic matches a brute-force sup over the empirical cdf") {
    const std::vector<double> x{0.3, -1.2, 0.8, 2.1, -0.4, 0.05, 1.4, -2.2, 0.6, -0.9};
    const NullFit n{NullDist::normal, 0.0, 1.0};
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      d = std::max(d, std::abs((i + 1) / 10.0 - stats::normal_cdf(s[i])));
      d = std::max(d, std::abs(i / 10.0 - stats::normal_cdf(s[i])));
    }
    const KsResult r = ks_test(x, n);
    CHECK(r.d == doctest::Approx(d).epsilon(1e-15));
    CHECK(r.p == doctest::Approx(stats::kolmogorov_sf(std::sqrt(10.0) * d)));
    CHECK_FALSE(r.params_fitted);
  }
  SUBCASE("normality rejected for a half-normal sample") {
    Rng rng(2);
    std::normal_distribution<double> z;
    std::vector<double> x(2000);
    for (auto& v : x) v = std::abs(z(rng));
    CHECK(ks_normality(x, NullDist::normal).p < 1e-6);
    CHECK(ks_normality(x, NullDist::truncated_normal_at_zero).p > 0.01);
  }
  CHECK_THROWS_AS(ks_normality(std::vector<double>(49, 1.0), NullDist::normal), InputError);
}

TEST_CASE("Q-Q data") {
  std::vector<double> x;
  for (int k = 0; k < 100; ++k) x.push_back(stats::normal_quantile((k + 0.5) / 100.0) * 2.0 + 1.0);
  const auto q = qq_data(x, NullFit{NullDist::normal, 1.0, 2.0});
  for (std::size_t k = 0; k < q.size(); ++k) CHECK(q[k].sample == doctest::Approx(q[k].theoretical).epsilon(1e-12));
  CHECK_THROWS_AS(qq_data(std::vector<double>(9, 0.0), NullDist::normal), InputError);
}

TEST_CASE("posterior summary and histogram") {
  Eigen::MatrixXd s(4, 2);
  s << 1, 0, 2, 0, 3, 0, 4, 0;
  const auto p = posterior_summary(s, Eigen::Vector2d(2.0, 1.0));
  CHECK(p.mean[0] == 2.5);
  CHECK(p.variance[0] == doctest::Approx(5.0 / 3.0));
  CHECK(p.rel_diff[0] == doctest::Approx(0.2));
  CHECK(p.rel_diff_unreliable[1]);
  const std::vector<double> a{0.0, 0.5, 1.0, 1.0}, b{0.0, 0.0, 1.0, 0.2};
  const Histogram2d h = histogram2d(a, b, 2);
  CHECK(h.counts.sum() == 4.0);
  CHECK(h.x_edges.size() == 3);
}
