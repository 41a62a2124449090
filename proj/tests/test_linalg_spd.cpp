#include "doctest.h"

#include <cmath>

#include "vswir/errors.hpp"
#include "vswir/linalg_spd.hpp"
#include "vswir/stats.hpp"

using namespace vswir;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return a * a.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("SpdMatrix validates") {
  Eigen::MatrixXd asym(2, 2);
  asym << 2.0, 0.5, 0.4, 2.0;
  CHECK_THROWS_AS(SpdMatrix{asym}, FactorizationError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(SpdMatrix{indefinite}, FactorizationError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(SpdMatrix{nan}, FactorizationError);
  CHECK_NOTHROW(SpdMatrix::symmetrized(asym));
}

TEST_CASE("SpdMatrix operations against dense oracles") {
  Rng rng(3);
  const Eigen::MatrixXd a = random_spd(7, rng);
  const SpdMatrix s(a);
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(7, -1.0, 2.0);
  const Eigen::MatrixXd inv = a.inverse();
  CHECK((s.solve(r) - inv * r).norm() < 1e-12 * (inv * r).norm());
  CHECK(s.quad_form(r) == doctest::Approx(r.dot(inv * r)).epsilon(1e-12));
  CHECK(s.log_det() == doctest::Approx(std::log(a.determinant())).epsilon(1e-12));
  CHECK((s.inverse() - inv).norm() < 1e-12 * inv.norm());
  CHECK((s.color(s.whiten(r)) - r).norm() < 1e-12);
  CHECK(s.whiten(r).squaredNorm() == doctest::Approx(s.quad_form(r)).epsilon(1e-12));
  CHECK((s.block(2, 3).values() - a.block(2, 2, 3, 3)).norm() == 0.0);
  CHECK((s.scaled(0.5).values() - 0.5 * a).norm() == 0.0);
}

TEST_CASE("sample_mvn moments") {
  Rng rng(11);
  Eigen::Matrix2d c;
  c << 2.0, 0.6, 0.6, 0.5;
  const SpdMatrix cov(c);
  const Eigen::Vector2d mu(1.0, -2.0);
  const int n = 200000;
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d x = sample_mvn(mu, cov, rng);
    m += x;
    s += (x - mu) * (x - mu).transpose();
  }
  m /= n;
  s /= n;
  CHECK((m - mu).norm() < 0.02);
  CHECK((s - c).norm() < 0.03);
}

TEST_CASE("nonnegative orthant mass and truncated sampling") {
  Eigen::Matrix2d c;
  c << 0.04, 0.01, 0.01, 0.09;
  const SpdMatrix cov(c);
  const Eigen::Vector2d mu(0.05, 0.1);
  const double rho = 0.01 / std::sqrt(0.04 * 0.09);
  CHECK(nonneg_orthant_mass(mu, cov) ==
        doctest::Approx(stats::bivariate_normal_cdf(0.05 / 0.2, 0.1 / 0.3, rho)).epsilon(1e-14));

  Rng rng(5);
  int below = 0;
  double mean0 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const TruncatedDraw d = sample_truncated_mvn_nonneg(mu, cov, rng);
    CHECK_FALSE(d.fallback);
    below += (d.value.array() < 0.0).any();
    mean0 += d.value[0];
  }
  CHECK(below == 0);
  // First-coordinate truncated mean by one-dimensional quadrature of the
  // joint density over the quadrant.
  const double mass = nonneg_orthant_mass(mu, cov);
  double num = 0.0;
  const int m = 4000;
  const double hi = 1.5;
  const double sx = 0.2, sy = 0.3;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) * hi / m;
    const double cond_mean = mu[1] + rho * sy / sx * (x - mu[0]);
    const double cond_sd = sy * std::sqrt(1.0 - rho * rho);
    num += x * stats::normal_pdf((x - mu[0]) / sx) / sx * stats::normal_sf(-cond_mean / cond_sd) * hi / m;
  }
  CHECK(mean0 / n == doctest::Approx(num / mass).epsilon(0.01));
}

TEST_CASE("truncated sampler falls back when the quadrant is nearly empty") {
  const SpdMatrix cov = SpdMatrix::diagonal(Eigen::Vector2d(0.01, 0.01));
  const Eigen::Vector2d mu(-0.6, 0.3);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const TruncatedDraw d = sample_truncated_mvn_nonneg(mu, cov, rng);
    CHECK(d.fallback);
    CHECK(d.value[0] >= 0.0);
    CHECK(d.value[1] >= 0.0);
  }
}

TEST_CASE("generalized eigenvalues") {
  SUBCASE("2x2 against the characteristic polynomial") {
    Eigen::Matrix2d a, b;
    a << 3.0, 1.0, 1.0, 2.0;
    b << 2.0, 0.5, 0.5, 1.0;
    // det(A - s B) = 0 -> (detB) s^2 - (a11 b22 + a22 b11 - 2 a12 b12) s + detA = 0.
    const double qa = b.determinant();
    const double qb = -(a(0, 0) * b(1, 1) + a(1, 1) * b(0, 0) - 2.0 * a(0, 1) * b(0, 1));
    const double qc = a.determinant();
    const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    const Eigen::VectorXd s = generalized_eigvals(SpdMatrix(a), SpdMatrix(b));
    CHECK(s[0] == doctest::Approx((-qb + disc) / (2.0 * qa)).epsilon(1e-13));
    CHECK(s[1] == doctest::Approx((-qb - disc) / (2.0 * qa)).epsilon(1e-13));
  }
  SUBCASE("dense B^{-1} A spectrum") {
    Rng rng(21);
    const Eigen::MatrixXd a = random_spd(12, rng), b = random_spd(12, rng);
    Eigen::EigenSolver<Eigen::MatrixXd> es(b.inverse() * a);
    Eigen::VectorXd ref = es.eigenvalues().real();
    std::sort(ref.data(), ref.data() + ref.size(), std::greater<>());
    const Eigen::VectorXd s = generalized_eigvals(SpdMatrix(a), SpdMatrix(b));
    CHECK((s - ref).cwiseAbs().maxCoeff() < 1e-10 * ref.maxCoeff());
  }
}

TEST_CASE("linear posterior covariance equals the information form") {
  Rng rng(4);
  const Eigen::Index n = 6;
  const Eigen::MatrixXd p = random_spd(n, rng) * 0.01;
  Eigen::VectorXd a(n), o(n);
  a << 2.0, 1.5, 0.7, 3.0, 0.1, 1.0;
  o << 0.01, 0.02, 0.01, 0.03, 0.5, 0.01;
  std::vector<bool> retained(n, true);
  retained[3] = false;
  Eigen::VectorXd w = o.cwiseInverse();
  w[3] = 0.0;
  const Eigen::MatrixXd info = p.inverse() + Eigen::MatrixXd((a.array().square() * w.array()).matrix().asDiagonal());
  const SpdMatrix g = linear_posterior_cov(a, SpdMatrix(p), o, retained);
  CHECK((g.values() - info.inverse()).norm() < 1e-10 * info.inverse().norm());
}
