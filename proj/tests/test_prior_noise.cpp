#include "doctest.h"

#include <cmath>
#include <numbers>

#include "vswir/errors.hpp"
#include "vswir/prior_noise.hpp"

using namespace vswir;

TEST_CASE("component selection by Mahalanobis distance") {
  const Eigen::Vector2d x0(0.0, 0.0);
  std::vector<MixtureComponent> comps{{Eigen::Vector2d(2.0, 0.0), SpdMatrix::identity(2), "far"},
                                      {Eigen::Vector2d(0.0, 1.0), SpdMatrix::identity(2), "near"}};
  CHECK(select_component(comps, x0).label == "near");
  SUBCASE("covariance matters, not just distance") {
    comps[0].cov = SpdMatrix::diagonal(Eigen::Vector2d(16.0, 1.0));
    CHECK(mahalanobis_sq(comps[0], x0) == doctest::Approx(0.25));
    CHECK(select_component(comps, x0).label == "far");
  }
  SUBCASE("ties go to the lowest index") {
    comps[0].mean = Eigen::Vector2d(0.0, -1.0);
    CHECK(select_component(comps, x0).label == "far");
  }
  CHECK_THROWS(select_component({}, x0));
}

TEST_CASE("noise covariance") {
  Eigen::Vector3d y(10.0, 0.0, 4.0);
  NoiseModel nm{100.0, 0.02, Eigen::Vector3d(0.0, 0.0, 0.5)};
  const auto c = build_noise_cov(y, nm);
  CHECK(c.variance[0] == doctest::Approx(0.01 + 0.04 + kVarianceFloor).epsilon(1e-15));
  CHECK(c.variance[1] == kVarianceFloor);
  CHECK(c.variance[2] == doctest::Approx(0.0016 + 0.0064 + 0.5 + kVarianceFloor).epsilon(1e-15));
  REQUIRE(c.degenerate_channels.size() == 1);
  CHECK(c.degenerate_channels[0] == 1);
  CHECK((c.variance.array() >= kVarianceFloor).all());
}

TEST_CASE("observation precision honours the mask") {
  const Observation obs(Eigen::Vector3d(1.0, 2.0, 3.0), Eigen::Vector3d(0.5, 0.25, 1.0), {true, false, true});
  CHECK(obs.precision()[0] == 2.0);
  CHECK(obs.precision()[1] == 0.0);
  CHECK(obs.misfit(Eigen::Vector3d(0.0, 100.0, 1.0)) == doctest::Approx(2.0 + 4.0));
}

TEST_CASE("assembled prior is block diagonal and normalized") {
  Eigen::Matrix3d g;
  g << 0.04, 0.01, 0.0, 0.01, 0.05, 0.02, 0.0, 0.02, 0.06;
  const MixtureComponent surf{Eigen::Vector3d(0.1, 0.2, 0.3), SpdMatrix(g), "s"};
  const GaussianPrior p = assemble_prior(surf, default_atm_mean(), default_atm_cov());
  const Eigen::MatrixXd full = p.cov().values();
  CHECK(full.topRightCorner(3, 2).norm() == 0.0);
  CHECK(full.bottomLeftCorner(2, 3).norm() == 0.0);
  CHECK(p.log_det() == doctest::Approx(std::log(full.determinant())).epsilon(1e-12));
  CHECK(p.log_det() == doctest::Approx(surf.cov.log_det() + 0.0).epsilon(1e-12));

  StateVector x;
  x.refl = Eigen::Vector3d(0.2, 0.1, 0.35);
  x.aod = 0.4;
  x.h2o = 1.0;
  const Eigen::VectorXd r = x.stacked() - p.mean();
  const double ref = -0.5 * r.dot(full.inverse() * r) - 0.5 * (5.0 * std::log(2.0 * std::numbers::pi) + std::log(full.determinant()));
  CHECK(log_prior(x, p) == doctest::Approx(ref).epsilon(1e-12));
}
