#include "vswir/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace vswir::stats {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GaussLegendreHalf {
  std::size_t count;
  std::array<double, 10> weight;
  std::array<double, 10> node;
};

// Half-rules (negative nodes only) of the 6-, 12- and 20-point Gauss-Legendre
// formulas used by Genz's BVU.
constexpr GaussLegendreHalf kRules[3] = {
    {3,
     {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
     {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970}},
    {6,
     {.04717533638651177, .1069393259953183, .1600783285433464,
      .2031674267230659, .2334925365383547, .2491470458134029},
     {-.9815606342467191, -.9041172563704750, -.7699026741943050,
      -.5873179542866171, -.3678314989981802, -.1252334085114692}},
    {10,
     {.01761400713915212, .04060142980038694, .06267204833410906,
      .08327674157670475, .1019301198172404, .1181945319615184,
      .1316886384491766, .1420961093183821, .1491729864726037,
      .1527533871307259},
     {-.9931285991850949, -.9639719272779138, -.9122344282513259,
      -.8391169718222188, -.7463319064601508, -.6360536807265150,
      -.5108670019508271, -.3737060887154196, -.2277858511416451,
      -.07652652113349733}},
};

// P(X > sh, Y > sk).
double bivariate_upper(double sh, double sk, double r) {
  const GaussLegendreHalf& rule =
      std::abs(r) < 0.3 ? kRules[0] : (std::abs(r) < 0.75 ? kRules[1] : kRules[2]);
  double h = sh;
  double k = sk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < rule.count; ++i) {
      double sn = std::sin(asr * (rule.node[i] + 1.0) / 2.0);
      bvn += rule.weight[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-rule.node[i] + 1.0) / 2.0);
      bvn += rule.weight[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + normal_cdf(-h) * normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < rule.count; ++i) {
      double xs = (a * (rule.node[i] + 1.0)) * (a * (rule.node[i] + 1.0));
      double rs = std::sqrt(1.0 - xs);
      bvn += a * rule.weight[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (-rule.node[i] + 1.0) * (-rule.node[i] + 1.0) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * rule.weight[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
              (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + normal_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) {
    bvn += h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
  }
  return bvn;
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * boost::math::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (p <= 0.0) return -INFINITY;
  if (p >= 1.0) return INFINITY;
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double bivariate_normal_cdf(double h, double k, double rho) {
  if (h == -INFINITY || k == -INFINITY) return 0.0;
  if (h == INFINITY) return normal_cdf(k);
  if (k == INFINITY) return normal_cdf(h);
  return std::clamp(bivariate_upper(-h, -k, rho), 0.0, 1.0);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(kTwoPi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sf += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sf, 0.0, 1.0);
}

}  // namespace vswir::stats
