#include "vswir/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "vswir/errors.hpp"

namespace vswir {

namespace {

constexpr double kAirMass = 2.15;

struct Band {
  double center, amplitude, width;
};

constexpr Band kWaterBands[] = {{720.0, 0.01, 10.0},  {820.0, 0.02, 15.0},  {940.0, 0.12, 25.0},
                                {1140.0, 0.20, 30.0}, {1380.0, 1.80, 45.0}, {1880.0, 2.20, 60.0}};

double gauss(double x, double c, double w) { return std::exp(-0.5 * (x - c) * (x - c) / (w * w)); }

double water_absorption(double wl) {
  double k = 0.0;
  for (const auto& b : kWaterBands) k += b.amplitude * gauss(wl, b.center, b.width);
  return k;
}

struct AtmPoint {
  double rho_a, s, t;
};

AtmPoint analytic_atm(double wl, double aod, double h2o) {
  const double tau_r = 0.0088 * std::pow(wl / 1000.0, -4.05);
  const double tau_a = aod * std::pow(wl / 550.0, -1.3);
  const double kw = water_absorption(wl) * h2o;
  const double t = std::exp(-kAirMass * (0.5 * tau_r + 0.35 * tau_a)) * std::exp(-kAirMass * kw);
  const double rho_a =
      (0.5 * (1.0 - std::exp(-0.5 * tau_r)) + 0.25 * (1.0 - std::exp(-0.3 * tau_a))) * std::exp(-0.5 * kAirMass * kw);
  const double s = 0.29 * (1.0 - std::exp(-(0.8 * tau_r + 0.5 * tau_a))) * std::exp(-kw);
  return {rho_a, s, t};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double vegetation_mean(double wl) {
  double r = 0.04 + 0.05 * gauss(wl, 550.0, 35.0) + 0.40 * sigmoid((wl - 715.0) / 15.0);
  if (wl > 1300.0) r -= 0.18 * (wl - 1300.0) / 1200.0;
  r *= 1.0 - 0.35 * gauss(wl, 1450.0, 60.0) - 0.5 * gauss(wl, 1940.0, 80.0);
  return r;
}

double soil_mean(double wl) {
  double r = 0.08 + 0.27 * (1.0 - std::exp(-(wl - 380.0) / 600.0));
  r -= 0.03 * gauss(wl, 1400.0, 50.0) + 0.04 * gauss(wl, 1900.0, 60.0) + 0.02 * gauss(wl, 2200.0, 30.0);
  return r;
}

struct KernelParams {
  double rel_sd, abs_sd, length_nm, nugget;
};

MixtureComponent make_component(const std::vector<double>& wl, double (*mean_fn)(double),
                                const KernelParams& p, const std::string& label) {
  const auto n = static_cast<Eigen::Index>(wl.size());
  Eigen::VectorXd mean(n), sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean[i] = mean_fn(wl[static_cast<std::size_t>(i)]);
    sd[i] = p.rel_sd * mean[i] + p.abs_sd;
  }
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = wl[static_cast<std::size_t>(i)] - wl[static_cast<std::size_t>(j)];
      cov(i, j) = sd[i] * sd[j] * std::exp(-0.5 * d * d / (p.length_nm * p.length_nm));
    }
    cov(i, i) += p.nugget;
  }
  return {mean, SpdMatrix(std::move(cov), label), label};
}

}  // namespace

std::vector<std::pair<double, double>> default_masked_bands() { return {{1350.0, 1450.0}, {1800.0, 1950.0}}; }

WavelengthGrid make_wavelength_grid(std::size_t n, const std::vector<std::pair<double, double>>& masked) {
  if (n < 2) throw InputError("need at least two channels");
  std::vector<double> wl(n);
  std::vector<bool> mask(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    wl[i] = 380.0 + (2500.0 - 380.0) * static_cast<double>(i) / static_cast<double>(n - 1);
    for (const auto& [lo, hi] : masked) {
      if (wl[i] >= lo && wl[i] <= hi) mask[i] = false;
    }
  }
  return WavelengthGrid(std::move(wl), std::move(mask));
}

std::vector<double> default_aod_grid() { return {0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0}; }
std::vector<double> default_h2o_grid() { return {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0}; }

AtmLookupTable synthetic_lut(const std::vector<double>& wavelengths, LutKind kind,
                             const std::vector<double>& aod_grid, const std::vector<double>& h2o_grid) {
  const std::size_t n = wavelengths.size(), na = aod_grid.size(), nh = h2o_grid.size();
  std::vector<double> rho(na * nh * n), s(rho.size()), t(rho.size());
  for (std::size_t ia = 0; ia < na; ++ia) {
    for (std::size_t ih = 0; ih < nh; ++ih) {
      for (std::size_t c = 0; c < n; ++c) {
        const std::size_t i = (ia * nh + ih) * n + c;
        if (kind == LutKind::linear) {
          const AtmPoint p = analytic_atm(wavelengths[c], 0.1, 1.0);
          rho[i] = p.rho_a;
          s[i] = 0.0;
          t[i] = p.t;
        } else {
          const AtmPoint p = analytic_atm(wavelengths[c], aod_grid[ia], h2o_grid[ih]);
          rho[i] = p.rho_a;
          s[i] = p.s;
          t[i] = p.t;
        }
      }
    }
  }
  return AtmLookupTable(aod_grid, h2o_grid, wavelengths, std::move(rho), std::move(s), std::move(t));
}

Eigen::VectorXd synthetic_solar_irradiance(const std::vector<double>& wavelengths) {
  constexpr double kC2 = 1.4388e7;  // hc/k in nm K
  constexpr double kTemp = 5778.0;
  auto planck = [&](double wl) { return std::pow(wl, -5.0) / std::expm1(kC2 / (wl * kTemp)); };
  const double ref = planck(500.0);
  Eigen::VectorXd e0(static_cast<Eigen::Index>(wavelengths.size()));
  for (std::size_t i = 0; i < wavelengths.size(); ++i) {
    e0[static_cast<Eigen::Index>(i)] = 190.0 * planck(wavelengths[i]) / ref;
  }
  return e0;
}

double default_cos_solar_zenith() { return std::cos(30.0 * std::numbers::pi / 180.0); }

ComponentSet synthetic_components(const std::vector<double>& wavelengths) {
  ComponentSet set;
  set.wavelengths = wavelengths;
  const KernelParams veg{0.05, 0.005, 100.0, 1e-5};
  const KernelParams soil{0.05, 0.005, 150.0, 1e-5};
  set.components.push_back(make_component(wavelengths, vegetation_mean, veg, "vegetation"));
  set.components.push_back(make_component(wavelengths, soil_mean, soil, "soil"));
  for (const auto& p : {veg, soil}) {
    set.params.push_back({{"kernel", "squared_exponential"},
                          {"rel_sd", p.rel_sd},
                          {"abs_sd", p.abs_sd},
                          {"length_nm", p.length_nm},
                          {"nugget", p.nugget}});
  }
  return set;
}

SyntheticScene generate_synthetic_scene(const ComponentSet& components, const std::string& terrain,
                                        const Eigen::Vector2d& atm_true, const NoiseModel& noise,
                                        std::uint64_t seed, const ForwardModel& model, bool add_noise) {
  const MixtureComponent& comp = components.by_label(terrain);
  if (static_cast<std::size_t>(comp.mean.size()) != model.channels()) {
    throw InputError("component '" + terrain + "' does not match the lookup-table channels");
  }
  Rng rng(seed);
  SyntheticScene scene;
  scene.x_true.refl = sample_mvn(comp.mean, comp.cov, rng).cwiseMax(0.0).cwiseMin(1.0);
  scene.x_true.aod = atm_true[0];
  scene.x_true.h2o = atm_true[1];
  scene.y_clean = model.forward(scene.x_true);
  scene.y_obs = scene.y_clean;
  if (add_noise) {
    const auto cov = build_noise_cov(scene.y_clean, noise);
    std::normal_distribution<double> z;
    for (Eigen::Index i = 0; i < scene.y_obs.size(); ++i) scene.y_obs[i] += std::sqrt(cov.variance[i]) * z(rng);
  }
  return scene;
}

}  // namespace vswir
