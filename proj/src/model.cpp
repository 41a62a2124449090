#include "vswir/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "vswir/errors.hpp"

namespace vswir {

WavelengthGrid::WavelengthGrid(std::vector<double> wl, std::vector<bool> retained)
    : wavelengths(std::move(wl)), mask(std::move(retained)) {
  if (wavelengths.empty()) throw InputError("wavelength grid is empty");
  if (mask.empty()) mask.assign(wavelengths.size(), true);
  if (mask.size() != wavelengths.size()) throw InputError("mask length differs from grid length");
  for (std::size_t i = 0; i < wavelengths.size(); ++i) {
    const double w = wavelengths[i];
    if (!std::isfinite(w) || w < 380.0 || w > 2500.0) {
      throw InputError("wavelength " + std::to_string(w) + " nm outside 380..2500 nm");
    }
    if (i > 0 && !(w > wavelengths[i - 1])) {
      throw InputError("wavelengths not strictly increasing at index " + std::to_string(i));
    }
  }
}

std::size_t WavelengthGrid::retained_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

Eigen::VectorXd StateVector::stacked() const {
  Eigen::VectorXd x(dim());
  x.head(refl.size()) = refl;
  x[refl.size()] = aod;
  x[refl.size() + 1] = h2o;
  return x;
}

StateVector StateVector::from_stacked(const Eigen::VectorXd& x) {
  if (x.size() < 3) throw InputError("state vector needs at least one reflectance");
  const Eigen::Index n = x.size() - 2;
  return StateVector{x.head(n), x[n], x[n + 1]};
}

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.size() < 2) throw InputError(std::string(name) + " needs at least 2 knots");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw InputError(std::string(name) + " not strictly increasing");
  }
}

struct Bracket {
  std::size_t lo = 0;
  double w = 0.0;
  bool outside = false;
};

Bracket bracket(const std::vector<double>& g, double x, RangePolicy policy, const char* name) {
  Bracket b;
  if (!std::isfinite(x)) throw DomainError(std::string(name) + " is not finite");
  if (x < g.front() || x > g.back()) {
    if (policy == RangePolicy::strict) {
      std::ostringstream msg;
      msg << name << " = " << x << " outside lookup-table range [" << g.front() << ", "
          << g.back() << "]";
      throw DomainError(msg.str());
    }
    b.outside = true;
  }
  const auto it = std::upper_bound(g.begin(), g.end(), x);
  const auto idx = static_cast<std::ptrdiff_t>(it - g.begin()) - 1;
  b.lo = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(g.size()) - 2));
  b.w = (x - g[b.lo]) / (g[b.lo + 1] - g[b.lo]);
  return b;
}

}  // namespace

AtmLookupTable::AtmLookupTable(std::vector<double> aod_grid, std::vector<double> h2o_grid,
                               std::vector<double> wavelengths, std::vector<double> rho_a,
                               std::vector<double> s, std::vector<double> t)
    : aod_grid_(std::move(aod_grid)),
      h2o_grid_(std::move(h2o_grid)),
      wavelengths_(std::move(wavelengths)),
      rho_a_(std::move(rho_a)),
      s_(std::move(s)),
      t_(std::move(t)) {
  check_grid(aod_grid_, "aod_grid");
  check_grid(h2o_grid_, "h2o_grid");
  if (wavelengths_.empty()) throw InputError("lookup table has no channels");
  const std::size_t expected = aod_grid_.size() * h2o_grid_.size() * wavelengths_.size();
  if (rho_a_.size() != expected || s_.size() != expected || t_.size() != expected) {
    throw InputError("lookup table arrays must have " + std::to_string(expected) + " entries");
  }
  for (std::size_t i = 0; i < expected; ++i) {
    if (!(rho_a_[i] >= 0.0) || !(t_[i] >= 0.0) || !(s_[i] >= 0.0 && s_[i] < 1.0)) {
      throw InputError("lookup table entry " + std::to_string(i) +
                       " violates rho_a >= 0, t >= 0, 0 <= s < 1");
    }
  }
}

bool AtmLookupTable::contains(double aod, double h2o) const {
  return aod >= aod_grid_.front() && aod <= aod_grid_.back() && h2o >= h2o_grid_.front() &&
         h2o <= h2o_grid_.back();
}

Geometry::Geometry(double cos_sza, Eigen::VectorXd e0)
    : cos_solar_zenith(cos_sza), solar_irradiance(std::move(e0)) {
  if (!(cos_solar_zenith > 0.0 && cos_solar_zenith <= 1.0)) {
    throw InputError("cos(solar zenith) must lie in (0, 1]");
  }
  if (solar_irradiance.size() == 0 || !(solar_irradiance.array() > 0.0).all()) {
    throw InputError("solar irradiance must be positive in every channel");
  }
}

Eigen::VectorXd Geometry::radiance_scale() const {
  return (cos_solar_zenith / std::numbers::pi) * solar_irradiance;
}

AtmSpectra interpolate_atm(const AtmLookupTable& lut, double aod, double h2o, RangePolicy policy) {
  const Bracket ba = bracket(lut.aod_grid(), aod, policy, "aod");
  const Bracket bh = bracket(lut.h2o_grid(), h2o, policy, "h2o");
  const std::size_t n = lut.channels();
  const double w00 = (1.0 - ba.w) * (1.0 - bh.w);
  const double w01 = (1.0 - ba.w) * bh.w;
  const double w10 = ba.w * (1.0 - bh.w);
  const double w11 = ba.w * bh.w;
  const std::size_t o00 = lut.offset(ba.lo, bh.lo);
  const std::size_t o01 = lut.offset(ba.lo, bh.lo + 1);
  const std::size_t o10 = lut.offset(ba.lo + 1, bh.lo);
  const std::size_t o11 = lut.offset(ba.lo + 1, bh.lo + 1);

  AtmSpectra out;
  out.extrapolated = ba.outside || bh.outside;
  auto blend = [&](const std::vector<double>& v, Eigen::VectorXd& dst) {
    dst.resize(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) {
      dst[static_cast<Eigen::Index>(c)] =
          w00 * v[o00 + c] + w01 * v[o01 + c] + w10 * v[o10 + c] + w11 * v[o11 + c];
    }
  };
  blend(lut.rho_a(), out.rho_a);
  blend(lut.s(), out.s);
  blend(lut.t(), out.t);
  return out;
}

Eigen::VectorXd radiance(const Eigen::VectorXd& refl, const AtmSpectra& atm, const Geometry& geom) {
  const Eigen::Index n = refl.size();
  if (atm.t.size() != n || geom.solar_irradiance.size() != n) {
    throw InputError("radiance: channel count mismatch");
  }
  const double c = geom.cos_solar_zenith / std::numbers::pi;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = 1.0 - atm.s[i] * refl[i];
    if (!(denom > 0.0)) throw SingularityError(static_cast<std::size_t>(i), denom);
    y[i] = c * geom.solar_irradiance[i] * (atm.rho_a[i] + atm.t[i] * refl[i] / denom);
  }
  return y;
}

Eigen::VectorXd forward(const StateVector& state, const AtmLookupTable& lut, const Geometry& geom,
                        RangePolicy policy) {
  return radiance(state.refl, interpolate_atm(lut, state.aod, state.h2o, policy), geom);
}

Eigen::MatrixXd jacobian(const StateVector& state, const AtmLookupTable& lut, const Geometry& geom,
                         RangePolicy policy) {
  const Eigen::Index n = state.refl.size();
  const AtmSpectra atm = interpolate_atm(lut, state.aod, state.h2o, policy);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n + 2);
  const Eigen::VectorXd scale = geom.radiance_scale();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = 1.0 - atm.s[i] * state.refl[i];
    if (!(denom > 0.0)) throw SingularityError(static_cast<std::size_t>(i), denom);
    jac(i, i) = scale[i] * atm.t[i] / (denom * denom);
  }

  auto column = [&](double value, const std::vector<double>& grid, auto&& eval) {
    const double h = 1e-4 * (grid.back() - grid.front());
    double lo = value - h;
    double hi = value + h;
    if (policy == RangePolicy::strict) {
      if (lo < grid.front()) lo = value;
      if (hi > grid.back()) hi = value;
    }
    return Eigen::VectorXd((eval(hi) - eval(lo)) / (hi - lo));
  };
  jac.col(n) = column(state.aod, lut.aod_grid(), [&](double a) {
    return radiance(state.refl, interpolate_atm(lut, a, state.h2o, policy), geom);
  });
  jac.col(n + 1) = column(state.h2o, lut.h2o_grid(), [&](double w) {
    return radiance(state.refl, interpolate_atm(lut, state.aod, w, policy), geom);
  });
  return jac;
}

LinearSubmodel linearize_given_atm(double aod, double h2o, const AtmLookupTable& lut,
                                   const Geometry& geom) {
  const AtmSpectra atm = interpolate_atm(lut, aod, h2o, RangePolicy::strict);
  const Eigen::VectorXd scale = geom.radiance_scale();
  return LinearSubmodel{(scale.array() * atm.t.array()).matrix(),
                        (scale.array() * atm.rho_a.array()).matrix()};
}

ForwardModel::ForwardModel(std::shared_ptr<const AtmLookupTable> lut, Geometry geom)
    : lut_(std::move(lut)), geom_(std::move(geom)) {
  if (!lut_) throw InputError("forward model needs a lookup table");
  if (static_cast<std::size_t>(geom_.solar_irradiance.size()) != lut_->channels()) {
    throw InputError("solar irradiance length differs from lookup-table channel count");
  }
}

}  // namespace vswir
