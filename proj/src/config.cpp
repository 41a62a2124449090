#include "vswir/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "vswir/errors.hpp"

namespace vswir {

namespace {

double to_double(const std::string& key, const std::string& v) {
  return csv::parse_double(csv::trim(v), "config key '" + key + "'");
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e15) throw InputError("config key '" + key + "': expected an integer");
  return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = csv::trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InputError("config key '" + key + "': expected true or false");
}

Eigen::Vector2d to_pair(const std::string& key, const std::string& v) {
  const auto parts = csv::split(v);
  if (parts.size() != 2) throw InputError("config key '" + key + "': expected two comma-separated numbers");
  return {to_double(key, std::string(parts[0])), to_double(key, std::string(parts[1]))};
}

std::filesystem::path to_path(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p{std::string(csv::trim(v))};
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string num(double v) {
  std::string s;
  csv::append(s, v);
  return s;
}

}  // namespace

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::oe_only: return "oe_only";
    case RunMode::mcmc_only: return "mcmc_only";
    case RunMode::compare: return "compare";
  }
  return "compare";
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"radiance", "observed radiance CSV file(s), comma-separated"},
      {"lut", "lookup table (.vlut container or .csv)"},
      {"components", "surface mixture component file"},
      {"irradiance", "solar irradiance CSV; synthetic blackbody when empty"},
      {"output_dir", "directory for results"},
      {"cos_solar_zenith", "cosine of the solar zenith angle; 0 means cos 30 deg"},
      {"snr", "instrument signal-to-noise ratio"},
      {"calib_frac", "fractional calibration uncertainty"},
      {"rt_model_var", "radiative-transfer model variance added to every channel"},
      {"atm_prior_mean", "prior mean of (aod, h2o)"},
      {"atm_prior_var", "prior variances of (aod, h2o)"},
      {"component", "surface component label; nearest component when empty"},
      {"oe_max_iterations", "optimizer iteration cap"},
      {"n_samples", "MCMC iterations"},
      {"thin", "keep every thin-th post-burn-in state"},
      {"burn_in", "iterations discarded before keeping states"},
      {"eps2", "scale of the Laplace reflectance proposal"},
      {"eps1", "scale of the linear-inversion reflectance proposal"},
      {"adapt_start", "iteration after which the atmospheric proposal adapts"},
      {"eps0", "initial atmospheric proposal variance"},
      {"eps_am", "ridge added to the adapted atmospheric covariance"},
      {"s2", "scale of the adapted atmospheric covariance"},
      {"refl_proposal", "laplace or linear_inversion"},
      {"seed", "random seed; scene k of a batch uses seed + k"},
      {"truncation_correction", "include the truncation-mass ratio in the atmospheric acceptance"},
      {"tune_target", "tune the reflectance proposal scale to this acceptance rate; 0 disables"},
      {"mode", "oe_only, mcmc_only or compare"},
      {"jobs", "scenes retrieved in parallel"},
  };
  return keys;
}

void RetrievalConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base) {
  const std::string v(csv::trim(value));
  if (key == "radiance") {
    radiance.clear();
    for (auto part : csv::split(v)) {
      if (!part.empty()) radiance.push_back(to_path(std::string(part), base));
    }
  } else if (key == "lut") {
    lut = to_path(v, base);
  } else if (key == "components") {
    components = to_path(v, base);
  } else if (key == "irradiance") {
    irradiance = to_path(v, base);
  } else if (key == "output_dir") {
    output_dir = to_path(v, base);
  } else if (key == "cos_solar_zenith") {
    cos_solar_zenith = to_double(key, v);
  } else if (key == "snr") {
    snr = to_double(key, v);
  } else if (key == "calib_frac") {
    calib_frac = to_double(key, v);
  } else if (key == "rt_model_var") {
    rt_model_var = to_double(key, v);
  } else if (key == "atm_prior_mean") {
    atm_prior_mean = to_pair(key, v);
  } else if (key == "atm_prior_var") {
    atm_prior_var = to_pair(key, v);
  } else if (key == "component") {
    component = v;
  } else if (key == "oe_max_iterations") {
    oe_max_iterations = static_cast<int>(to_long(key, v));
  } else if (key == "n_samples") {
    mcmc.n_samples = to_long(key, v);
  } else if (key == "thin") {
    mcmc.thin = to_long(key, v);
  } else if (key == "burn_in") {
    mcmc.burn_in = to_long(key, v);
  } else if (key == "eps2") {
    mcmc.eps2 = to_double(key, v);
  } else if (key == "eps1") {
    mcmc.eps1 = to_double(key, v);
  } else if (key == "adapt_start") {
    mcmc.adapt_start = to_long(key, v);
  } else if (key == "eps0") {
    mcmc.eps0 = to_double(key, v);
  } else if (key == "eps_am") {
    mcmc.eps_am = to_double(key, v);
  } else if (key == "s2") {
    mcmc.s2 = to_double(key, v);
  } else if (key == "refl_proposal") {
    mcmc.refl_proposal = refl_proposal_from_string(v);
  } else if (key == "seed") {
    const long s = to_long(key, v);
    if (s < 0) throw InputError("config key 'seed': must be nonnegative");
    mcmc.seed = static_cast<std::uint64_t>(s);
  } else if (key == "truncation_correction") {
    mcmc.truncation_correction = to_bool(key, v);
  } else if (key == "tune_target") {
    tune_target = to_double(key, v);
  } else if (key == "mode") {
    if (v == "oe_only") mode = RunMode::oe_only;
    else if (v == "mcmc_only") mode = RunMode::mcmc_only;
    else if (v == "compare") mode = RunMode::compare;
    else throw InputError("config key 'mode': expected oe_only, mcmc_only or compare");
  } else if (key == "jobs") {
    jobs = static_cast<int>(to_long(key, v));
  } else {
    throw InputError("unknown config key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> RetrievalConfig::entries() const {
  std::string rad;
  for (const auto& p : radiance) rad += (rad.empty() ? "" : ",") + p.string();
  auto pair = [](const Eigen::Vector2d& v) { return num(v[0]) + "," + num(v[1]); };
  return {{"radiance", rad},
          {"lut", lut.string()},
          {"components", components.string()},
          {"irradiance", irradiance.string()},
          {"output_dir", output_dir.string()},
          {"cos_solar_zenith", num(cos_solar_zenith)},
          {"snr", num(snr)},
          {"calib_frac", num(calib_frac)},
          {"rt_model_var", num(rt_model_var)},
          {"atm_prior_mean", pair(atm_prior_mean)},
          {"atm_prior_var", pair(atm_prior_var)},
          {"component", component},
          {"oe_max_iterations", std::to_string(oe_max_iterations)},
          {"n_samples", std::to_string(mcmc.n_samples)},
          {"thin", std::to_string(mcmc.thin)},
          {"burn_in", std::to_string(mcmc.burn_in)},
          {"eps2", num(mcmc.eps2)},
          {"eps1", num(mcmc.eps1)},
          {"adapt_start", std::to_string(mcmc.adapt_start)},
          {"eps0", num(mcmc.eps0)},
          {"eps_am", num(mcmc.eps_am)},
          {"s2", num(mcmc.s2)},
          {"refl_proposal", to_string(mcmc.refl_proposal)},
          {"seed", std::to_string(mcmc.seed)},
          {"truncation_correction", mcmc.truncation_correction ? "true" : "false"},
          {"tune_target", num(tune_target)},
          {"mode", to_string(mode)},
          {"jobs", std::to_string(jobs)}};
}

void RetrievalConfig::validate() const {
  namespace fs = std::filesystem;
  if (radiance.empty()) throw InputError("config: 'radiance' is required");
  for (const auto& p : radiance) {
    if (!fs::exists(p)) throw InputError("config: radiance file " + p.string() + " does not exist");
  }
  if (lut.empty() || !fs::exists(lut)) throw InputError("config: lookup table '" + lut.string() + "' does not exist");
  if (components.empty() || !fs::exists(components)) {
    throw InputError("config: component file '" + components.string() + "' does not exist");
  }
  if (!irradiance.empty() && !fs::exists(irradiance)) {
    throw InputError("config: irradiance file " + irradiance.string() + " does not exist");
  }
  if (output_dir.empty()) throw InputError("config: 'output_dir' is required");
  if (cos_solar_zenith < 0.0 || cos_solar_zenith > 1.0) throw InputError("config: cos_solar_zenith must be in [0, 1]");
  if (!(snr > 0.0)) throw InputError("config: snr must be positive");
  if (calib_frac < 0.0 || rt_model_var < 0.0) throw InputError("config: noise terms must be nonnegative");
  if (!(atm_prior_var.array() > 0.0).all()) throw InputError("config: atm_prior_var must be positive");
  if (oe_max_iterations < 1) throw InputError("config: oe_max_iterations must be positive");
  if (tune_target < 0.0 || tune_target >= 1.0) throw InputError("config: tune_target must be in [0, 1)");
  if (jobs < 1) throw InputError("config: jobs must be positive");
  mcmc.validate();
}

RetrievalConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  RetrievalConfig cfg;
  const auto base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      cfg.set(std::string(csv::trim(body.substr(0, eq))), std::string(body.substr(eq + 1)), base);
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

std::string canonical_text(const RetrievalConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const RetrievalConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  // Output location and parallelism do not change results.
  RetrievalConfig c = cfg;
  c.output_dir.clear();
  c.jobs = 1;
  for (unsigned char ch : canonical_text(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vswir
