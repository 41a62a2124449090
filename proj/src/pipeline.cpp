#include "vswir/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <fftw3.h>
#include <boost/version.hpp>

#include "csv.hpp"
#include "vswir/diagnostics.hpp"
#include "vswir/errors.hpp"
#include "vswir/kernels.hpp"
#include "vswir/synthetic.hpp"

namespace vswir {

namespace {

namespace fs = std::filesystem;

void check_same_grid(const std::vector<double>& a, const std::vector<double>& b, const std::string& what) {
  if (a.size() != b.size()) throw InputError(what + ": channel count differs from the lookup table");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-6 * std::max(1.0, std::abs(b[i]))) {
      throw InputError(what + ": wavelength " + std::to_string(i) + " differs from the lookup table");
    }
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { csv::write_text(path, j.dump(2) + "\n"); }

std::vector<int> retained_indices(const std::vector<bool>& mask) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

// Every `stride`-th value of one column.
std::vector<double> strided(const Eigen::MatrixXd& samples, Eigen::Index col, long stride) {
  std::vector<double> out;
  for (Eigen::Index r = 0; r < samples.rows(); r += stride) out.push_back(samples(r, col));
  return out;
}

std::vector<double> column(const Eigen::MatrixXd& samples, Eigen::Index col) {
  return strided(samples, col, 1);
}

// Thinning toward roughly independent draws, keeping at least 50 values.
long ks_stride(double tau, long rows) {
  const long cap = std::max(1L, rows / 50);
  return std::clamp(static_cast<long>(std::ceil(tau)), 1L, cap);
}

nlohmann::json ks_json(const KsResult& r) {
  return {{"d", r.d}, {"p", r.p}, {"loc", r.null.loc}, {"scale", r.null.scale}, {"clamped", r.null.clamped}};
}

std::string fmt(double v) {
  std::string s;
  csv::append(s, v);
  return s;
}

}  // namespace

Eigen::VectorXd first_guess_reflectance(const Eigen::VectorXd& y, const ForwardModel& model,
                                        const Eigen::Vector2d& atm, const ComponentSet& components) {
  const auto& lut = model.lut();
  const double aod = std::clamp(atm[0], lut.aod_grid().front(), lut.aod_grid().back());
  const double h2o = std::clamp(atm[1], lut.h2o_grid().front(), lut.h2o_grid().back());
  const LinearSubmodel lin = model.linearize(aod, h2o);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(y.size());
  for (const auto& c : components.components) avg += c.mean;
  avg /= static_cast<double>(components.components.size());
  const double a_max = lin.a_diag.cwiseAbs().maxCoeff();
  Eigen::VectorXd x0(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    x0[i] = lin.a_diag[i] > 1e-3 * a_max ? std::clamp((y[i] - lin.b[i]) / lin.a_diag[i], 0.0, 1.0) : avg[i];
  }
  return x0;
}

PreparedScene prepare_scene(const RetrievalConfig& cfg, const fs::path& radiance_path) {
  auto lut = load_lut(cfg.lut);
  const ComponentSet comps = read_components(cfg.components);
  check_same_grid(comps.wavelengths, lut->wavelengths(), cfg.components.string());
  Spectrum rad = load_spectrum(radiance_path);
  check_same_grid(rad.grid.wavelengths, lut->wavelengths(), radiance_path.string());

  Eigen::VectorXd e0;
  if (cfg.irradiance.empty()) {
    e0 = synthetic_solar_irradiance(lut->wavelengths());
  } else {
    Spectrum irr = load_spectrum(cfg.irradiance);
    check_same_grid(irr.grid.wavelengths, lut->wavelengths(), cfg.irradiance.string());
    e0 = irr.values;
  }
  const double mu0 = cfg.cos_solar_zenith > 0.0 ? cfg.cos_solar_zenith : default_cos_solar_zenith();
  ForwardModel model(lut, Geometry(mu0, e0));

  const MixtureComponent* surface = nullptr;
  if (cfg.component.empty()) {
    surface = &select_component(comps.components,
                                first_guess_reflectance(rad.values, model, cfg.atm_prior_mean, comps));
  } else {
    surface = &comps.by_label(cfg.component);
  }
  const GaussianPrior prior =
      assemble_prior(*surface, cfg.atm_prior_mean, SpdMatrix::diagonal(cfg.atm_prior_var));

  NoiseModel noise{cfg.snr, cfg.calib_frac,
                   Eigen::VectorXd::Constant(rad.values.size(), cfg.rt_model_var)};
  const auto obs_cov = build_noise_cov(rad.values, noise);
  RetrievalProblem problem = make_problem(rad.values, rad.grid.mask, prior, noise, model);
  return {std::move(problem), rad.grid, surface->label, obs_cov.degenerate_channels};
}

fs::path scene_dir(const RetrievalConfig& cfg, std::size_t index) {
  if (cfg.radiance.size() <= 1) return cfg.output_dir;
  return cfg.output_dir / cfg.radiance.at(index).stem();
}

void write_manifest(const fs::path& dir, const RetrievalConfig& cfg, const std::string& command,
                    std::uint64_t seed) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries()) config[k] = v;
  nlohmann::json j{{"tool", "vswir"},
                   {"version", kVersion},
                   {"command", command},
                   {"config_hash", config_hash(cfg)},
                   {"seed", seed},
                   {"config", config},
                   {"libraries",
                    {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"fftw", std::string(fftw_version)}}}};
  write_json(dir / "manifest.json", j);
}

nlohmann::json write_report(const fs::path& dir, const PreparedScene& scene, const OeResult& oe, const Chain& chain) {
  const fs::path out = dir / "report";
  fs::create_directories(out);
  const auto& grid = scene.grid;
  const auto& wl = grid.wavelengths;
  const Eigen::Index n = static_cast<Eigen::Index>(wl.size());
  const Eigen::MatrixXd& s = chain.samples;
  if (s.rows() < 100) throw InputError("report needs at least 100 kept samples, chain has " + std::to_string(s.rows()));
  const Eigen::Index ia = n, ih = n + 1;

  nlohmann::json rep;
  rep["schema_version"] = kReportSchemaVersion;
  rep["scene"] = {{"n_channels", n},
                  {"n_retained", grid.retained_count()},
                  {"component", scene.component_label},
                  {"degenerate_channels", scene.degenerate_channels}};
  const double final_cost = oe.cost_trace.empty() ? 0.0 : oe.cost_trace.back();
  rep["oe"] = {{"converged", oe.converged},
               {"iterations", oe.iterations},
               {"termination", oe.termination},
               {"extrapolated", oe.extrapolated},
               {"aod", oe.x_map.aod},
               {"h2o", oe.x_map.h2o},
               {"negative_atm", oe.x_map.aod < 0.0 || oe.x_map.h2o < 0.0},
               {"final_cost", final_cost}};
  const McmcConfig& mc = chain.config;
  rep["mcmc"] = {{"n_samples", mc.n_samples},
                 {"burn_in", mc.burn_in},
                 {"thin", mc.thin},
                 {"kept", s.rows()},
                 {"seed", mc.seed},
                 {"refl_proposal", to_string(mc.refl_proposal)},
                 {"eps", mc.refl_proposal == ReflProposal::laplace ? mc.eps2 : mc.eps1},
                 {"truncation_correction", mc.truncation_correction},
                 {"acceptance", {{"atm", chain.atm.rate()}, {"refl", chain.refl.rate()}, {"overall", chain.overall_acceptance()}}},
                 {"truncation_fallbacks", chain.truncation_fallbacks},
                 {"initial_projected", chain.initial_projected}};

  // Effective sample sizes.
  const EssReport er = ess(s, 0, grid.mask);
  rep["ess"] = {{"refl_min", er.summary.refl_min},
                {"refl_median", er.summary.refl_med},
                {"refl_max", er.summary.refl_max},
                {"aod", er.summary.aod},
                {"h2o", er.summary.h2o}};
  {
    std::string t = "parameter,wavelength_nm,retained,tau,ess\n";
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const bool refl = j < n;
      t += refl ? "refl," + fmt(wl[static_cast<std::size_t>(j)]) + (grid.mask[static_cast<std::size_t>(j)] ? ",1," : ",0,")
                : std::string(j == ia ? "aod" : "h2o") + ",,1,";
      t += fmt(er.tau[j]) + "," + fmt(er.ess[j]) + "\n";
    }
    csv::write_text(out / "ess.csv", t);
  }

  // Posterior moments against the MAP and the Laplace variances.
  const ParameterSummary ps = posterior_summary(s, oe.x_map.stacked());
  const Eigen::VectorXd lap_var = oe.gamma_laplace.values().diagonal();
  {
    std::string t = "parameter,wavelength_nm,retained,map,laplace_var,mcmc_mean,mcmc_var,rel_diff\n";
    const Eigen::VectorXd xm = oe.x_map.stacked();
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const bool refl = j < n;
      t += refl ? "refl," + fmt(wl[static_cast<std::size_t>(j)]) + (grid.mask[static_cast<std::size_t>(j)] ? ",1," : ",0,")
                : std::string(j == ia ? "aod" : "h2o") + ",,1,";
      t += fmt(xm[j]) + "," + fmt(lap_var[j]) + "," + fmt(ps.mean[j]) + "," + fmt(ps.variance[j]) + "," +
           fmt(ps.rel_diff[j]) + "\n";
    }
    csv::write_text(out / "variance.csv", t);
  }
  for (Eigen::Index j : {ia, ih}) {
    rep["atm_posterior"][j == ia ? "aod" : "h2o"] = {{"mean", ps.mean[j]},
                                                     {"variance", ps.variance[j]},
                                                     {"map", j == ia ? oe.x_map.aod : oe.x_map.h2o},
                                                     {"laplace_variance", lap_var[j]},
                                                     {"min", s.col(j).minCoeff()}};
  }

  // Covariance comparison on the retained reflectance block.
  const std::vector<int> ret = retained_indices(grid.mask);
  rep["cov_compare"] = nullptr;
  rep["eigen_quotient"] = nullptr;
  std::vector<EigenDirection> eq;
  if (static_cast<Eigen::Index>(ret.size()) < s.rows()) {
    const Eigen::MatrixXd sub = s(Eigen::all, ret);
    try {
      const SpdMatrix gm = SpdMatrix::symmetrized(kernels::sample_covariance(sub), "sample covariance");
      const SpdMatrix gl = SpdMatrix::symmetrized(oe.gamma_laplace.values()(ret, ret), "Laplace block");
      const SpdMatrix gp = SpdMatrix::symmetrized(scene.problem.prior.refl_cov().values()(ret, ret), "prior block");
      const CovCompare cc = cov_compare(gm, gl, gp);
      rep["cov_compare"] = {{"scope", "retained_reflectance"},
                            {"dim", ret.size()},
                            {"d_tr", cc.d_tr},
                            {"d_norm", cc.d_norm},
                            {"d_f_raw", cc.d_f_raw},
                            {"d_f_normalized", cc.d_f_normalized}};
      eq = eigen_quotient(gm, gl);
      double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
      long reliable = 0;
      for (const auto& d : eq) {
        if (!d.reliable) continue;
        ++reliable;
        qmin = std::min(qmin, d.quotient);
        qmax = std::max(qmax, d.quotient);
      }
      rep["eigen_quotient"] = {{"n_reliable", reliable}, {"min", qmin}, {"max", qmax}};
    } catch (const FactorizationError&) {
      // Too few distinct draws for a full-rank sample covariance; left null.
    }
  }
  {
    std::string t = "rank,lambda,quotient,reliable\n";
    for (std::size_t k = 0; k < eq.size(); ++k) {
      t += std::to_string(k + 1) + "," + fmt(eq[k].lambda) + "," + fmt(eq[k].quotient) + (eq[k].reliable ? ",1\n" : ",0\n");
    }
    csv::write_text(out / "quotient.csv", t);
  }

  // Kolmogorov-Smirnov tests on draws thinned by their autocorrelation time.
  {
    std::string t = "parameter,wavelength_nm,null,stride,n,d,p\n";
    long tested = 0, rejected = 0;
    double min_p = 1.0;
    for (int j : ret) {
      const long stride = ks_stride(er.tau[j], s.rows());
      const auto series = strided(s, j, stride);
      if (series.size() < 50) continue;
      const KsResult r = ks_normality(series, NullDist::normal);
      ++tested;
      rejected += r.p < 0.05;
      min_p = std::min(min_p, r.p);
      t += "refl," + fmt(wl[static_cast<std::size_t>(j)]) + ",normal," + std::to_string(stride) + "," +
           std::to_string(series.size()) + "," + fmt(r.d) + "," + fmt(r.p) + "\n";
    }
    rep["ks"]["refl"] = {{"n_tested", tested}, {"n_rejected_at_0_05", rejected}, {"min_p", min_p}};
    for (Eigen::Index j : {ia, ih}) {
      const char* name = j == ia ? "aod" : "h2o";
      const long stride = ks_stride(er.tau[j], s.rows());
      const auto series = strided(s, j, stride);
      nlohmann::json entry{{"stride", stride}, {"n", series.size()}};
      for (NullDist kind : {NullDist::normal, NullDist::truncated_normal_at_zero}) {
        const KsResult r = ks_normality(series, kind);
        entry[to_string(kind)] = ks_json(r);
        t += std::string(name) + ",," + to_string(kind) + "," + std::to_string(stride) + "," +
             std::to_string(series.size()) + "," + fmt(r.d) + "," + fmt(r.p) + "\n";
      }
      rep["ks"][name] = entry;
    }
    rep["ks"]["params_fitted"] = true;
    csv::write_text(out / "ks.csv", t);
  }

  // Q-Q data for the atmospheric marginals against both nulls.
  for (Eigen::Index j : {ia, ih}) {
    const auto series = column(s, j);
    const auto qn = qq_data(series, NullDist::normal);
    const auto qt = qq_data(series, NullDist::truncated_normal_at_zero);
    std::string t = "sample,normal,truncated_normal\n";
    for (std::size_t k = 0; k < qn.size(); ++k) {
      t += fmt(qn[k].sample) + "," + fmt(qn[k].theoretical) + "," + fmt(qt[k].theoretical) + "\n";
    }
    csv::write_text(out / (j == ia ? "qq_aod.csv" : "qq_h2o.csv"), t);
  }

  // Trace of the atmospheric block and log posterior.
  {
    std::string t = "kept_index,aod,h2o,log_posterior\n";
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      t += std::to_string(r) + "," + fmt(s(r, ia)) + "," + fmt(s(r, ih)) + "," +
           fmt(chain.log_posterior_trace[static_cast<std::size_t>(r)]) + "\n";
    }
    csv::write_text(out / "trace.csv", t);
  }

  {
    const auto aod = column(s, ia), h2o = column(s, ih);
    const Histogram2d h = histogram2d(aod, h2o, 30);
    std::string t = "aod_lo,aod_hi,h2o_lo,h2o_hi,count\n";
    for (Eigen::Index a = 0; a < h.counts.rows(); ++a)
      for (Eigen::Index b = 0; b < h.counts.cols(); ++b)
        t += fmt(h.x_edges[a]) + "," + fmt(h.x_edges[a + 1]) + "," + fmt(h.y_edges[b]) + "," + fmt(h.y_edges[b + 1]) +
             "," + fmt(h.counts(a, b)) + "\n";
    csv::write_text(out / "atm_hist.csv", t);
  }

  rep["files"] = {{"trace", "trace.csv"},       {"ess", "ess.csv"},         {"variance", "variance.csv"},
                  {"quotient", "quotient.csv"}, {"qq_aod", "qq_aod.csv"},   {"qq_h2o", "qq_h2o.csv"},
                  {"ks", "ks.csv"},             {"atm_hist", "atm_hist.csv"}};
  write_json(out / "report.json", rep);
  return rep;
}

SceneResult run_scene(const RetrievalConfig& cfg, std::size_t index, const std::string& command) {
  SceneResult res;
  res.out_dir = scene_dir(cfg, index);
  res.seed = cfg.mcmc.seed + index;
  fs::create_directories(res.out_dir);
  write_manifest(res.out_dir, cfg, command, res.seed);

  const PreparedScene scene = prepare_scene(cfg, cfg.radiance.at(index));
  OeOptions opts;
  opts.max_iterations = cfg.oe_max_iterations;
  res.oe = solve_map(scene.problem, opts);
  write_oe_result(res.out_dir / "oe", *res.oe);
  if (cfg.mode == RunMode::oe_only) return res;

  McmcConfig mc = cfg.mcmc;
  mc.seed = res.seed;
  if (cfg.tune_target > 0.0) {
    const TuningResult tr =
        tune_proposal_scale(scene.problem, *res.oe, mc, cfg.tune_target, std::min(20'000L, mc.n_samples));
    (mc.refl_proposal == ReflProposal::laplace ? mc.eps2 : mc.eps1) = tr.eps;
  }
  res.chain = run_chain(scene.problem, *res.oe, mc);
  write_chain(res.out_dir / "chain", *res.chain);
  if (cfg.mode == RunMode::compare) res.report = write_report(res.out_dir, scene, *res.oe, *res.chain);
  return res;
}

std::vector<SceneResult> run_batch(const RetrievalConfig& cfg, const std::string& command) {
  const auto count = static_cast<long>(cfg.radiance.size());
  std::vector<SceneResult> results(cfg.radiance.size());
  std::vector<std::exception_ptr> errors(cfg.radiance.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
  for (long k = 0; k < count; ++k) {
    try {
      results[static_cast<std::size_t>(k)] = run_scene(cfg, static_cast<std::size_t>(k), command);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

SceneResult run_compare(const RetrievalConfig& cfg) {
  RetrievalConfig c = cfg;
  c.mode = RunMode::compare;
  return run_scene(c, 0, "compare");
}

nlohmann::json rebuild_report(const RetrievalConfig& cfg, std::size_t index) {
  const fs::path dir = scene_dir(cfg, index);
  const PreparedScene scene = prepare_scene(cfg, cfg.radiance.at(index));
  const OeResult oe = read_oe_result(dir / "oe");
  const Chain chain = read_chain(dir / "chain");
  if (chain.samples.cols() != scene.problem.prior.dim()) {
    throw InputError(dir.string() + ": chain dimension does not match the scene");
  }
  return write_report(dir, scene, oe, chain);
}

}  // namespace vswir
