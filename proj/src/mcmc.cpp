#include "vswir/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "vswir/errors.hpp"

namespace vswir {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(ReflProposal p) {
  return p == ReflProposal::laplace ? "laplace" : "linear_inversion";
}

ReflProposal refl_proposal_from_string(const std::string& s) {
  if (s == "laplace") return ReflProposal::laplace;
  if (s == "linear_inversion") return ReflProposal::linear_inversion;
  throw InputError("unknown reflectance proposal '" + s + "' (laplace | linear_inversion)");
}

void McmcConfig::validate() const {
  if (n_samples <= 0 || thin <= 0 || burn_in < 0 || burn_in >= n_samples) {
    throw InputError("mcmc: need n_samples > burn_in >= 0 and thin > 0");
  }
  if (!(eps1 > 0 && eps2 > 0 && eps0 > 0 && eps_am > 0 && s2 > 0) || adapt_start < 0) {
    throw InputError("mcmc: proposal scales must be positive");
  }
}

double Chain::overall_acceptance() const {
  const auto proposed = atm.proposed + refl.proposed;
  return proposed ? static_cast<double>(atm.accepted + refl.accepted) / static_cast<double>(proposed) : 0.0;
}

namespace {

bool in_support(double aod, double h2o, const AtmLookupTable& lut) {
  return aod >= 0.0 && h2o >= 0.0 && lut.contains(aod, h2o);
}

// Misfit for refl under fixed spectra; +inf when the model is singular.
double misfit_or_inf(const Eigen::VectorXd& refl, const AtmSpectra& atm, const RetrievalProblem& p) {
  try {
    return p.obs.misfit(p.model.radiance(refl, atm));
  } catch (const SingularityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double log_posterior(const StateVector& state, const RetrievalProblem& problem) {
  if (!in_support(state.aod, state.h2o, problem.model.lut())) return kNegInf;
  try {
    return -cost(state, problem, RangePolicy::strict);
  } catch (const SingularityError&) {
    return kNegInf;
  }
}

ChainState make_chain_state(const StateVector& state, const RetrievalProblem& problem) {
  if (!in_support(state.aod, state.h2o, problem.model.lut())) {
    throw DomainError("chain state outside the support (aod, h2o >= 0 and inside the lookup table)");
  }
  ChainState cs;
  cs.x = state;
  cs.atm = problem.model.atm(state.aod, state.h2o, RangePolicy::strict);
  cs.refl_quad = problem.prior.refl_quad(state.refl);
  cs.atm_quad = problem.prior.atm_quad(state.atm());
  cs.misfit = misfit_or_inf(state.refl, cs.atm, problem);
  if (!std::isfinite(cs.misfit)) throw DomainError("chain state has a singular forward model");
  return cs;
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  if (!(log_ratio > kNegInf)) return false;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return std::log(unif(rng)) < log_ratio;
}

double atm_log_accept_ratio(const ChainState& current, const Eigen::Vector2d& z,
                            const SpdMatrix& gamma_atm, const RetrievalProblem& problem,
                            bool truncation_correction, ChainState* proposal) {
  if (!in_support(z[0], z[1], problem.model.lut())) return kNegInf;
  ChainState next = current;
  next.x.aod = z[0];
  next.x.h2o = z[1];
  next.atm = problem.model.atm(z[0], z[1], RangePolicy::strict);
  next.atm_quad = problem.prior.atm_quad(z);
  next.misfit = misfit_or_inf(next.x.refl, next.atm, problem);
  if (!std::isfinite(next.misfit)) return kNegInf;
  double log_ratio = next.log_post() - current.log_post();
  if (truncation_correction) {
    // q(z | x) = N(z; x, G) / P(x), so the ratio picks up P(x) / P(z).
    const double mass_here = nonneg_orthant_mass(current.x.atm(), gamma_atm);
    const double mass_there = nonneg_orthant_mass(z, gamma_atm);
    log_ratio += std::log(mass_here) - std::log(mass_there);
  }
  if (proposal) *proposal = std::move(next);
  return log_ratio;
}

bool step_atm(ChainState& current, const SpdMatrix& gamma_atm, const RetrievalProblem& problem,
              const McmcConfig& cfg, Rng& rng, long* fallbacks) {
  const TruncatedDraw draw = sample_truncated_mvn_nonneg(current.x.atm(), gamma_atm, rng);
  if (draw.fallback && fallbacks) ++*fallbacks;
  ChainState next;
  const double log_ratio =
      atm_log_accept_ratio(current, draw.value, gamma_atm, problem, cfg.truncation_correction, &next);
  if (!metropolis_accept(log_ratio, rng)) return false;
  current = std::move(next);
  return true;
}

bool step_refl(ChainState& current, const SpdMatrix& proposal_cov, const RetrievalProblem& problem,
               Rng& rng) {
  const Eigen::VectorXd z = sample_mvn(current.x.refl, proposal_cov, rng);
  const double misfit = misfit_or_inf(z, current.atm, problem);
  if (!std::isfinite(misfit)) return false;
  const double refl_quad = problem.prior.refl_quad(z);
  const double log_ratio = -0.5 * ((refl_quad + misfit) - (current.refl_quad + current.misfit));
  if (!metropolis_accept(log_ratio, rng)) return false;
  current.x.refl = z;
  current.refl_quad = refl_quad;
  current.misfit = misfit;
  return true;
}

void AtmHistory::push(const Eigen::Vector2d& x) {
  ++count_;
  const Eigen::Vector2d delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_).transpose();
}

Eigen::Matrix2d AtmHistory::covariance() const {
  if (count_ < 2) return Eigen::Matrix2d::Zero();
  Eigen::Matrix2d c = m2_ / static_cast<double>(count_ - 1);
  return 0.5 * (c + c.transpose());
}

SpdMatrix adapt_cov(const AtmHistory& history, long i, const McmcConfig& cfg) {
  if (i < 0) throw InputError("adapt_cov: negative iteration");
  if (i <= cfg.adapt_start) return SpdMatrix(cfg.eps0 * Eigen::Matrix2d::Identity());
  if (history.count() < i) throw InputError("adapt_cov: history shorter than iteration index");
  Eigen::Matrix2d g = cfg.s2 * history.covariance() + cfg.s2 * cfg.eps_am * Eigen::Matrix2d::Identity();
  return SpdMatrix(Eigen::MatrixXd(g), "adaptive atmospheric covariance");
}

SpdMatrix adapt_cov(std::span<const Eigen::Vector2d> history, long i, const McmcConfig& cfg) {
  if (i < 0) throw InputError("adapt_cov: negative iteration");
  if (static_cast<long>(history.size()) < i) {
    throw InputError("adapt_cov: history shorter than iteration index");
  }
  AtmHistory h;
  for (long k = 0; k < i; ++k) h.push(history[static_cast<std::size_t>(k)]);
  return adapt_cov(h, i, cfg);
}

namespace {

StateVector project_to_support(const StateVector& x, const AtmLookupTable& lut, bool* projected) {
  StateVector out = x;
  const auto& ag = lut.aod_grid();
  const auto& hg = lut.h2o_grid();
  out.aod = std::clamp(std::max(x.aod, 1e-6), std::max(ag.front(), 0.0), ag.back());
  out.h2o = std::clamp(std::max(x.h2o, 1e-6), std::max(hg.front(), 0.0), hg.back());
  *projected = out.aod != x.aod || out.h2o != x.h2o;
  return out;
}

SpdMatrix linear_inversion_proposal(const ChainState& s, const RetrievalProblem& p, double eps1) {
  const LinearSubmodel lin = p.model.linearize(s.x.aod, s.x.h2o);
  const SpdMatrix post = linear_posterior_cov(lin.a_diag, p.prior.refl_cov(), p.obs.variance, p.obs.retained);
  return post.scaled(eps1);
}

}  // namespace

Chain run_chain(const RetrievalProblem& problem, const OeResult& oe, const McmcConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = problem.refl_dim();
  if (oe.x_map.refl.size() != n || oe.gamma_laplace.dim() != n + 2) {
    throw InputError("run_chain: OE result does not match the problem dimension");
  }
  Rng rng(cfg.seed);
  Chain chain;
  chain.config = cfg;
  chain.initial = project_to_support(oe.x_map, problem.model.lut(), &chain.initial_projected);
  ChainState state = make_chain_state(chain.initial, problem);

  std::optional<SpdMatrix> refl_prop;
  if (cfg.refl_proposal == ReflProposal::laplace) {
    refl_prop = oe.gamma_laplace.block(0, n).scaled(cfg.eps2);
  } else {
    refl_prop = linear_inversion_proposal(state, problem, cfg.eps1);
  }
  Eigen::Vector2d prop_atm = state.x.atm();

  const long kept = cfg.kept_count();
  chain.samples.resize(kept, n + 2);
  chain.log_posterior_trace.reserve(static_cast<std::size_t>(kept));

  AtmHistory history;
  history.push(state.x.atm());
  long row = 0;
  for (long i = 1; i <= cfg.n_samples; ++i) {
    if (cfg.sample_atm) {
      const SpdMatrix gamma_atm = adapt_cov(history, i, cfg);
      ++chain.atm.proposed;
      if (step_atm(state, gamma_atm, problem, cfg, rng, &chain.truncation_fallbacks)) ++chain.atm.accepted;
    }
    if (cfg.sample_refl) {
      if (cfg.refl_proposal == ReflProposal::linear_inversion && state.x.atm() != prop_atm) {
        refl_prop = linear_inversion_proposal(state, problem, cfg.eps1);
        prop_atm = state.x.atm();
      }
      ++chain.refl.proposed;
      if (step_refl(state, *refl_prop, problem, rng)) ++chain.refl.accepted;
    }
    history.push(state.x.atm());
    if (i > cfg.burn_in && (i - cfg.burn_in) % cfg.thin == 0 && row < kept) {
      chain.samples.row(row).head(n) = state.x.refl.transpose();
      chain.samples(row, n) = state.x.aod;
      chain.samples(row, n + 1) = state.x.h2o;
      chain.log_posterior_trace.push_back(state.log_post());
      ++row;
    }
  }
  return chain;
}

std::vector<Chain> run_chains(const RetrievalProblem& problem, const OeResult& oe,
                              const McmcConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  std::vector<Chain> chains(seeds.size());
  std::vector<std::string> errors(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    McmcConfig c = cfg;
    c.seed = seeds[k];
    try {
      chains[k] = run_chain(problem, oe, c);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("run_chains: " + e);
  }
  return chains;
}

TuningResult tune_proposal_scale(const RetrievalProblem& problem, const OeResult& oe, McmcConfig cfg,
                                 double target, long pilot_iterations, int max_rounds, double tol) {
  cfg.n_samples = pilot_iterations;
  cfg.burn_in = pilot_iterations - 1;
  cfg.thin = 1;
  double& eps = cfg.refl_proposal == ReflProposal::laplace ? cfg.eps2 : cfg.eps1;
  double lo = std::log(1e-4);
  double hi = std::log(10.0);
  TuningResult result;
  result.eps = eps;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int round = 0; round < max_rounds; ++round) {
    const Chain pilot = run_chain(problem, oe, cfg);
    const double acc = pilot.overall_acceptance();
    result.history.emplace_back(eps, acc);
    if (std::abs(acc - target) < best_gap) {
      best_gap = std::abs(acc - target);
      result.eps = eps;
      result.acceptance = acc;
    }
    if (best_gap <= tol) break;
    // Acceptance falls as the proposal widens.
    if (acc > target) {
      lo = std::log(eps);
    } else {
      hi = std::log(eps);
    }
    eps = std::exp(0.5 * (lo + hi));
  }
  return result;
}

}  // namespace vswir
