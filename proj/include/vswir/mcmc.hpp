#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vswir/linalg_spd.hpp"
#include "vswir/model.hpp"
#include "vswir/oe.hpp"

namespace vswir {

enum class ReflProposal {
  /// eps2 * Laplace covariance, fixed for the whole run.
  laplace,
  /// eps1 * linear-inversion posterior covariance at the current atmosphere.
  linear_inversion,
};

std::string to_string(ReflProposal p);
ReflProposal refl_proposal_from_string(const std::string& s);

struct McmcConfig {
  long n_samples = 2'000'000;
  long thin = 10;
  long burn_in = 200'000;
  double eps2 = 0.11;
  double eps1 = 0.14;
  long adapt_start = 1000;
  double eps0 = 1e-3;
  double eps_am = 1e-3;
  double s2 = 2.38 * 2.38 / 2.0;
  ReflProposal refl_proposal = ReflProposal::laplace;
  std::uint64_t seed = 1;
  /// Include the ratio of truncation masses in the atmospheric acceptance
  /// probability. Turning it off runs the uncorrected truncated proposal.
  bool truncation_correction = true;
  /// Block switches; a disabled block stays at its initial value.
  bool sample_atm = true;
  bool sample_refl = true;

  /// Throws InputError on nonpositive sizes or scales.
  void validate() const;
  long kept_count() const { return n_samples > burn_in ? (n_samples - burn_in) / thin : 0; }
};

struct BlockTally {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct Chain {
  /// kept x (n + 2), one thinned post-burn-in state per row.
  Eigen::MatrixXd samples;
  std::vector<double> log_posterior_trace;
  BlockTally atm;
  BlockTally refl;
  McmcConfig config;
  /// Initial state after projection onto the support.
  StateVector initial;
  bool initial_projected = false;
  long truncation_fallbacks = 0;

  double overall_acceptance() const;
};

/// Current chain position with the pieces of its log density cached so each
/// block update only recomputes what it changes.
struct ChainState {
  StateVector x;
  AtmSpectra atm;
  double refl_quad = 0.0;
  double atm_quad = 0.0;
  double misfit = 0.0;

  double log_post() const { return -0.5 * (refl_quad + atm_quad + misfit); }
};

/// Unnormalized log posterior, -cost(x). Returns -inf outside the support:
/// negative or out-of-table atmosphere, or a singular forward model.
double log_posterior(const StateVector& state, const RetrievalProblem& problem);

/// Throws DomainError when the state is outside the support.
ChainState make_chain_state(const StateVector& state, const RetrievalProblem& problem);

/// u < exp(log_ratio) for u ~ U[0, 1).
bool metropolis_accept(double log_ratio, Rng& rng);

/// log of [pi(z) q(x | z)] / [pi(x) q(z | x)] for an atmospheric proposal z
/// drawn from N(x_atm, gamma_atm) truncated to the nonnegative quadrant.
/// Fills `proposal` when z is inside the support.
double atm_log_accept_ratio(const ChainState& current, const Eigen::Vector2d& z,
                            const SpdMatrix& gamma_atm, const RetrievalProblem& problem,
                            bool truncation_correction, ChainState* proposal = nullptr);

/// One atmospheric Metropolis-Hastings update; reflectances unchanged.
bool step_atm(ChainState& current, const SpdMatrix& gamma_atm, const RetrievalProblem& problem,
              const McmcConfig& cfg, Rng& rng, long* fallbacks = nullptr);

/// One reflectance random-walk update with the atmosphere held fixed.
bool step_refl(ChainState& current, const SpdMatrix& proposal_cov, const RetrievalProblem& problem,
               Rng& rng);

/// Running mean and covariance of the atmospheric history (Welford).
class AtmHistory {
 public:
  void push(const Eigen::Vector2d& x);
  long count() const { return count_; }
  const Eigen::Vector2d& mean() const { return mean_; }
  /// Unbiased sample covariance; zero for fewer than two samples.
  Eigen::Matrix2d covariance() const;

 private:
  long count_ = 0;
  Eigen::Vector2d mean_ = Eigen::Vector2d::Zero();
  Eigen::Matrix2d m2_ = Eigen::Matrix2d::Zero();
};

/// Adaptive atmospheric proposal covariance for iteration i:
///   eps0 I                                   i <= adapt_start
///   s2 cov(x^(0..i-1)) + s2 eps_am I          otherwise
/// `history` must already hold x^(0) .. x^(i-1).
SpdMatrix adapt_cov(const AtmHistory& history, long i, const McmcConfig& cfg);
SpdMatrix adapt_cov(std::span<const Eigen::Vector2d> history, long i, const McmcConfig& cfg);

/// Block Metropolis from the OE solution. Negative MAP atmosphere coordinates
/// start at 1e-6; out-of-table ones at the nearest grid edge.
Chain run_chain(const RetrievalProblem& problem, const OeResult& oe, const McmcConfig& cfg);

/// Independent chains, one per seed, run in parallel.
std::vector<Chain> run_chains(const RetrievalProblem& problem, const OeResult& oe,
                              const McmcConfig& cfg, const std::vector<std::uint64_t>& seeds);

struct TuningResult {
  double eps = 0.0;
  double acceptance = 0.0;
  std::vector<std::pair<double, double>> history;
};

/// Bisection on log(eps) for the active reflectance proposal scale until the
/// overall acceptance rate of short pilot chains is within `tol` of `target`.
TuningResult tune_proposal_scale(const RetrievalProblem& problem, const OeResult& oe,
                                 McmcConfig cfg, double target = 0.23, long pilot_iterations = 20000,
                                 int max_rounds = 14, double tol = 0.01);

}  // namespace vswir
