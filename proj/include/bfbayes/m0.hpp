#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bfbayes/quadrature.hpp"
#include "bfbayes/rng.hpp"
#include "bfbayes/types.hpp"

namespace bfbayes {

// Inverse-gamma approximation of an equal-means variance posterior,
// maximum-likelihood fitted to an MCMC sample.
struct IgFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  int n_samples = 0;
  bool converged = false;
  double residual = 0.0;  // |log beta_hat - psi(alpha_hat) - mean(log x_i)|
};

// Conditional law of the shared mean given the variance pair.
struct MuConditional {
  double mean = 0.0;
  double variance = 0.0;
};

// Parameter prior carried into step 2 or 3 of the equal-means pipeline:
// the absorbed experiment summaries plus the fitted variance priors.
struct M0StepPrior {
  std::vector<ExperimentSummary> history;
  IgFit var_control;
  IgFit var_treated;
};

struct McmcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precision-weighted posterior mean and variance of mu given (sc2, st2),
// accumulated over the first `step` experiments of `summaries`.
MuConditional mu_conditional(int step, double sc2, double st2,
                             std::span<const ExperimentSummary> summaries);

// Same, over every summary supplied.
MuConditional mu_conditional(double sc2, double st2,
                             std::span<const ExperimentSummary> summaries);

// Unnormalized log posterior of (sc2, st2) after absorbing the first
// experiment under the Jeffreys prior; mu is already integrated out.
double m0_step1_log_target(double sc2, double st2, const ExperimentSummary& s);

// Log predictive density of `data` given the variance pair, with mu
// integrated analytically against its conditional prior built from
// `history`. Includes all normalization constants.
double m0_log_predictive_given_variances(const ExperimentSummary& data,
                                         std::span<const ExperimentSummary> history,
                                         double sc2, double st2);

// Unnormalized log posterior of (sc2, st2) for the second-step MCMC:
// predictive of y2 times the step-1 fitted inverse-gamma priors.
double m0_step2_log_target(double sc2, double st2, const ExperimentSummary& s2,
                           const M0StepPrior& step1);

struct McmcDiagnostics {
  std::vector<double> chain_acceptance;  // post-burn-in acceptance per chain
  bool between_chain_ok = true;
  double log_draw_correlation = 0.0;     // Pearson r of (log sc2, log st2) draws
};

struct VarianceDraws {
  std::vector<double> control;  // sc2 draws, chains concatenated in order
  std::vector<double> treated;  // st2 draws
  McmcDiagnostics diagnostics;
};

// Random-walk Metropolis on (log sc2, log st2) with Gaussian proposals.
// The step scale adapts toward acceptance in [0.2, 0.5] during burn-in and
// is frozen afterwards. Throws McmcError if no finite starting point exists.
VarianceDraws mcmc_sample_variances(
    const std::function<double(double, double)>& log_target,
    const McmcConfig& cfg, RngStream rng, double init_sc2, double init_st2);

// Maximum-likelihood inverse-gamma fit; safeguarded Newton on the shape,
// moment-matching start. Needs >= 100 positive draws with nonzero spread.
IgFit fit_inverse_gamma(std::span<const double> draws);

struct QuadDiagnostics {
  double rel_error = 0.0;
  long evals = 0;
};

// log Pr(data | M0, prior): mu integrated analytically, the variance pair by
// adaptive quadrature on the unit square, each axis mapped through
// s2 = scale * u / (1 - u) with scale the fitted prior mode.
double m0_log_marginal(const ExperimentSummary& data, const M0StepPrior& prior,
                       const QuadConfig& quad, QuadDiagnostics* diag = nullptr);

struct M0StepFit {
  IgFit control;
  IgFit treated;
  McmcDiagnostics mcmc;
};

// MCMC plus inverse-gamma fits for step 1 (Jeffreys posterior of y1) and
// step 2 (variance-pair posterior given y2 and the step-1 prior).
M0StepFit m0_step1_posterior(const ExperimentSummary& y1, const McmcConfig& cfg,
                             RngStream rng);
M0StepFit m0_step2_posterior(const ExperimentSummary& y2, const M0StepPrior& step1,
                             const McmcConfig& cfg, RngStream rng);

}  // namespace bfbayes
