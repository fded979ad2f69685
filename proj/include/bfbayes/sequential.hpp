#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "bfbayes/m0.hpp"
#include "bfbayes/m1.hpp"
#include "bfbayes/rng.hpp"
#include "bfbayes/types.hpp"

namespace bfbayes {

struct ModelPosterior {
  double pr_m0 = 0.5;
  double pr_m1 = 0.5;
};

// Bayes update on the two-model space, stabilized in log space.
ModelPosterior model_posterior(double log_m0, double log_m1,
                               const ModelPosterior& prior);

enum class Decision { retain_h0, reject_h0 };

// Reject H0 iff pr_m1 > p (strict).
Decision decide(double pr_m1, double p);
const char* to_string(Decision d);

// Engine failures re-thrown with the step at which they arose.
struct AnalysisError : std::runtime_error {
  AnalysisError(int step_, const std::string& msg);
  int step;
};

struct AnalysisResult {
  int steps = 3;  // 2 for the single-historical-experiment variant
  ModelPosterior step2_posterior;
  std::optional<ModelPosterior> step3_posterior;
  double log_m0_y2 = 0.0;
  double log_m1_y2 = 0.0;
  std::optional<double> log_m0_y3;
  std::optional<double> log_m1_y3;
  double threshold = 0.8;
  Decision decision = Decision::retain_h0;

  McmcDiagnostics mcmc_step1;
  std::optional<McmcDiagnostics> mcmc_step2;
  IgFit fit_control_1, fit_treated_1;
  std::optional<IgFit> fit_control_2, fit_treated_2;
  QuadDiagnostics quad_y2;
  std::optional<QuadDiagnostics> quad_y3;

  const ModelPosterior& final_posterior() const {
    return steps == 3 ? *step3_posterior : step2_posterior;
  }
};

// Full procedure: y1 and y2 are the historical experiments (weighted by
// w1, w2), y3 the experiment of interest. The flat model prior enters at
// step 2; the step-2 model posterior is the model prior at step 3.
AnalysisResult run_three_step(const Experiment& y1, const Experiment& y2,
                              const Experiment& y3, const AnalysisConfig& cfg,
                              RngStream rng);

// Variant for a single historical experiment: stops after step 2 and
// reports the step-2 posterior.
AnalysisResult run_two_step(const Experiment& y1, const Experiment& y2,
                            const AnalysisConfig& cfg, RngStream rng);

}  // namespace bfbayes
