#include "bfbayes/sequential.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bfbayes {

ModelPosterior model_posterior(double log_m0, double log_m1, const ModelPosterior& prior) {
  if (!(prior.pr_m0 >= 0.0) || !(prior.pr_m1 >= 0.0))
    throw std::invalid_argument("model prior must be nonnegative");
  if (prior.pr_m0 == 0.0 && prior.pr_m1 == 0.0)
    throw std::invalid_argument("model prior has zero total mass");
  if (!std::isfinite(log_m0) || !std::isfinite(log_m1))
    throw std::invalid_argument("log marginals must be finite");
  if (prior.pr_m0 == 0.0) return {0.0, 1.0};
  if (prior.pr_m1 == 0.0) return {1.0, 0.0};
  const double a0 = std::log(prior.pr_m0) + log_m0;
  const double a1 = std::log(prior.pr_m1) + log_m1;
  const double top = std::max(a0, a1);
  const double e0 = std::exp(a0 - top);
  const double e1 = std::exp(a1 - top);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

Decision decide(double pr_m1, double p) {
  if (!(pr_m1 >= 0.0) || !(pr_m1 <= 1.0) || !(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("decide: arguments must be in [0, 1]");
  return pr_m1 > p ? Decision::reject_h0 : Decision::retain_h0;
}

const char* to_string(Decision d) {
  return d == Decision::reject_h0 ? "reject_h0" : "retain_h0";
}

AnalysisError::AnalysisError(int step_, const std::string& msg)
    : std::runtime_error("step " + std::to_string(step_) + ": " + msg), step(step_) {}

namespace {

template <typename F>
auto at_step(int step, F&& f) {
  try {
    return f();
  } catch (const AnalysisError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw AnalysisError(step, e.what());
  } catch (const std::exception& e) {
    throw AnalysisError(step, e.what());
  }
}

void validate_inputs(std::span<const Experiment* const> experiments,
                     const AnalysisConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    const std::string tag = "experiment " + std::to_string(i + 1);
    validate_arm(experiments[i]->control, tag + " control arm");
    validate_arm(experiments[i]->treated, tag + " treated arm");
    for (std::size_t j = i + 1; j < experiments.size(); ++j)
      if (!experiments[i]->label.empty() && experiments[i]->label == experiments[j]->label)
        throw std::invalid_argument("experiment labels must be unique: " + experiments[i]->label);
  }
}

struct StepTwoState {
  AnalysisResult result;
  ExperimentSummary s1, s2;
  M1State m1_step1;
  M0StepPrior m0_prior2;
};

// Steps 1 and 2 are shared between the two- and three-step procedures.
StepTwoState run_through_step2(const Experiment& y1, const Experiment& y2,
                               const AnalysisConfig& cfg, RngStream& rng) {
  StepTwoState st;
  st.result.threshold = cfg.threshold;

  const ExperimentSummary s1 = at_step(1, [&] {
    return apply_weight(summarize(y1), cfg.w1, cfg.scale_gamma);
  });
  const ExperimentSummary s2 = at_step(2, [&] {
    return apply_weight(summarize(y2), cfg.w2, cfg.scale_gamma);
  });
  st.s1 = s1;
  st.s2 = s2;

  // Step 1: proper parameter posteriors from the first historical dataset.
  st.m1_step1 = at_step(1, [&] { return m1_init(s1); });
  const M0StepFit fit1 =
      at_step(1, [&] { return m0_step1_posterior(s1, cfg.mcmc, rng.derive(0)); });
  st.result.mcmc_step1 = fit1.mcmc;
  st.result.fit_control_1 = fit1.control;
  st.result.fit_treated_1 = fit1.treated;
  st.m0_prior2 = M0StepPrior{{s1}, fit1.control, fit1.treated};

  // Step 2: marginals of y2 under the step-1 posteriors; flat model prior.
  st.result.log_m1_y2 = at_step(2, [&] { return m1_log_marginal(st.m1_step1, s2); });
  st.result.log_m0_y2 = at_step(2, [&] {
    return m0_log_marginal(s2, st.m0_prior2, cfg.quad, &st.result.quad_y2);
  });
  st.result.step2_posterior = at_step(2, [&] {
    return model_posterior(st.result.log_m0_y2, st.result.log_m1_y2, {0.5, 0.5});
  });
  return st;
}

}  // namespace

AnalysisResult run_three_step(const Experiment& y1, const Experiment& y2,
                              const Experiment& y3, const AnalysisConfig& cfg,
                              RngStream rng) {
  const Experiment* experiments[] = {&y1, &y2, &y3};
  validate_inputs(experiments, cfg);

  StepTwoState st = run_through_step2(y1, y2, cfg, rng);
  AnalysisResult result = std::move(st.result);
  result.steps = 3;

  // Parameter priors for step 3.
  const M1State m1_step2 = at_step(2, [&] { return m1_update(st.m1_step1, st.s2); });
  const M0StepFit fit2 = at_step(2, [&] {
    return m0_step2_posterior(st.s2, st.m0_prior2, cfg.mcmc, rng.derive(1));
  });
  result.mcmc_step2 = fit2.mcmc;
  result.fit_control_2 = fit2.control;
  result.fit_treated_2 = fit2.treated;
  const M0StepPrior prior3{{st.s1, st.s2}, fit2.control, fit2.treated};

  // Step 3: the experiment of interest, unweighted; the step-2 model
  // posterior is the model prior.
  const ExperimentSummary s3 = at_step(3, [&] { return summarize(y3); });
  result.log_m1_y3 = at_step(3, [&] { return m1_log_marginal(m1_step2, s3); });
  QuadDiagnostics q3;
  result.log_m0_y3 = at_step(3, [&] { return m0_log_marginal(s3, prior3, cfg.quad, &q3); });
  result.quad_y3 = q3;
  result.step3_posterior = at_step(3, [&] {
    return model_posterior(*result.log_m0_y3, *result.log_m1_y3, result.step2_posterior);
  });
  result.decision = decide(result.step3_posterior->pr_m1, cfg.threshold);
  return result;
}

AnalysisResult run_two_step(const Experiment& y1, const Experiment& y2,
                            const AnalysisConfig& cfg, RngStream rng) {
  const Experiment* experiments[] = {&y1, &y2};
  validate_inputs(experiments, cfg);

  StepTwoState st = run_through_step2(y1, y2, cfg, rng);
  AnalysisResult result = std::move(st.result);
  result.steps = 2;
  result.decision = decide(result.step2_posterior.pr_m1, cfg.threshold);
  return result;
}

}  // namespace bfbayes
