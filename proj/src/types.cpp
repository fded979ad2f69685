#include "bfbayes/types.hpp"

#include <cmath>
#include <stdexcept>

namespace bfbayes {

GroupSummary summarize(const GroupSample& sample) {
  const auto& x = sample.values;
  if (x.empty()) throw std::invalid_argument("empty group");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double gamma = 0.0;
  for (double v : x) {
    const double d = v - mean;
    gamma += d * d;
  }
  return {static_cast<double>(x.size()), mean, gamma};
}

ExperimentSummary summarize(const Experiment& expt) {
  return {summarize(expt.control), summarize(expt.treated)};
}

GroupSummary apply_weight(const GroupSummary& s, double w, bool scale_gamma) {
  if (!(w > 0.0) || w > 1.0) throw std::invalid_argument("invalid weight");
  return {w * s.n, s.mean, scale_gamma ? w * s.gamma : s.gamma};
}

ExperimentSummary apply_weight(const ExperimentSummary& s, double w, bool scale_gamma) {
  return {apply_weight(s.control, w, scale_gamma), apply_weight(s.treated, w, scale_gamma)};
}

void validate_arm(const GroupSample& arm, const std::string& what) {
  if (arm.values.size() < 2)
    throw std::invalid_argument(what + ": needs at least 2 values");
  for (double v : arm.values)
    if (!std::isfinite(v))
      throw std::invalid_argument(what + ": non-finite value");
}

McmcConfig McmcConfig::analysis_preset() { return {20000, 5000, 5, 4}; }
McmcConfig McmcConfig::simulation_preset() { return {6000, 1000, 5, 1}; }

void McmcConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("mcmc: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("mcmc: burn_in must be in [0, iterations)");
  if (thin <= 0) throw std::invalid_argument("mcmc: thin must be positive");
  if (chains <= 0) throw std::invalid_argument("mcmc: chains must be positive");
  if (retained_per_chain() < 1)
    throw std::invalid_argument("mcmc: no draws retained after burn-in and thinning");
}

void QuadConfig::validate() const {
  if (!(rel_tol > 0.0) || rel_tol > 1e-4)
    throw std::invalid_argument("quad: rel_tol must be in (0, 1e-4]");
  if (max_evals <= 0) throw std::invalid_argument("quad: max_evals must be positive");
}

void AnalysisConfig::validate() const {
  if (!(w1 > 0.0) || w1 > 1.0 || !(w2 > 0.0) || w2 > 1.0)
    throw std::invalid_argument("invalid weight");
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw std::invalid_argument("invalid threshold");
  mcmc.validate();
  quad.validate();
}

}  // namespace bfbayes
