#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bfbayes {

// One arm of one experiment: raw measurements.
struct GroupSample {
  std::vector<double> values;
};

// Sufficient statistics for one arm. `n` is real-valued so that weighted
// (effective) sample sizes flow through every downstream formula unchanged.
struct GroupSummary {
  double n = 0.0;
  double mean = 0.0;
  double gamma = 0.0;  // centered sum of squares, sum (x - mean)^2
};

struct Experiment {
  GroupSample control;
  GroupSample treated;
  std::string label;
};

struct ExperimentSummary {
  GroupSummary control;
  GroupSummary treated;
};

// Two-pass mean / centered sum of squares. Throws on an empty sample.
GroupSummary summarize(const GroupSample& sample);
ExperimentSummary summarize(const Experiment& expt);

// Scales the effective sample size by w in (0, 1], keeping mean and gamma.
// With scale_gamma set, gamma is scaled by w as well.
GroupSummary apply_weight(const GroupSummary& s, double w, bool scale_gamma = false);
ExperimentSummary apply_weight(const ExperimentSummary& s, double w, bool scale_gamma = false);

// Requires >= 2 finite values; throws std::invalid_argument naming `what`.
void validate_arm(const GroupSample& arm, const std::string& what);

struct McmcConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 5;
  int chains = 4;

  static McmcConfig analysis_preset();    // 4 chains x 20000 / 5000 / 5
  static McmcConfig simulation_preset();  // 1 chain  x  6000 / 1000 / 5
  int retained_per_chain() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

struct QuadConfig {
  double rel_tol = 1e-6;
  long max_evals = 1000000;
  void validate() const;
};

struct AnalysisConfig {
  double w1 = 1.0;        // weight for the first historical experiment
  double w2 = 1.0;        // weight for the second historical experiment
  double threshold = 0.8; // reject H0 when Pr(M1 | y) exceeds this
  bool scale_gamma = false;
  McmcConfig mcmc;
  QuadConfig quad;
  std::uint64_t seed = 0;
  void validate() const;
};

}  // namespace bfbayes
