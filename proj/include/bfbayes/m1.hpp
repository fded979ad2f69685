#pragma once

#include "bfbayes/types.hpp"

namespace bfbayes {

// Normal-Inverse-Gamma hyperparameters for one arm under the unequal-means
// model:  mu | s2 ~ Normal(m, s2 / kappa),  s2 ~ InverseGamma(alpha, beta).
struct NigHyper {
  double m = 0.0;
  double kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// The two arms stay independent a posteriori, so the model state is a pair.
struct M1State {
  NigHyper control;
  NigHyper treated;
};

// Jeffreys-posterior hyperparameters from one arm of the first historical
// experiment: (mean, n, n/2, gamma/2). Requires gamma > 0 and n > 0.
NigHyper m1_init(const GroupSummary& s);

// Conjugate update with a further arm summary.
NigHyper m1_update(const NigHyper& h, const GroupSummary& s);

// Log predictive density of the arm data under the NIG prior h,
// computed entirely in log space.
double m1_log_marginal(const NigHyper& h, const GroupSummary& s);

M1State m1_init(const ExperimentSummary& s);
M1State m1_update(const M1State& st, const ExperimentSummary& s);

// Sum of the per-arm log predictives.
double m1_log_marginal(const M1State& st, const ExperimentSummary& s);

}  // namespace bfbayes
