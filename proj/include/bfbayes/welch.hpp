#pragma once

#include <span>

#include "bfbayes/types.hpp"

namespace bfbayes {

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Two-sample t test with Satterthwaite degrees of freedom,
// statistic = (mean_c - mean_t) / sqrt(s2_c/n_c + s2_t/n_t).
TestResult welch_test(const GroupSample& control, const GroupSample& treated);

// Same test on the concatenation of all control arms vs all treated arms.
TestResult pooled_welch_test(std::span<const Experiment> experiments);

}  // namespace bfbayes
