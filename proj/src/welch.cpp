#include "bfbayes/welch.hpp"

#include <cmath>
#include <stdexcept>

#include "bfbayes/special_math.hpp"

namespace bfbayes {

TestResult welch_test(const GroupSample& control, const GroupSample& treated) {
  validate_arm(control, "control arm");
  validate_arm(treated, "treated arm");
  const GroupSummary c = summarize(control);
  const GroupSummary t = summarize(treated);
  const double vc = c.gamma / (c.n - 1.0);
  const double vt = t.gamma / (t.n - 1.0);
  if (vc == 0.0 && vt == 0.0)
    throw std::invalid_argument("degenerate test: both sample variances are zero");
  const double wc = vc / c.n;
  const double wt = vt / t.n;
  const double se2 = wc + wt;
  const double statistic = (c.mean - t.mean) / std::sqrt(se2);
  const double df = se2 * se2 / (wc * wc / (c.n - 1.0) + wt * wt / (t.n - 1.0));
  const double p = 2.0 * student_t_sf(std::fabs(statistic), df);
  return {statistic, df, p};
}

TestResult pooled_welch_test(std::span<const Experiment> experiments) {
  if (experiments.empty())
    throw std::invalid_argument("pooled test needs at least one experiment");
  GroupSample control, treated;
  for (const Experiment& e : experiments) {
    control.values.insert(control.values.end(), e.control.values.begin(),
                          e.control.values.end());
    treated.values.insert(treated.values.end(), e.treated.values.begin(),
                          e.treated.values.end());
  }
  return welch_test(control, treated);
}

}  // namespace bfbayes
