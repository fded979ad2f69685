#pragma once

#include <functional>
#include <stdexcept>

namespace bfbayes {

struct CubatureResult {
  double log_value = 0.0;
  double rel_error = 0.0;
  long evals = 0;
};

// Raised when the evaluation budget runs out before the tolerance is met.
// Carries the best estimate reached.
struct QuadratureBudgetError : std::runtime_error {
  explicit QuadratureBudgetError(CubatureResult b);
  CubatureResult best;
};

// Integrates exp(log_f(u, v)) over the open unit square with a globally
// adaptive Genz-Malik 7(5) rule. The integrand is handled in log space with
// a running-max shift, so log_f may span thousands of log units; -inf marks
// regions of zero mass. Deterministic given its inputs.
CubatureResult integrate_exp_unit_square(
    const std::function<double(double, double)>& log_f,
    double rel_tol, long max_evals);

namespace detail {

struct GmRule {
  double value7 = 0.0;  // degree-7 estimate
  double value5 = 0.0;  // embedded degree-5 estimate
  double diff_x = 0.0;  // fourth-difference indicator along x
  double diff_y = 0.0;  // fourth-difference indicator along y
};

// Plain Genz-Malik evaluation of f over the rectangle centered at (cx, cy)
// with half-widths (hx, hy). Exposed for rule-exactness tests.
GmRule gm_evaluate(const std::function<double(double, double)>& f,
                   double cx, double cy, double hx, double hy);

}  // namespace detail

}  // namespace bfbayes
