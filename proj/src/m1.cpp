#include "bfbayes/m1.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bfbayes/special_math.hpp"

namespace bfbayes {

namespace {

void check_hyper(const NigHyper& h) {
  if (!(h.kappa > 0.0) || !(h.alpha > 0.0) || !(h.beta > 0.0))
    throw std::invalid_argument("invalid NIG hyperparameters");
}

void check_size(const GroupSummary& s) {
  if (!(s.n > 0.0)) throw std::invalid_argument("nonpositive effective sample size");
}

}  // namespace

NigHyper m1_init(const GroupSummary& s) {
  check_size(s);
  if (!(s.gamma > 0.0)) throw std::invalid_argument("degenerate group variance");
  return {s.mean, s.n, 0.5 * s.n, 0.5 * s.gamma};
}

NigHyper m1_update(const NigHyper& h, const GroupSummary& s) {
  check_hyper(h);
  check_size(s);
  const double kn = h.kappa + s.n;
  const double diff = h.m - s.mean;
  return {(h.kappa * h.m + s.n * s.mean) / kn, kn, h.alpha + 0.5 * s.n,
          h.beta + 0.5 * s.gamma + 0.5 * h.kappa * s.n * diff * diff / kn};
}

double m1_log_marginal(const NigHyper& h, const GroupSummary& s) {
  const NigHyper post = m1_update(h, s);
  return -0.5 * s.n * std::log(2.0 * std::numbers::pi) +
         0.5 * (std::log(h.kappa) - std::log(post.kappa)) +
         log_gamma(post.alpha) - log_gamma(h.alpha) +
         h.alpha * std::log(h.beta) - post.alpha * std::log(post.beta);
}

M1State m1_init(const ExperimentSummary& s) {
  return {m1_init(s.control), m1_init(s.treated)};
}

M1State m1_update(const M1State& st, const ExperimentSummary& s) {
  return {m1_update(st.control, s.control), m1_update(st.treated, s.treated)};
}

double m1_log_marginal(const M1State& st, const ExperimentSummary& s) {
  return m1_log_marginal(st.control, s.control) + m1_log_marginal(st.treated, s.treated);
}

}  // namespace bfbayes
