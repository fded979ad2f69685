#include "bfbayes/m0.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "bfbayes/special_math.hpp"

namespace bfbayes {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kNegInf = -std::numeric_limits<double>::infinity();

void check_variances(double sc2, double st2) {
  if (!(sc2 > 0.0) || !(st2 > 0.0))
    throw std::domain_error("variances must be positive");
}

}  // namespace

MuConditional mu_conditional(int step, double sc2, double st2,
                             std::span<const ExperimentSummary> summaries) {
  check_variances(sc2, st2);
  if (step < 1 || static_cast<std::size_t>(step) > summaries.size())
    throw std::invalid_argument("mu_conditional: need at least `step` experiment summaries");
  double nc = 0.0, nt = 0.0, snc_mean = 0.0, snt_mean = 0.0;
  for (int i = 0; i < step; ++i) {
    nc += summaries[i].control.n;
    nt += summaries[i].treated.n;
    snc_mean += summaries[i].control.n * summaries[i].control.mean;
    snt_mean += summaries[i].treated.n * summaries[i].treated.mean;
  }
  const double denom = st2 * nc + sc2 * nt;
  return {(st2 * snc_mean + sc2 * snt_mean) / denom, sc2 * st2 / denom};
}

MuConditional mu_conditional(double sc2, double st2,
                             std::span<const ExperimentSummary> summaries) {
  return mu_conditional(static_cast<int>(summaries.size()), sc2, st2, summaries);
}

double m0_step1_log_target(double sc2, double st2, const ExperimentSummary& s) {
  check_variances(sc2, st2);
  const GroupSummary& c = s.control;
  const GroupSummary& t = s.treated;
  // Per-arm terms are combined with a single commutative +, and the cross
  // term is written symmetrically, so swapping arms (and arguments) gives a
  // bit-identical value.
  const double arm_terms =
      ((-0.5 * c.n - 1.0) * std::log(sc2) - 0.5 * c.gamma / sc2) +
      ((-0.5 * t.n - 1.0) * std::log(st2) - 0.5 * t.gamma / st2);
  const double md = c.mean - t.mean;
  const double mix = c.n * st2 + t.n * sc2;
  return arm_terms - 0.5 * c.n * t.n * md * md / mix;
}

double m0_log_predictive_given_variances(const ExperimentSummary& data,
                                         std::span<const ExperimentSummary> history,
                                         double sc2, double st2) {
  check_variances(sc2, st2);
  if (history.empty()) throw std::invalid_argument("empty prior history");
  const MuConditional prior = mu_conditional(sc2, st2, history);
  const std::array<ExperimentSummary, 1> just_data{data};
  const MuConditional like = mu_conditional(sc2, st2, just_data);

  const GroupSummary& c = data.control;
  const GroupSummary& t = data.treated;
  const double arm_terms =
      (-0.5 * c.n * (kLog2Pi + std::log(sc2)) - 0.5 * c.gamma / sc2) +
      (-0.5 * t.n * (kLog2Pi + std::log(st2)) - 0.5 * t.gamma / st2);
  const double md = c.mean - t.mean;
  const double mix = c.n * st2 + t.n * sc2;
  const double cross = -0.5 * c.n * t.n * md * md / mix;
  // Gaussian pseudo-observation: the data-conditional mu estimate meets the
  // accumulated conditional prior.
  const double vsum = prior.variance + like.variance;
  const double ediff = like.mean - prior.mean;
  const double mu_terms =
      0.5 * (std::log(like.variance) - std::log(vsum)) - 0.5 * ediff * ediff / vsum;
  return arm_terms + cross + mu_terms;
}

double m0_step2_log_target(double sc2, double st2, const ExperimentSummary& s2,
                           const M0StepPrior& step1) {
  const double ig_pair =
      log_pdf_inverse_gamma(sc2, step1.var_control.alpha_hat, step1.var_control.beta_hat) +
      log_pdf_inverse_gamma(st2, step1.var_treated.alpha_hat, step1.var_treated.beta_hat);
  return m0_log_predictive_given_variances(s2, step1.history, sc2, st2) + ig_pair;
}

VarianceDraws mcmc_sample_variances(
    const std::function<double(double, double)>& log_target,
    const McmcConfig& cfg, RngStream rng, double init_sc2, double init_st2) {
  cfg.validate();

  const std::array<std::pair<double, double>, 4> candidates{
      std::pair{init_sc2, init_st2},
      std::pair{1.0, 1.0},
      std::pair{100.0 * init_sc2, 100.0 * init_st2},
      std::pair{0.01 * init_sc2, 0.01 * init_st2}};
  double x0 = 0.0, y0 = 0.0;
  bool found = false;
  for (const auto& [a, b] : candidates) {
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b) &&
        std::isfinite(log_target(a, b))) {
      x0 = std::log(a);
      y0 = std::log(b);
      found = true;
      break;
    }
  }
  if (!found) throw McmcError("MCMC initialization failed");

  // On the log scale the target picks up the Jacobian exp(xc + xt).
  auto lt_log = [&log_target](double xc, double xt) {
    return log_target(std::exp(xc), std::exp(xt)) + xc + xt;
  };

  const int keep_per_chain = cfg.retained_per_chain();
  VarianceDraws out;
  out.control.reserve(static_cast<std::size_t>(keep_per_chain) * cfg.chains);
  out.treated.reserve(static_cast<std::size_t>(keep_per_chain) * cfg.chains);
  std::vector<double> chain_mean_c(cfg.chains, 0.0), chain_mean_t(cfg.chains, 0.0);

  for (int chain = 0; chain < cfg.chains; ++chain) {
    RngStream cr = rng.derive(static_cast<std::uint64_t>(chain));
    double xc = x0;
    double xt = y0;
    if (chain > 0) {
      xc += 0.1 * cr.normal();
      xt += 0.1 * cr.normal();
    }
    double cur = lt_log(xc, xt);
    double scale = 0.8;
    int window_accepts = 0;
    long frozen_accepts = 0;
    long frozen_total = 0;
    int kept = 0;
    double sum_c = 0.0, sum_t = 0.0;

    for (int it = 0; it < cfg.iterations; ++it) {
      const bool warm = it < cfg.burn_in;
      const double pc = xc + scale * cr.normal();
      const double pt = xt + scale * cr.normal();
      const double prop = lt_log(pc, pt);
      const double logu = std::log(1.0 - cr.uniform01());
      if (logu < prop - cur) {
        xc = pc;
        xt = pt;
        cur = prop;
        if (warm) ++window_accepts; else ++frozen_accepts;
      }
      if (warm) {
        if ((it + 1) % 100 == 0) {
          const double rate = window_accepts / 100.0;
          if (rate < 0.2) scale *= 0.7;
          else if (rate > 0.5) scale *= 1.4;
          scale = std::clamp(scale, 1e-3, 10.0);
          window_accepts = 0;
        }
      } else {
        ++frozen_total;
        if ((it - cfg.burn_in) % cfg.thin == 0 && kept < keep_per_chain) {
          out.control.push_back(std::exp(xc));
          out.treated.push_back(std::exp(xt));
          sum_c += xc;
          sum_t += xt;
          ++kept;
        }
      }
    }
    out.diagnostics.chain_acceptance.push_back(
        frozen_total > 0 ? static_cast<double>(frozen_accepts) / frozen_total : 0.0);
    chain_mean_c[chain] = sum_c / kept;
    chain_mean_t[chain] = sum_t / kept;
  }

  // Diagnostics on the log draws (the chain's own coordinates): Pearson
  // correlation and, for multi-chain runs, a between-chain mean screen.
  const std::size_t n = out.control.size();
  double mc = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mc += std::log(out.control[i]);
    mt += std::log(out.treated[i]);
  }
  mc /= n;
  mt /= n;
  double scc = 0.0, stt = 0.0, sct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dc = std::log(out.control[i]) - mc;
    const double dt = std::log(out.treated[i]) - mt;
    scc += dc * dc;
    stt += dt * dt;
    sct += dc * dt;
  }
  out.diagnostics.log_draw_correlation =
      (scc > 0.0 && stt > 0.0) ? sct / std::sqrt(scc * stt) : 0.0;

  out.diagnostics.between_chain_ok = true;
  if (cfg.chains > 1) {
    const double se_c = std::sqrt(scc / (n - 1) / keep_per_chain);
    const double se_t = std::sqrt(stt / (n - 1) / keep_per_chain);
    for (int chain = 0; chain < cfg.chains; ++chain) {
      if (std::fabs(chain_mean_c[chain] - mc) > 3.0 * se_c ||
          std::fabs(chain_mean_t[chain] - mt) > 3.0 * se_t)
        out.diagnostics.between_chain_ok = false;
    }
  }
  return out;
}

IgFit fit_inverse_gamma(std::span<const double> draws) {
  if (draws.size() < 100)
    throw std::invalid_argument("inverse-gamma fit needs at least 100 draws");
  const double n = static_cast<double>(draws.size());
  double sum = 0.0, sum_inv = 0.0, sum_log = 0.0;
  double lo_v = std::numeric_limits<double>::infinity();
  double hi_v = -std::numeric_limits<double>::infinity();
  for (double x : draws) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("inverse-gamma fit draws must be positive");
    sum += x;
    sum_inv += 1.0 / x;
    sum_log += std::log(x);
    lo_v = std::min(lo_v, x);
    hi_v = std::max(hi_v, x);
  }
  if (!(hi_v > lo_v)) throw std::invalid_argument("degenerate draws");

  const double mean_log = sum_log / n;
  const double log_rate = std::log(n / sum_inv);
  auto g = [&](double a) { return std::log(a) + log_rate - digamma(a) - mean_log; };

  // moment-matching start: alpha = mean^2 / var + 2, beta = mean (alpha - 1)
  const double m = sum / n;
  double v = 0.0;
  for (double x : draws) {
    const double d = x - m;
    v += d * d;
  }
  v /= (n - 1.0);
  double a = v > 0.0 ? m * m / v + 2.0 : 2.0;
  a = std::clamp(a, 1e-3, 1e8);

  double lo = a, hi = a;
  while (g(lo) <= 0.0 && lo > 1e-12) lo *= 0.5;
  while (g(hi) >= 0.0 && hi < 1e12) hi *= 2.0;

  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double val = g(a);
    if (std::fabs(val) < 1e-10) {
      converged = true;
      break;
    }
    if (val > 0.0) lo = a; else hi = a;  // g strictly decreasing
    const double deriv = 1.0 / a - trigamma(a);
    double next = a - val / deriv;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    a = next;
  }
  const double beta = a * n / sum_inv;
  const double residual = std::fabs(std::log(beta) - digamma(a) - mean_log);
  return {a, beta, static_cast<int>(draws.size()), converged && residual < 1e-8, residual};
}

namespace {

// Canonical arm order: the equal-means MCMC and quadrature run with the two
// arms in a data-determined order so that relabelling control/treated in
// every input gives bit-identical results.
bool swap_to_canonical(std::span<const ExperimentSummary> involved) {
  for (const ExperimentSummary& s : involved) {
    const std::array<double, 3> ck{s.control.n, s.control.mean, s.control.gamma};
    const std::array<double, 3> tk{s.treated.n, s.treated.mean, s.treated.gamma};
    if (tk < ck) return true;
    if (ck < tk) return false;
  }
  return false;
}

ExperimentSummary swapped(const ExperimentSummary& s) { return {s.treated, s.control}; }

std::vector<ExperimentSummary> swapped(std::span<const ExperimentSummary> v) {
  std::vector<ExperimentSummary> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(swapped(s));
  return out;
}

M0StepPrior swapped(const M0StepPrior& p) {
  return {swapped(std::span<const ExperimentSummary>(p.history)), p.var_treated, p.var_control};
}

void check_fit(const IgFit& f) {
  if (!(f.alpha_hat > 0.0) || !(f.beta_hat > 0.0))
    throw std::invalid_argument("invalid inverse-gamma fit parameters");
}

double ig_mode(const IgFit& f) { return f.beta_hat / (f.alpha_hat + 1.0); }

}  // namespace

M0StepFit m0_step1_posterior(const ExperimentSummary& y1, const McmcConfig& cfg,
                             RngStream rng) {
  const std::array<ExperimentSummary, 1> involved{y1};
  const bool swap = swap_to_canonical(involved);
  const ExperimentSummary s = swap ? swapped(y1) : y1;
  auto target = [s](double a, double b) { return m0_step1_log_target(a, b, s); };
  VarianceDraws draws = mcmc_sample_variances(
      target, cfg, rng, s.control.gamma / s.control.n, s.treated.gamma / s.treated.n);
  IgFit first = fit_inverse_gamma(draws.control);
  IgFit second = fit_inverse_gamma(draws.treated);
  M0StepFit out;
  out.control = swap ? second : first;
  out.treated = swap ? first : second;
  out.mcmc = std::move(draws.diagnostics);
  return out;
}

M0StepFit m0_step2_posterior(const ExperimentSummary& y2, const M0StepPrior& step1,
                             const McmcConfig& cfg, RngStream rng) {
  check_fit(step1.var_control);
  check_fit(step1.var_treated);
  std::vector<ExperimentSummary> involved(step1.history);
  involved.push_back(y2);
  const bool swap = swap_to_canonical(involved);
  const M0StepPrior prior = swap ? swapped(step1) : step1;
  const ExperimentSummary data = swap ? swapped(y2) : y2;
  auto target = [prior, data](double a, double b) {
    return m0_step2_log_target(a, b, data, prior);
  };
  VarianceDraws draws = mcmc_sample_variances(target, cfg, rng, ig_mode(prior.var_control),
                                              ig_mode(prior.var_treated));
  IgFit first = fit_inverse_gamma(draws.control);
  IgFit second = fit_inverse_gamma(draws.treated);
  M0StepFit out;
  out.control = swap ? second : first;
  out.treated = swap ? first : second;
  out.mcmc = std::move(draws.diagnostics);
  return out;
}

double m0_log_marginal(const ExperimentSummary& data, const M0StepPrior& prior,
                       const QuadConfig& quad, QuadDiagnostics* diag) {
  quad.validate();
  if (prior.history.empty()) throw std::invalid_argument("M0 prior has no history");
  check_fit(prior.var_control);
  check_fit(prior.var_treated);

  std::vector<ExperimentSummary> involved(prior.history);
  involved.push_back(data);
  const bool swap = swap_to_canonical(involved);
  const M0StepPrior p = swap ? swapped(prior) : prior;
  const ExperimentSummary d = swap ? swapped(data) : data;

  const double scale_c = ig_mode(p.var_control);
  const double scale_t = ig_mode(p.var_treated);
  auto log_f = [&p, &d, scale_c, scale_t](double u, double v) -> double {
    if (!(u > 0.0) || !(u < 1.0) || !(v > 0.0) || !(v < 1.0)) return kNegInf;
    const double sc2 = scale_c * u / (1.0 - u);
    const double st2 = scale_t * v / (1.0 - v);
    if (!std::isfinite(sc2) || !std::isfinite(st2)) return kNegInf;
    const double ig_pair =
        log_pdf_inverse_gamma(sc2, p.var_control.alpha_hat, p.var_control.beta_hat) +
        log_pdf_inverse_gamma(st2, p.var_treated.alpha_hat, p.var_treated.beta_hat);
    const double jac = (std::log(scale_c) - 2.0 * std::log1p(-u)) +
                       (std::log(scale_t) - 2.0 * std::log1p(-v));
    return m0_log_predictive_given_variances(d, p.history, sc2, st2) + ig_pair + jac;
  };

  const CubatureResult res = integrate_exp_unit_square(log_f, quad.rel_tol, quad.max_evals);
  if (diag) *diag = {res.rel_error, res.evals};
  return res.log_value;
}

}  // namespace bfbayes
