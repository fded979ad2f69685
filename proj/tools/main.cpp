#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfbayes/io.hpp"
#include "bfbayes/sequential.hpp"
#include "bfbayes/simulation.hpp"
#include "bfbayes/welch.hpp"

namespace {

using namespace bfbayes;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

void print_posterior(const char* name, const ModelPosterior& p) {
  std::printf("%s  Pr(M0|y) = %.6f   Pr(M1|y) = %.6f\n", name, p.pr_m0, p.pr_m1);
}

void print_welch(const char* name, const TestResult& t) {
  std::printf("%s  statistic = %.4f   df = %.4f   p = %.4g\n", name, t.statistic, t.df,
              t.p_value);
}

void print_analysis(const std::vector<Experiment>& exps, const AnalysisResult& res,
                    const TestResult& welch_interest, const TestResult& welch_pooled) {
  std::printf("experiments:\n");
  for (const Experiment& e : exps) {
    const ExperimentSummary s = summarize(e);
    std::printf("  %-12s control n=%g mean=%.4f gamma=%.4f | treated n=%g mean=%.4f gamma=%.4f\n",
                e.label.c_str(), s.control.n, s.control.mean, s.control.gamma, s.treated.n,
                s.treated.mean, s.treated.gamma);
  }
  std::printf("\nlog marginal likelihoods:\n");
  std::printf("  y2:  M0 = %.6f   M1 = %.6f\n", res.log_m0_y2, res.log_m1_y2);
  if (res.steps == 3)
    std::printf("  y3:  M0 = %.6f   M1 = %.6f\n", *res.log_m0_y3, *res.log_m1_y3);
  std::printf("\nmodel posteriors:\n");
  print_posterior("  step 2:", res.step2_posterior);
  if (res.steps == 3) print_posterior("  step 3:", *res.step3_posterior);
  std::printf("\ndecision: %s  (Pr(M1|y) = %.6f vs threshold %.3f)\n",
              to_string(res.decision), res.final_posterior().pr_m1, res.threshold);
  std::printf("\nfrequentist baselines:\n");
  print_welch("  welch (experiment of interest):", welch_interest);
  print_welch("  welch (pooled):                ", welch_pooled);
  std::printf("\ndiagnostics: mcmc step-1 acceptance");
  for (double a : res.mcmc_step1.chain_acceptance) std::printf(" %.2f", a);
  std::printf("%s, quadrature rel. error y2 = %.2e", res.mcmc_step1.between_chain_ok
                                                         ? ""
                                                         : " [between-chain screen failed]",
              res.quad_y2.rel_error);
  if (res.quad_y3) std::printf(", y3 = %.2e", res.quad_y3->rel_error);
  std::printf("\n");
}

int cmd_analyze(const std::string& exp1, const std::string& exp2, const std::string& exp3,
                bool two_step, const std::optional<std::string>& config_path,
                const std::optional<double>& w1, const std::optional<double>& w2,
                const std::optional<double>& threshold,
                const std::optional<std::uint64_t>& seed, const std::string& out_path) {
  AnalysisConfig cfg;
  cfg.mcmc = McmcConfig::analysis_preset();
  cfg.quad.rel_tol = 1e-6;
  if (config_path) cfg = load_analysis_config(*config_path, cfg);
  if (w1) cfg.w1 = *w1;
  if (w2) cfg.w2 = *w2;
  if (threshold) cfg.threshold = *threshold;
  if (seed) cfg.seed = *seed;
  cfg.validate();

  std::vector<Experiment> exps;
  exps.push_back(ingest_experiment(exp1));
  exps.push_back(ingest_experiment(exp2));
  if (!two_step) exps.push_back(ingest_experiment(exp3));

  RngStream rng(cfg.seed, 0);
  const AnalysisResult res = two_step
                                 ? run_two_step(exps[0], exps[1], cfg, rng)
                                 : run_three_step(exps[0], exps[1], exps[2], cfg, rng);
  const Experiment& interest = exps.back();
  const TestResult welch_interest = welch_test(interest.control, interest.treated);
  const TestResult welch_pooled = pooled_welch_test(exps);

  print_analysis(exps, res, welch_interest, welch_pooled);

  const nlohmann::json report = build_report(exps, cfg, res, welch_interest, welch_pooled);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write report to " + out_path);
  out << report.dump(2) << '\n';
  std::printf("\nreport written to %s\n", out_path.c_str());
  return 0;
}

AnalysisConfig simulation_defaults() {
  AnalysisConfig cfg;
  cfg.mcmc = McmcConfig::simulation_preset();
  cfg.quad.rel_tol = 1e-5;
  return cfg;
}

int cmd_simulate(const std::string& scenario_path, int n_reps, std::uint64_t seed,
                 const std::string& out_dir, const std::optional<std::string>& config_path,
                 const std::optional<double>& calibrated, int workers) {
  AnalysisConfig cfg = simulation_defaults();
  if (config_path) cfg = load_analysis_config(*config_path, cfg);
  cfg.seed = seed;
  const Scenario sc = load_scenario(scenario_path);

  const auto t0 = std::chrono::steady_clock::now();
  const int n_workers = resolve_workers(workers);
  std::optional<double> cal;
  if (calibrated) cal = *calibrated;
  const PowerStudyResult result =
      run_power_study(sc, n_reps, kMethodAll, cfg, seed, cal, n_workers);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_power_tables(out_dir, result, sc, cfg, n_reps, seed, n_workers, runtime);
  std::printf("method,rejection_rate,n_replications,mc_stderr\n");
  for (const PowerRow& row : result.rows)
    std::printf("%s,%.6f,%d,%.6g\n", row.method.c_str(), row.rejection_rate,
                row.n_replications, row.mc_stderr);
  std::printf("tables written to %s (%d replications, %d failed, %.1fs)\n",
              out_dir.c_str(), n_reps, result.n_failed, runtime);
  return 0;
}

int cmd_calibrate(const std::string& scenario_path, int n_reps, std::uint64_t seed,
                  const std::optional<std::string>& config_path, int workers) {
  AnalysisConfig cfg = simulation_defaults();
  if (config_path) cfg = load_analysis_config(*config_path, cfg);
  cfg.seed = seed;
  const Scenario sc = load_scenario(scenario_path);

  // Re-run the study here to keep the per-replication posteriors for the
  // order-statistic confidence band.
  if (sc.deltas[2] != 0.0)
    throw std::invalid_argument("calibration requires a null scenario (delta_3 = 0)");
  if (n_reps < 500) throw std::invalid_argument("N >= 500 required for calibration");
  const PowerStudyResult study =
      run_power_study(sc, n_reps, kMethodBayes, cfg, seed, std::nullopt, workers);
  std::vector<double> pr;
  for (const ReplicationRecord& rec : study.records)
    if (rec.ok) pr.push_back(rec.pr_m1_step3);
  std::sort(pr.begin(), pr.end());
  const double threshold = quantile_type7(pr, 0.95);

  // Order-statistic band around the 95th-percentile rank.
  const double n = static_cast<double>(pr.size());
  const double half_width = 1.96 * std::sqrt(n * 0.05 * 0.95);
  const auto clamp_idx = [&](double k) {
    return static_cast<std::size_t>(std::clamp(k, 0.0, n - 1.0));
  };
  const double lo = pr[clamp_idx(0.95 * (n - 1) - half_width)];
  const double hi = pr[clamp_idx(0.95 * (n - 1) + half_width)];

  std::printf("calibrated threshold (95th percentile of Pr(M1|y) under the null): %.6f\n",
              threshold);
  std::printf("Monte Carlo note: N = %zu replications; approx. 95%% order-statistic band "
              "[%.4f, %.4f]\n",
              pr.size(), lo, hi);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential Bayesian comparison of two Gaussian arms using historical "
               "experiments, with frequentist baselines and a power-study harness"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run the sequential analysis");
  std::string exp1, exp2, exp3, out_path = "report.json";
  bool two_step = false;
  std::optional<std::string> config_path;
  std::optional<double> w1, w2, threshold;
  std::optional<std::uint64_t> seed_opt;
  analyze->add_option("--exp1", exp1, "first historical experiment (group,value CSV)")
      ->required();
  analyze->add_option("--exp2", exp2, "second historical experiment, or the experiment "
                                      "of interest with --two-step")
      ->required();
  analyze->add_option("--exp3", exp3, "experiment of interest (group,value CSV)");
  analyze->add_flag("--two-step", two_step,
                    "single historical experiment: exp1 is history, exp2 is analyzed");
  analyze->add_option("--config", config_path, "analysis config JSON");
  analyze->add_option("--w1", w1, "weight for experiment 1 (0 < w <= 1)");
  analyze->add_option("--w2", w2, "weight for experiment 2 (0 < w <= 1)");
  analyze->add_option("--threshold", threshold, "decision threshold on Pr(M1|y)");
  analyze->add_option("--seed", seed_opt, "master seed");
  analyze->add_option("--out", out_path, "report path (JSON)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo power study");
  std::string scenario_path, out_dir;
  int n_reps = 500;
  std::uint64_t seed = 0;
  std::optional<double> calibrated;
  std::optional<std::string> sim_config;
  int workers = 0;
  simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
  simulate->add_option("--n-reps", n_reps, "number of replications (>= 100)");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--out-dir", out_dir, "output directory")->required();
  simulate->add_option("--config", sim_config, "analysis config JSON");
  simulate->add_option("--calibrated-threshold", calibrated,
                       "additional Bayesian decision rule to tabulate");
  simulate->add_option("--workers", workers,
                       "worker threads (default: BFBAYES_WORKERS or all processors)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the decision threshold "
                                                    "on a null scenario");
  std::string cal_scenario;
  int cal_reps = 500;
  std::uint64_t cal_seed = 0;
  std::optional<std::string> cal_config;
  int cal_workers = 0;
  calibrate->add_option("--scenario", cal_scenario, "null scenario JSON (delta_3 = 0)")
      ->required();
  calibrate->add_option("--n-reps", cal_reps, "number of replications (>= 500)");
  calibrate->add_option("--seed", cal_seed, "master seed");
  calibrate->add_option("--config", cal_config, "analysis config JSON");
  calibrate->add_option("--workers", cal_workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(analyze)) {
      if (two_step && !exp3.empty())
        throw std::invalid_argument("--two-step takes only --exp1 and --exp2");
      if (!two_step && exp3.empty())
        throw std::invalid_argument("--exp3 is required (or pass --two-step)");
      return cmd_analyze(exp1, exp2, exp3, two_step, config_path, w1, w2, threshold,
                         seed_opt, out_path);
    }
    if (app.got_subcommand(simulate))
      return cmd_simulate(scenario_path, n_reps, seed, out_dir, sim_config, calibrated,
                          workers);
    if (app.got_subcommand(calibrate))
      return cmd_calibrate(cal_scenario, cal_reps, cal_seed, cal_config, cal_workers);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
