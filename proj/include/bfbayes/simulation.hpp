#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfbayes/sequential.hpp"
#include "bfbayes/welch.hpp"

namespace bfbayes {

// Data-generating design for one replication triple. Treated means are
// mu_c * (1 + delta_i).
struct Scenario {
  double mu_c = 2.94;
  std::array<double, 3> deltas{0.0, 0.0, 0.0};
  std::array<double, 3> sigma_c{0.6, 0.6, 0.6};
  std::array<double, 3> sigma_t{0.6, 0.6, 0.6};
  std::array<int, 3> n_control{10, 10, 10};
  std::array<int, 3> n_treated{10, 10, 10};
  void validate() const;
};

std::array<Experiment, 3> generate_scenario(const Scenario& sc, RngStream& rng);

struct PowerRow {
  std::string method;
  double rejection_rate = 0.0;
  int n_replications = 0;
  double mc_stderr = 0.0;  // sqrt(r (1 - r) / N)
};

struct ReplicationRecord {
  int index = 0;
  bool ok = false;
  double p_welch = 1.0;
  double p_pooled = 1.0;
  double pr_m1_step2 = 0.0;
  double pr_m1_step3 = 0.0;
  std::string error;
};

enum MethodMask : unsigned {
  kMethodWelch = 1u,
  kMethodWelchPooled = 2u,
  kMethodBayes = 4u,
  kMethodAll = 7u,
};

struct PowerStudyResult {
  std::vector<PowerRow> rows;
  std::vector<ReplicationRecord> records;
  int n_failed = 0;
};

// N seeded replications; replication r uses the (master_seed, r) stream so
// any replication can be re-run in isolation. Rejection rules: p < 0.05 for
// the t tests, Pr(M1|y) > {0.5, 0.8, calibrated} for the Bayesian method.
// More than 1% failed replications aborts the study.
PowerStudyResult run_power_study(const Scenario& sc, int n_reps, unsigned methods,
                                 const AnalysisConfig& cfg, std::uint64_t master_seed,
                                 std::optional<double> calibrated_threshold = std::nullopt,
                                 int workers = 0);

// 95th percentile of Pr(M1|y) over N null replications (delta_3 must be 0),
// so that rejecting above it gives 5% empirical type I error.
double calibrate_threshold(const Scenario& sc, int n_reps, const AnalysisConfig& cfg,
                           std::uint64_t master_seed, int workers = 0);

// Linear interpolation on order statistics (R type 7); `sorted` ascending.
double quantile_type7(std::span<const double> sorted, double p);

// Worker-pool size: `requested` if positive, else BFBAYES_WORKERS, else the
// number of available processors.
int resolve_workers(int requested);

}  // namespace bfbayes
