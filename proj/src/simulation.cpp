#include "bfbayes/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace bfbayes {

void Scenario::validate() const {
  if (!std::isfinite(mu_c)) throw std::invalid_argument("scenario: mu_c must be finite");
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(deltas[i]))
      throw std::invalid_argument("scenario: deltas must be finite");
    if (!(sigma_c[i] > 0.0) || !(sigma_t[i] > 0.0))
      throw std::invalid_argument("scenario: standard deviations must be positive");
    if (n_control[i] < 2 || n_treated[i] < 2)
      throw std::invalid_argument("scenario: arm sizes must be at least 2");
  }
}

std::array<Experiment, 3> generate_scenario(const Scenario& sc, RngStream& rng) {
  sc.validate();
  std::array<Experiment, 3> out;
  for (int i = 0; i < 3; ++i) {
    Experiment e;
    e.label = "exp" + std::to_string(i + 1);
    e.control.values.resize(static_cast<std::size_t>(sc.n_control[i]));
    for (double& v : e.control.values) v = rng.normal(sc.mu_c, sc.sigma_c[i]);
    const double mu_t = sc.mu_c * (1.0 + sc.deltas[i]);
    e.treated.values.resize(static_cast<std::size_t>(sc.n_treated[i]));
    for (double& v : e.treated.values) v = rng.normal(mu_t, sc.sigma_t[i]);
    out[static_cast<std::size_t>(i)] = std::move(e);
  }
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BFBAYES_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

PowerStudyResult run_power_study(const Scenario& sc, int n_reps, unsigned methods,
                                 const AnalysisConfig& cfg, std::uint64_t master_seed,
                                 std::optional<double> calibrated_threshold, int workers) {
  sc.validate();
  cfg.validate();
  if (n_reps < 100) throw std::invalid_argument("N >= 100 required");
  if ((methods & kMethodAll) == 0) throw std::invalid_argument("no methods selected");
  if (calibrated_threshold &&
      (!(*calibrated_threshold >= 0.0) || !(*calibrated_threshold <= 1.0)))
    throw std::invalid_argument("calibrated threshold must be in [0, 1]");

  PowerStudyResult out;
  out.records.resize(static_cast<std::size_t>(n_reps));
  std::atomic<int> next{0};

  auto work = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= n_reps) return;
      ReplicationRecord rec;
      rec.index = r;
      try {
        RngStream root(master_seed, static_cast<std::uint64_t>(r));
        RngStream data_rng = root.derive(0);
        const std::array<Experiment, 3> exps = generate_scenario(sc, data_rng);
        if (methods & kMethodWelch)
          rec.p_welch = welch_test(exps[2].control, exps[2].treated).p_value;
        if (methods & kMethodWelchPooled) rec.p_pooled = pooled_welch_test(exps).p_value;
        if (methods & kMethodBayes) {
          const AnalysisResult res =
              run_three_step(exps[0], exps[1], exps[2], cfg, root.derive(1));
          rec.pr_m1_step2 = res.step2_posterior.pr_m1;
          rec.pr_m1_step3 = res.step3_posterior->pr_m1;
        }
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      out.records[static_cast<std::size_t>(r)] = std::move(rec);
    }
  };

  const int n_workers = std::min(resolve_workers(workers), n_reps);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  std::string first_error;
  for (const ReplicationRecord& rec : out.records)
    if (!rec.ok) {
      ++out.n_failed;
      if (first_error.empty()) first_error = rec.error;
    }
  if (out.n_failed * 100 > n_reps)
    throw std::runtime_error("more than 1% of replications failed; first error: " +
                             first_error);

  auto add_rate = [&](const std::string& label, auto&& rejected) {
    long hits = 0;
    long total = 0;
    for (const ReplicationRecord& rec : out.records) {
      if (!rec.ok) continue;
      ++total;
      if (rejected(rec)) ++hits;
    }
    const double rate = total > 0 ? static_cast<double>(hits) / total : 0.0;
    const double se = total > 0 ? std::sqrt(rate * (1.0 - rate) / total) : 0.0;
    out.rows.push_back({label, rate, static_cast<int>(total), se});
  };

  if (methods & kMethodWelch)
    add_rate("welch", [](const ReplicationRecord& r) { return r.p_welch < 0.05; });
  if (methods & kMethodWelchPooled)
    add_rate("welch_pooled", [](const ReplicationRecord& r) { return r.p_pooled < 0.05; });
  if (methods & kMethodBayes) {
    add_rate("bayes>0.5", [](const ReplicationRecord& r) { return r.pr_m1_step3 > 0.5; });
    add_rate("bayes>0.8", [](const ReplicationRecord& r) { return r.pr_m1_step3 > 0.8; });
    if (calibrated_threshold) {
      char label[64];
      std::snprintf(label, sizeof(label), "bayes>%.6g", *calibrated_threshold);
      add_rate(label, [p = *calibrated_threshold](const ReplicationRecord& r) {
        return r.pr_m1_step3 > p;
      });
    }
  }
  return out;
}

double calibrate_threshold(const Scenario& sc, int n_reps, const AnalysisConfig& cfg,
                           std::uint64_t master_seed, int workers) {
  if (sc.deltas[2] != 0.0)
    throw std::invalid_argument("calibration requires a null scenario (delta_3 = 0)");
  if (n_reps < 500) throw std::invalid_argument("N >= 500 required for calibration");
  const PowerStudyResult study =
      run_power_study(sc, n_reps, kMethodBayes, cfg, master_seed, std::nullopt, workers);
  std::vector<double> pr;
  pr.reserve(study.records.size());
  for (const ReplicationRecord& rec : study.records)
    if (rec.ok) pr.push_back(rec.pr_m1_step3);
  std::sort(pr.begin(), pr.end());
  return quantile_type7(pr, 0.95);
}

}  // namespace bfbayes
