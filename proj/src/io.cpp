#include "bfbayes/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace bfbayes {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

template <typename T, std::size_t N>
std::array<T, N> fixed_array(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.size() != N)
    throw std::invalid_argument("scenario: '" + name + "' must be an array of " +
                                std::to_string(N));
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<T>();
  return out;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n') c = ';';
  return s;
}

nlohmann::json fit_to_json(const IgFit& f) {
  return {{"alpha_hat", f.alpha_hat},
          {"beta_hat", f.beta_hat},
          {"n_samples", f.n_samples},
          {"converged", f.converged},
          {"residual", f.residual}};
}

nlohmann::json mcmc_to_json(const McmcDiagnostics& d) {
  return {{"chain_acceptance", d.chain_acceptance},
          {"between_chain_ok", d.between_chain_ok},
          {"log_draw_correlation", d.log_draw_correlation}};
}

nlohmann::json quad_to_json(const QuadDiagnostics& d) {
  return {{"rel_error", d.rel_error}, {"evals", d.evals}};
}

nlohmann::json group_to_json(const GroupSample& g) {
  const GroupSummary s = summarize(g);
  return {{"n", s.n},
          {"mean", s.mean},
          {"gamma", s.gamma},
          {"sd", s.n > 1 ? std::sqrt(s.gamma / (s.n - 1.0)) : 0.0}};
}

nlohmann::json welch_to_json(const TestResult& t) {
  return {{"statistic", t.statistic}, {"df", t.df}, {"p_value", t.p_value}};
}

}  // namespace

ParseError::ParseError(std::string file_, int line_, const std::string& what_)
    : std::invalid_argument(file_ + (line_ > 0 ? ":" + std::to_string(line_) : "") +
                            ": " + what_),
      file(std::move(file_)),
      line(line_) {}

Experiment ingest_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  Experiment expt;
  expt.label = path.stem().string();
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      std::string h = lower(row);
      h.erase(std::remove_if(h.begin(), h.end(),
                             [](unsigned char c) { return std::isspace(c); }),
              h.end());
      if (h != "group,value")
        throw ParseError(path.string(), lineno, "expected header 'group,value'");
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string::npos)
      throw ParseError(path.string(), lineno, "expected 'group,value'");
    const std::string group = lower(trim(row.substr(0, comma)));
    const std::string value_text = trim(row.substr(comma + 1));
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (value_text.empty() || end != value_text.c_str() + value_text.size() ||
        !std::isfinite(value))
      throw ParseError(path.string(), lineno, "non-numeric value '" + value_text + "'");
    if (group == "control") {
      expt.control.values.push_back(value);
    } else if (group == "treated") {
      expt.treated.values.push_back(value);
    } else {
      throw ParseError(path.string(), lineno,
                       "unknown group label '" + group + "' (expected control or treated)");
    }
  }
  if (!header_seen) throw ParseError(path.string(), 0, "empty file");
  if (expt.control.values.size() < 2)
    throw ParseError(path.string(), 0,
                     "control arm needs at least 2 values, got " +
                         std::to_string(expt.control.values.size()));
  if (expt.treated.values.size() < 2)
    throw ParseError(path.string(), 0,
                     "treated arm needs at least 2 values, got " +
                         std::to_string(expt.treated.values.size()));
  return expt;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  require_keys(j, {"mu_c", "deltas", "sigma_c", "sigma_t", "n_control", "n_treated"},
               "scenario");
  Scenario sc;
  if (j.contains("mu_c")) sc.mu_c = j.at("mu_c").get<double>();
  if (j.contains("deltas")) sc.deltas = fixed_array<double, 3>(j.at("deltas"), "deltas");
  if (j.contains("sigma_c")) sc.sigma_c = fixed_array<double, 3>(j.at("sigma_c"), "sigma_c");
  if (j.contains("sigma_t")) sc.sigma_t = fixed_array<double, 3>(j.at("sigma_t"), "sigma_t");
  if (j.contains("n_control"))
    sc.n_control = fixed_array<int, 3>(j.at("n_control"), "n_control");
  if (j.contains("n_treated"))
    sc.n_treated = fixed_array<int, 3>(j.at("n_treated"), "n_treated");
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return scenario_from_json(j);
}

nlohmann::json scenario_to_json(const Scenario& sc) {
  return {{"mu_c", sc.mu_c},     {"deltas", sc.deltas},
          {"sigma_c", sc.sigma_c}, {"sigma_t", sc.sigma_t},
          {"n_control", sc.n_control}, {"n_treated", sc.n_treated}};
}

AnalysisConfig analysis_config_from_json(const nlohmann::json& j, AnalysisConfig base) {
  require_keys(j, {"w1", "w2", "threshold", "scale_gamma", "seed", "mcmc", "quad"},
               "config");
  if (j.contains("w1")) base.w1 = j.at("w1").get<double>();
  if (j.contains("w2")) base.w2 = j.at("w2").get<double>();
  if (j.contains("threshold")) base.threshold = j.at("threshold").get<double>();
  if (j.contains("scale_gamma")) base.scale_gamma = j.at("scale_gamma").get<bool>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mcmc")) {
    const nlohmann::json& m = j.at("mcmc");
    require_keys(m, {"preset", "iterations", "burn_in", "thin", "chains"}, "config.mcmc");
    if (m.contains("preset")) {
      const std::string preset = m.at("preset").get<std::string>();
      if (preset == "analysis") base.mcmc = McmcConfig::analysis_preset();
      else if (preset == "simulation") base.mcmc = McmcConfig::simulation_preset();
      else throw std::invalid_argument("config.mcmc: unknown preset '" + preset + "'");
    }
    if (m.contains("iterations")) base.mcmc.iterations = m.at("iterations").get<int>();
    if (m.contains("burn_in")) base.mcmc.burn_in = m.at("burn_in").get<int>();
    if (m.contains("thin")) base.mcmc.thin = m.at("thin").get<int>();
    if (m.contains("chains")) base.mcmc.chains = m.at("chains").get<int>();
  }
  if (j.contains("quad")) {
    const nlohmann::json& q = j.at("quad");
    require_keys(q, {"rel_tol", "max_evals"}, "config.quad");
    if (q.contains("rel_tol")) base.quad.rel_tol = q.at("rel_tol").get<double>();
    if (q.contains("max_evals")) base.quad.max_evals = q.at("max_evals").get<long>();
  }
  base.validate();
  return base;
}

AnalysisConfig load_analysis_config(const std::filesystem::path& path, AnalysisConfig base) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return analysis_config_from_json(j, base);
}

nlohmann::json analysis_config_to_json(const AnalysisConfig& cfg) {
  return {{"w1", cfg.w1},
          {"w2", cfg.w2},
          {"threshold", cfg.threshold},
          {"scale_gamma", cfg.scale_gamma},
          {"seed", cfg.seed},
          {"mcmc",
           {{"iterations", cfg.mcmc.iterations},
            {"burn_in", cfg.mcmc.burn_in},
            {"thin", cfg.mcmc.thin},
            {"chains", cfg.mcmc.chains}}},
          {"quad", {{"rel_tol", cfg.quad.rel_tol}, {"max_evals", cfg.quad.max_evals}}}};
}

nlohmann::json build_report(const std::vector<Experiment>& experiments,
                            const AnalysisConfig& cfg, const AnalysisResult& result,
                            const TestResult& welch_interest,
                            const TestResult& welch_pooled) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["seed"] = cfg.seed;
  j["config"] = analysis_config_to_json(cfg);
  j["steps"] = result.steps;

  nlohmann::json exps = nlohmann::json::array();
  for (const Experiment& e : experiments)
    exps.push_back({{"label", e.label},
                    {"control", group_to_json(e.control)},
                    {"treated", group_to_json(e.treated)}});
  j["experiments"] = exps;

  j["log_marginals"]["y2"] = {{"m0", result.log_m0_y2}, {"m1", result.log_m1_y2}};
  if (result.steps == 3)
    j["log_marginals"]["y3"] = {{"m0", *result.log_m0_y3}, {"m1", *result.log_m1_y3}};

  j["posteriors"]["step2"] = {{"pr_m0", result.step2_posterior.pr_m0},
                              {"pr_m1", result.step2_posterior.pr_m1}};
  if (result.steps == 3)
    j["posteriors"]["step3"] = {{"pr_m0", result.step3_posterior->pr_m0},
                                {"pr_m1", result.step3_posterior->pr_m1}};

  j["decision"] = {{"threshold", result.threshold},
                   {"reject_h0", result.decision == Decision::reject_h0},
                   {"pr_m1", result.final_posterior().pr_m1}};

  j["welch"] = {{"experiment_of_interest", welch_to_json(welch_interest)},
                {"pooled", welch_to_json(welch_pooled)}};

  nlohmann::json diag;
  diag["mcmc_step1"] = mcmc_to_json(result.mcmc_step1);
  if (result.mcmc_step2) diag["mcmc_step2"] = mcmc_to_json(*result.mcmc_step2);
  diag["ig_fits"]["step1"] = {{"control", fit_to_json(result.fit_control_1)},
                              {"treated", fit_to_json(result.fit_treated_1)}};
  if (result.fit_control_2)
    diag["ig_fits"]["step2"] = {{"control", fit_to_json(*result.fit_control_2)},
                                {"treated", fit_to_json(*result.fit_treated_2)}};
  diag["quadrature"]["y2"] = quad_to_json(result.quad_y2);
  if (result.quad_y3) diag["quadrature"]["y3"] = quad_to_json(*result.quad_y3);
  j["diagnostics"] = diag;
  return j;
}

void write_power_tables(const std::filesystem::path& dir, const PowerStudyResult& result,
                        const Scenario& sc, const AnalysisConfig& cfg, int n_reps,
                        std::uint64_t seed, int workers, double runtime_seconds) {
  std::filesystem::create_directories(dir);

  auto write_rows = [&](const std::string& file, auto&& keep) {
    std::ofstream out(dir / file);
    if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
    out << "method,rejection_rate,n_replications,mc_stderr\n";
    for (const PowerRow& row : result.rows)
      if (keep(row.method))
        out << csv_safe(row.method) << ',' << fmt("%.6f", row.rejection_rate) << ','
            << row.n_replications << ',' << fmt("%.6g", row.mc_stderr) << '\n';
  };
  write_rows("welch.csv", [](const std::string& m) { return m == "welch"; });
  write_rows("welch_pooled.csv", [](const std::string& m) { return m == "welch_pooled"; });
  write_rows("bayes.csv", [](const std::string& m) { return m.rfind("bayes", 0) == 0; });

  {
    std::ofstream out(dir / "replications.csv");
    if (!out) throw std::runtime_error("cannot write replications.csv");
    out << "index,ok,p_welch,p_pooled,pr_m1_step2,pr_m1_step3,error\n";
    for (const ReplicationRecord& rec : result.records)
      out << rec.index << ',' << (rec.ok ? 1 : 0) << ',' << fmt("%.12g", rec.p_welch)
          << ',' << fmt("%.12g", rec.p_pooled) << ',' << fmt("%.12g", rec.pr_m1_step2)
          << ',' << fmt("%.12g", rec.pr_m1_step3) << ',' << csv_safe(rec.error) << '\n';
  }

  nlohmann::json manifest;
  manifest["schema_version"] = kReportSchemaVersion;
  manifest["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  manifest["seed"] = seed;
  manifest["n_reps"] = n_reps;
  manifest["n_failed"] = result.n_failed;
  manifest["workers"] = workers;
  manifest["scenario"] = scenario_to_json(sc);
  manifest["analysis_config"] = analysis_config_to_json(cfg);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(
                    scenario_to_json(sc).dump() + analysis_config_to_json(cfg).dump())));
  manifest["config_hash"] = hash;
  manifest["runtime_seconds"] = runtime_seconds;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace bfbayes
