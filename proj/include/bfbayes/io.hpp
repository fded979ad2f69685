#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfbayes/sequential.hpp"
#include "bfbayes/simulation.hpp"
#include "bfbayes/welch.hpp"

namespace bfbayes {

inline constexpr const char* kToolName = "bfbayes";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct ParseError : std::invalid_argument {
  ParseError(std::string file_, int line_, const std::string& what_);
  std::string file;
  int line;  // 0 when the error is not tied to a specific line
};

// Reads a `group,value` comma-separated file; `group` is "control" or
// "treated" case-insensitively. The experiment label is the file stem.
Experiment ingest_experiment(const std::filesystem::path& path);

Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& sc);

// Applies any fields present in `j` on top of `base`; unknown keys are
// rejected. mcmc accepts either explicit fields or "preset".
AnalysisConfig analysis_config_from_json(const nlohmann::json& j, AnalysisConfig base);
AnalysisConfig load_analysis_config(const std::filesystem::path& path, AnalysisConfig base);
nlohmann::json analysis_config_to_json(const AnalysisConfig& cfg);

// Machine-readable analysis report (schema_version 1).
nlohmann::json build_report(const std::vector<Experiment>& experiments,
                            const AnalysisConfig& cfg, const AnalysisResult& result,
                            const TestResult& welch_interest,
                            const TestResult& welch_pooled);

// Power tables (welch.csv, welch_pooled.csv, bayes.csv, replications.csv)
// plus manifest.json under `dir`. Table files are byte-stable for identical
// inputs; runtime lives only in the manifest.
void write_power_tables(const std::filesystem::path& dir, const PowerStudyResult& result,
                        const Scenario& sc, const AnalysisConfig& cfg, int n_reps,
                        std::uint64_t seed, int workers, double runtime_seconds);

}  // namespace bfbayes
