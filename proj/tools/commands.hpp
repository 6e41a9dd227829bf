#pragma once

#include "ere/pipeline.hpp"
#include "ere/sim.hpp"
#include "csv.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ere::cli {

struct AnalysisConfig {
  std::string data_path;
  std::string response;
  std::vector<std::pair<std::string, std::vector<std::string>>> modalities;  // name -> column names
  std::string family = "gaussian";
  std::vector<std::string> targets;  // empty: every modality
  double alpha = 0.05;
  std::optional<double> threshold;
  std::vector<double> lambda1_grid;
  std::vector<double> lambda2_grid;
  std::uint64_t seed = 1;
  bool one_sided = false;
  bool intercept = true;
  bool standardize = true;
  bool refit = false;
  std::string penalty = "scad";
  std::string gaussian_scale = "profiled";
  std::string out_path;
};

/// Reads the modality map {"response": ..., "modalities": [{"name", "columns"}]}
/// plus optional keys (family, targets, alpha, threshold, lambda1_grid,
/// lambda2_grid, seed, one_sided) into `config`.
void load_config_file(const std::string& path, AnalysisConfig& config);
void apply_config_json(const nlohmann::json& j, AnalysisConfig& config);

struct Ingested {
  Dataset data;              // intercept column first when requested
  ModalityPartition modalities;
  IndexSet always_include;   // the intercept column
  GlmFamily family;
  std::vector<double> center;
  std::vector<double> scale;
};

Ingested ingest(const AnalysisConfig& config);
Ingested ingest_table(const CsvTable& table, const AnalysisConfig& config);

/// Runs the pipeline and returns the JSON report. `log` receives the
/// per-stage diagnostics and `table` the human-readable summary.
nlohmann::json infer_command(const AnalysisConfig& config, std::ostream& log, std::ostream& table);

/// Screening diagnostics only.
nlohmann::json screen_command(const AnalysisConfig& config, std::ostream& log, std::ostream& table);

struct SimulateConfig {
  int model = 1;
  std::vector<double> deltas;
  std::vector<std::string> methods{"oracle", "sis_scad", "sis_refit"};
  std::vector<std::size_t> modalities;  // 0-based
  std::optional<Index> reps;
  std::optional<Index> n;
  std::optional<Index> p;
  bool small = false;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::string> fit_family;
  std::string gaussian_scale = "profiled";
  std::string out_path;
};

/// CSV table of coverage and selection rates.
std::string simulate_command(const SimulateConfig& config, std::ostream& log);

/// Pretty JSON text, newline-terminated.
std::string dump_report(const nlohmann::json& report);

GaussianScale parse_gaussian_scale(const std::string& name);
PenaltyKind parse_penalty(const std::string& name);

}  // namespace ere::cli
