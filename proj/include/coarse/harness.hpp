#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "coarse/io.hpp"
#include "coarse/metrics.hpp"
#include "coarse/scm.hpp"

namespace coarse {

/// Sweep configuration. d/density/iota accept scalars or lists in JSON;
/// scalars become one-element grids.
struct ExperimentConfig {
  GraphFamily family = GraphFamily::kErdosRenyi;
  std::vector<int> d_grid = {10};
  std::vector<double> density_grid = {0.2};
  std::vector<int> iota_grid = {5};
  std::vector<int> n_grid = {1000};
  std::vector<int> seeds = {0};
  std::vector<std::pair<double, double>> alpha_grid = {{0.05, 0.05}};
  std::string output_dir = ".";

  /// Throws std::invalid_argument naming the offending field.
  void check() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

std::string family_name(GraphFamily family);
GraphFamily family_from_name(const std::string& name);

/// One sweep cell result; serializes to the fixed CSV schema.
struct RunRecord {
  int seed = 0;
  int d = 0;
  double density = 0;
  std::string family;
  int iota = 0;
  int n = 0;
  double alpha_ref = 0;
  double alpha_edge = 0;
  double ari = 0;
  double precision = 0;
  double recall = 0;
  double f = 0;
  double score = 0;
  double runtime_ms = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

struct SweepOptions {
  bool select_by_score = false;  // add a grid_select stage per (seed, n, ...)
  bool emit_plots = false;
  int jobs = 1;
  std::optional<std::filesystem::path> output_dir;  // overrides config
};

struct SweepOutcome {
  std::vector<RunRecord> records;               // one per completed cell
  std::vector<RunRecord> selected;              // one per cell group, if requested
  std::vector<std::string> failures;            // human-readable per-cell diagnostics
  std::vector<std::filesystem::path> artifacts; // files written
};

/// Full generate -> learn -> eval cross product. Cells run in parallel when
/// jobs > 1 and are merged in deterministic order. Writes results.csv (plus
/// selection.csv, failures.log, and SVG plots when applicable) under the
/// output directory and returns everything in memory as well.
SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options);

/// Writes per-seed environment CSVs, the manifest, and ground_truth.json for
/// every (d, density, iota, n, seed) combination of the config.
std::vector<std::filesystem::path> generate_datasets(const ExperimentConfig& config);

struct LearnCommandResult {
  Coarsening coarsening;
  LearningTrace trace;
  double runtime_ms = 0;  // oracle construction plus lattice descent
};

/// Learns from a manifest on disk. With use_exact_oracles, ground_truth.json
/// next to the manifest supplies the graph and targets for the noiseless
/// pipeline instead of the statistical tests.
LearnCommandResult learn_from_manifest(const std::filesystem::path& manifest_path,
                                       const TestConfig& config,
                                       bool use_exact_oracles, int jobs = 1);

struct EvalResult {
  double ari = 0;
  EdgeMetrics edges;
};

EvalResult evaluate_against_truth(const Coarsening& learned, const GroundTruth& truth);
nlohmann::json eval_result_to_json(const EvalResult& result);

}  // namespace coarse
