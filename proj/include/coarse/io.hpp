#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "coarse/coarsening.hpp"
#include "coarse/dag.hpp"
#include "coarse/repare.hpp"
#include "coarse/scm.hpp"
#include "coarse/stats.hpp"

namespace coarse {

/// I/O and format failures; the CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph JSON: {"d": <int>, "edges": [[u, v], ...]}
nlohmann::json dag_to_json(const Dag& g);
Dag dag_from_json(const nlohmann::json& j);

// Adjacency-list DOT ("digraph { 1 -> 2; 3; }"); the parser accepts the
// subset this writer emits.
std::string dag_to_dot(const Dag& g);
Dag dag_from_dot(const std::string& text);

// Partition JSON: canonical [[nodes...], ...];
// Coarsening JSON adds "edges": [[i, j], ...] over 0-based part indices.
nlohmann::json partition_to_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);
nlohmann::json coarsening_to_json(const Coarsening& c);
Coarsening coarsening_from_json(const nlohmann::json& j);

std::string coarsening_to_dot(const Coarsening& c);

/// Hasse diagram of the given coarsenings under refinement.
std::string lattice_to_dot(const std::vector<Coarsening>& lattice);

// Sample matrices as CSV with a header row of column ids ("1,2,...,d").
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Environment manifest:
/// {"observational": "<file>", "interventions": [{"file": ..., "targets": [..] | null}]}
struct ManifestEntry {
  std::string file;
  std::optional<NodeSet> targets;
};
struct Manifest {
  std::string observational;
  std::vector<ManifestEntry> interventions;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads every environment named by a manifest; relative file names resolve
/// against the manifest's directory.
EnvironmentData load_environment_data(const std::filesystem::path& manifest_path);

/// Ground truth bundle written next to generated data.
struct GroundTruth {
  Dag graph;
  std::vector<std::tuple<int, int, double>> weights;  // (u, v, w_uv)
  std::vector<double> noise_means;
  std::vector<double> noise_variances;
  std::vector<NodeSet> targets;
  Coarsening interventional;
};

nlohmann::json ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);
GroundTruth ground_truth_of(const ExperimentSuite& suite);

/// Learning traces as JSON lines, one engine step per line.
void write_trace_jsonl(const std::filesystem::path& path, const LearningTrace& trace);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace coarse
