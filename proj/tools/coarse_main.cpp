// coarse: learn and analyze causal DAG coarsenings from multi-environment data.
//
// Subcommands: generate, learn, eval, sweep, lattice.
// Exit codes: 0 success, 1 statistical-pipeline failure, 2 I/O or config failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include "coarse/harness.hpp"
#include "coarse/io.hpp"
#include "coarse/metrics.hpp"

namespace fs = std::filesystem;
using namespace coarse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitIo = 2;

int default_seed() {
  if (const char* env = std::getenv("COARSE_CAUSAL_SEED")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw IoError("COARSE_CAUSAL_SEED is not an integer: " + std::string(env));
    }
  }
  return 0;
}

Dag load_graph(const fs::path& path) {
  if (path.extension() == ".dot") return dag_from_dot(read_text_file(path));
  return dag_from_json(read_json_file(path));
}

struct SweepCli {
  std::string config_file;
  std::string family;
  std::vector<int> d, iota, n, seeds;
  std::vector<double> density;
  std::vector<double> alphas;  // flat pairs: ref edge ref edge ...
  std::string output_dir;
};

ExperimentConfig build_config(const SweepCli& cli) {
  ExperimentConfig config;
  if (!cli.config_file.empty())
    config = experiment_config_from_json(read_json_file(cli.config_file));
  // Flags override file values.
  if (!cli.family.empty()) config.family = family_from_name(cli.family);
  if (!cli.d.empty()) config.d_grid = cli.d;
  if (!cli.density.empty()) config.density_grid = cli.density;
  if (!cli.iota.empty()) config.iota_grid = cli.iota;
  if (!cli.n.empty()) config.n_grid = cli.n;
  if (!cli.seeds.empty()) config.seeds = cli.seeds;
  if (!cli.alphas.empty()) {
    if (cli.alphas.size() % 2 != 0)
      throw std::invalid_argument("ExperimentConfig.alphas: need pairs of alpha_ref alpha_edge");
    config.alpha_grid.clear();
    for (size_t i = 0; i < cli.alphas.size(); i += 2)
      config.alpha_grid.push_back({cli.alphas[i], cli.alphas[i + 1]});
  }
  if (!cli.output_dir.empty()) config.output_dir = cli.output_dir;
  if (cli.seeds.empty() && cli.config_file.empty()) config.seeds = {default_seed()};
  config.check();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal DAG coarsening: generation, learning, evaluation"};
  app.require_subcommand(1);

  // generate ----------------------------------------------------------------
  SweepCli gen;
  CLI::App* generate = app.add_subcommand("generate", "Sample synthetic experiment data");
  generate->add_option("--config", gen.config_file, "Config JSON file");
  generate->add_option("--family", gen.family, "Graph family: er or sf");
  generate->add_option("--d", gen.d, "Node counts");
  generate->add_option("--density", gen.density, "Edge densities");
  generate->add_option("--iota", gen.iota, "Interventional environment counts");
  generate->add_option("--n", gen.n, "Samples per environment");
  generate->add_option("--seeds", gen.seeds, "Random seeds");
  generate->add_option("--out", gen.output_dir, "Output directory");

  // learn -------------------------------------------------------------------
  std::string learn_manifest, learn_out, learn_trace;
  double learn_alpha_ref = 0.05, learn_alpha_edge = 0.05;
  bool learn_oracle = false;
  int learn_jobs = 1;
  CLI::App* learn = app.add_subcommand("learn", "Learn a coarsening from a data manifest");
  learn->add_option("--manifest", learn_manifest, "manifest.json path")->required();
  learn->add_option("--alpha-ref", learn_alpha_ref, "Refinement test level");
  learn->add_option("--alpha-edge", learn_alpha_edge, "Edge test level");
  learn->add_option("--out", learn_out, "Output coarsening JSON (default stdout)");
  learn->add_option("--trace", learn_trace, "Write the learning trace as JSON lines");
  learn->add_flag("--oracle", learn_oracle,
                  "Use noiseless oracles from ground_truth.json instead of tests");
  learn->add_option("--jobs", learn_jobs, "Threads for the descendant matrix");

  // eval --------------------------------------------------------------------
  std::string eval_learned, eval_truth, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "Score a learned coarsening against ground truth");
  eval->add_option("--learned", eval_learned, "Learned coarsening JSON")->required();
  eval->add_option("--truth", eval_truth, "ground_truth.json path")->required();
  eval->add_option("--out", eval_out, "Metrics JSON output (default stdout)");

  // sweep -------------------------------------------------------------------
  SweepCli sweep_cli;
  bool sweep_plot = false;
  std::string sweep_select;
  int sweep_jobs = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a generate-learn-eval cross product");
  sweep->add_option("--config", sweep_cli.config_file, "Config JSON file");
  sweep->add_option("--family", sweep_cli.family, "Graph family: er or sf");
  sweep->add_option("--d", sweep_cli.d, "Node counts");
  sweep->add_option("--density", sweep_cli.density, "Edge densities");
  sweep->add_option("--iota", sweep_cli.iota, "Interventional environment counts");
  sweep->add_option("--n", sweep_cli.n, "Samples per environment");
  sweep->add_option("--seeds", sweep_cli.seeds, "Random seeds");
  sweep->add_option("--alphas", sweep_cli.alphas,
                    "Alpha grid as flat pairs: ref edge [ref edge ...]");
  sweep->add_option("--out", sweep_cli.output_dir, "Output directory");
  sweep->add_option("--select", sweep_select, "Selection stage; only 'score' is supported");
  sweep->add_flag("--plot", sweep_plot, "Emit median/IQR SVG charts");
  sweep->add_option("--jobs", sweep_jobs, "Parallel cells (default: hardware threads)");

  // lattice -----------------------------------------------------------------
  std::string lattice_graph, lattice_out, lattice_dot;
  bool lattice_distributive = false;
  int lattice_cap = 10;
  CLI::App* lattice = app.add_subcommand("lattice", "Enumerate the coarsening lattice of a graph");
  lattice->add_option("--graph", lattice_graph, "Graph JSON or DOT file")->required();
  lattice->add_option("--out", lattice_out, "Lattice JSON output (default stdout summary)");
  lattice->add_option("--dot", lattice_dot, "Write a Hasse-diagram DOT file");
  lattice->add_flag("--check-distributive", lattice_distributive,
                    "Report whether the lattice is distributive");
  lattice->add_option("--cap", lattice_cap, "Maximum node count to enumerate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      ExperimentConfig config = build_config(gen);
      auto written = generate_datasets(config);
      std::cout << "wrote " << written.size() << " files under " << config.output_dir
                << "\n";
      return kExitOk;
    }

    if (*learn) {
      TestConfig config;
      config.alpha_ref = learn_alpha_ref;
      config.alpha_edge = learn_alpha_edge;
      LearnCommandResult result =
          learn_from_manifest(learn_manifest, config, learn_oracle, learn_jobs);
      nlohmann::json out = coarsening_to_json(result.coarsening);
      if (learn_out.empty())
        std::cout << out.dump(2) << "\n";
      else
        write_json_file(learn_out, out);
      if (!learn_trace.empty()) write_trace_jsonl(learn_trace, result.trace);
      std::cerr << "learn stage: " << result.runtime_ms << " ms, "
                << result.coarsening.partition.part_count() << " parts, "
                << result.coarsening.edges.size() << " edges\n";
      return kExitOk;
    }

    if (*eval) {
      Coarsening learned = coarsening_from_json(read_json_file(eval_learned));
      GroundTruth truth = ground_truth_from_json(read_json_file(eval_truth));
      EvalResult result = evaluate_against_truth(learned, truth);
      nlohmann::json out = eval_result_to_json(result);
      if (eval_out.empty())
        std::cout << out.dump(2) << "\n";
      else
        write_json_file(eval_out, out);
      std::cerr << "ari " << result.ari << ", precision " << result.edges.precision
                << ", recall " << result.edges.recall << ", f " << result.edges.f_score
                << "\n";
      return kExitOk;
    }

    if (*sweep) {
      if (!sweep_select.empty() && sweep_select != "score")
        throw std::invalid_argument("--select: only 'score' is supported");
      ExperimentConfig config = build_config(sweep_cli);
      SweepOptions options;
      options.select_by_score = sweep_select == "score";
      options.emit_plots = sweep_plot;
      options.jobs = sweep_jobs > 0
                         ? sweep_jobs
                         : static_cast<int>(std::thread::hardware_concurrency());
      SweepOutcome outcome = run_sweep(config, options);
      std::cout << outcome.records.size() << " cells completed, "
                << outcome.failures.size() << " failed; artifacts:\n";
      for (const auto& artifact : outcome.artifacts) std::cout << "  " << artifact << "\n";
      if (!outcome.failures.empty()) {
        std::cerr << outcome.failures.size() << " cells failed (see failures.log)\n";
        if (outcome.records.empty()) return kExitPipeline;
      }
      return kExitOk;
    }

    if (*lattice) {
      Dag g = load_graph(lattice_graph);
      std::vector<Coarsening> coarsenings = enumerate_valid(g, lattice_cap);
      std::vector<Partition> all = enumerate_partitions(g.node_count(), lattice_cap);
      std::map<int, int> level_counts;
      for (const Partition& p : all) ++level_counts[p.part_count()];
      std::cout << "partitions: " << all.size() << ", valid coarsenings: "
                << coarsenings.size() << "\n";
      std::cout << "partitions by part count:";
      for (const auto& [parts, count] : level_counts)
        std::cout << " " << parts << ":" << count;
      std::cout << "\n";
      if (lattice_distributive)
        std::cout << "distributive: "
                  << (is_distributive(g, coarsenings) ? "true" : "false") << "\n";
      if (!lattice_out.empty()) {
        nlohmann::json out = nlohmann::json::array();
        for (const Coarsening& c : coarsenings) out.push_back(coarsening_to_json(c));
        write_json_file(lattice_out, out);
      }
      if (!lattice_dot.empty())
        write_text_file(lattice_dot, lattice_to_dot(coarsenings));
      return kExitOk;
    }
  } catch (const IoError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitIo;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitPipeline;
  }
  return kExitOk;
}
