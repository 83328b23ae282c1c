#include "coarse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "coarse/svg_plot.hpp"

namespace coarse {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::check() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("ExperimentConfig." + field + ": " + why);
  };
  if (d_grid.empty()) fail("d", "empty grid");
  for (int d : d_grid)
    if (d < 2) fail("d", "need at least 2 nodes");
  if (density_grid.empty()) fail("density", "empty grid");
  for (double p : density_grid)
    if (p < 0.0 || p > 1.0) fail("density", "outside [0, 1]");
  if (iota_grid.empty()) fail("iota", "empty grid");
  for (int iota : iota_grid) {
    if (iota < 0) fail("iota", "negative");
    for (int d : d_grid)
      if (iota > d) fail("iota", "exceeds d");
  }
  if (n_grid.empty()) fail("n", "empty grid");
  for (int n : n_grid)
    if (n < 3) fail("n", "need at least 3 samples per environment");
  if (seeds.empty()) fail("seeds", "empty list");
  if (alpha_grid.empty()) fail("alphas", "empty grid");
  for (const auto& [ar, ae] : alpha_grid) {
    if (!(ar > 0.0 && ar < 1.0)) fail("alphas", "alpha_ref outside (0, 1)");
    if (!(ae > 0.0 && ae < 1.0)) fail("alphas", "alpha_edge outside (0, 1)");
  }
  if (output_dir.empty()) fail("output_dir", "empty");
}

std::string family_name(GraphFamily family) {
  return family == GraphFamily::kErdosRenyi ? "er" : "sf";
}

GraphFamily family_from_name(const std::string& name) {
  if (name == "er") return GraphFamily::kErdosRenyi;
  if (name == "sf" || name == "ba") return GraphFamily::kBarabasiAlbert;
  throw std::invalid_argument("ExperimentConfig.family: unknown family '" + name +
                              "' (expected er or sf)");
}

namespace {

template <typename T>
std::vector<T> scalar_or_list(const json& j, const char* field) {
  std::vector<T> out;
  const json& value = j.at(field);
  if (value.is_array())
    for (const auto& v : value) out.push_back(v.get<T>());
  else
    out.push_back(value.get<T>());
  return out;
}

std::string trim_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  if (values.empty()) return 0.0;
  double idx = q * (static_cast<double>(values.size()) - 1.0);
  size_t lo = static_cast<size_t>(std::floor(idx));
  size_t hi = static_cast<size_t>(std::ceil(idx));
  double frac = idx - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig config;
  if (j.contains("family")) config.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("d")) config.d_grid = scalar_or_list<int>(j, "d");
  if (j.contains("density")) config.density_grid = scalar_or_list<double>(j, "density");
  if (j.contains("iota")) config.iota_grid = scalar_or_list<int>(j, "iota");
  if (j.contains("n")) config.n_grid = scalar_or_list<int>(j, "n");
  if (j.contains("seeds")) config.seeds = scalar_or_list<int>(j, "seeds");
  if (j.contains("alphas")) {
    config.alpha_grid.clear();
    for (const auto& pair : j.at("alphas"))
      config.alpha_grid.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  }
  if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
  config.check();
  return config;
}

json experiment_config_to_json(const ExperimentConfig& config) {
  json alphas = json::array();
  for (const auto& [ar, ae] : config.alpha_grid) alphas.push_back({ar, ae});
  return json{{"family", family_name(config.family)},
              {"d", config.d_grid},
              {"density", config.density_grid},
              {"iota", config.iota_grid},
              {"n", config.n_grid},
              {"seeds", config.seeds},
              {"alphas", alphas},
              {"output_dir", config.output_dir}};
}

std::string RunRecord::csv_header() {
  return "seed,d,density,family,iota,n,alpha_ref,alpha_edge,ari,precision,recall,f,"
         "score,runtime_ms";
}

std::string RunRecord::csv_row() const {
  std::ostringstream out;
  out.precision(10);
  out << seed << "," << d << "," << density << "," << family << "," << iota << ","
      << n << "," << alpha_ref << "," << alpha_edge << "," << ari << "," << precision
      << "," << recall << "," << f << "," << score << "," << runtime_ms;
  return out.str();
}

namespace {

struct CellKey {
  int d;
  double density;
  int iota;
  int n;
  int seed;
};

std::string cell_dir_name(GraphFamily family, const CellKey& key) {
  std::ostringstream out;
  out << family_name(family) << "_d" << key.d << "_p" << trim_number(key.density)
      << "_i" << key.iota << "_n" << key.n;
  return out.str();
}

struct CellOutcome {
  std::vector<RunRecord> records;
  std::optional<RunRecord> selected;
  std::vector<std::string> failures;
};

CellOutcome run_cell(const ExperimentConfig& config, const CellKey& key,
                     bool select_by_score) {
  CellOutcome outcome;
  SuiteParams params;
  params.family = config.family;
  params.d = key.d;
  params.density = key.density;
  params.iota = key.iota;
  params.n = key.n;

  std::ostringstream label;
  label << "cell d=" << key.d << " density=" << key.density << " iota=" << key.iota
        << " n=" << key.n << " seed=" << key.seed;

  std::optional<ExperimentSuite> suite;
  try {
    suite = experiment_suite(params, static_cast<std::uint64_t>(key.seed));
  } catch (const std::exception& error) {
    outcome.failures.push_back(label.str() + ": generation failed: " + error.what());
    return outcome;
  }

  std::optional<DescendantMatrix> reference;
  try {
    reference = descendant_matrix(suite->data, TestConfig{}.alpha_ref);
  } catch (const std::exception& error) {
    outcome.failures.push_back(label.str() + ": reference tests failed: " + error.what());
    return outcome;
  }

  std::vector<ScoredCandidate> candidates;
  for (const auto& [alpha_ref, alpha_edge] : config.alpha_grid) {
    TestConfig test;
    test.alpha_ref = alpha_ref;
    test.alpha_edge = alpha_edge;
    try {
      auto start = std::chrono::steady_clock::now();
      StatisticalOracles oracles = statistical_oracles(suite->data, test);
      RepareOptions options;
      options.between = oracles.between;
      RepareResult result =
          repare(suite->data.node_count(), oracles.refine, oracles.edge, options);
      auto stop = std::chrono::steady_clock::now();

      RunRecord record;
      record.seed = key.seed;
      record.d = key.d;
      record.density = key.density;
      record.family = family_name(config.family);
      record.iota = key.iota;
      record.n = key.n;
      record.alpha_ref = alpha_ref;
      record.alpha_edge = alpha_edge;
      record.ari = ari(result.coarsening.partition, suite->truth.partition);
      EdgeMetrics edges = coarsened_edge_metrics(result.coarsening, suite->graph);
      record.precision = edges.precision;
      record.recall = edges.recall;
      record.f = edges.f_score;
      record.score = mle_score(result.coarsening, suite->data, *reference);
      record.runtime_ms =
          std::chrono::duration<double, std::milli>(stop - start).count();
      outcome.records.push_back(record);
      candidates.push_back(ScoredCandidate{test, result.coarsening, record.score});
    } catch (const std::exception& error) {
      std::ostringstream failure;
      failure << label.str() << " alpha=(" << alpha_ref << "," << alpha_edge
              << "): " << error.what();
      outcome.failures.push_back(failure.str());
    }
  }

  if (select_by_score && !candidates.empty()) {
    size_t best = 0;
    for (size_t i = 1; i < candidates.size(); ++i)
      if (score_preferred(candidates[i], candidates[best])) best = i;
    outcome.selected = outcome.records[best];
  }
  return outcome;
}

}  // namespace

SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.check();
  SweepOutcome outcome;

  std::vector<CellKey> cells;
  for (int d : config.d_grid)
    for (double density : config.density_grid)
      for (int iota : config.iota_grid)
        for (int n : config.n_grid)
          for (int seed : config.seeds)
            cells.push_back(CellKey{d, density, iota, n, seed});

  std::vector<CellOutcome> outcomes(cells.size());
  int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(cells.size())));
  if (jobs == 1) {
    for (size_t i = 0; i < cells.size(); ++i)
      outcomes[i] = run_cell(config, cells[i], options.select_by_score);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (size_t i = next++; i < cells.size(); i = next++)
          outcomes[i] = run_cell(config, cells[i], options.select_by_score);
      });
    for (auto& worker : workers) worker.join();
  }

  for (CellOutcome& cell : outcomes) {
    outcome.records.insert(outcome.records.end(), cell.records.begin(), cell.records.end());
    if (cell.selected) outcome.selected.push_back(*cell.selected);
    outcome.failures.insert(outcome.failures.end(), cell.failures.begin(),
                            cell.failures.end());
  }

  const fs::path out_dir = options.output_dir.value_or(fs::path(config.output_dir));
  fs::create_directories(out_dir);
  {
    std::ostringstream csv;
    csv << RunRecord::csv_header() << "\n";
    for (const RunRecord& record : outcome.records) csv << record.csv_row() << "\n";
    fs::path path = out_dir / "results.csv";
    write_text_file(path, csv.str());
    outcome.artifacts.push_back(path);
  }
  if (options.select_by_score) {
    std::ostringstream csv;
    csv << RunRecord::csv_header() << "\n";
    for (const RunRecord& record : outcome.selected) csv << record.csv_row() << "\n";
    fs::path path = out_dir / "selection.csv";
    write_text_file(path, csv.str());
    outcome.artifacts.push_back(path);
  }
  if (!outcome.failures.empty()) {
    std::ostringstream log;
    for (const std::string& failure : outcome.failures) log << failure << "\n";
    fs::path path = out_dir / "failures.log";
    write_text_file(path, log.str());
    outcome.artifacts.push_back(path);
  }

  if (options.emit_plots && !outcome.records.empty()) {
    auto make_chart = [&](const std::string& file, const std::string& title,
                          const std::string& y_label, bool log_y, auto value_of) {
      // One series per (d, density, iota, alpha) combination, across n.
      std::map<std::string, std::map<int, std::vector<double>>> groups;
      for (const RunRecord& record : outcome.records) {
        std::ostringstream series_label;
        series_label << "d=" << record.d << " p=" << record.density
                     << " i=" << record.iota;
        if (config.alpha_grid.size() > 1)
          series_label << " a=(" << record.alpha_ref << "," << record.alpha_edge << ")";
        groups[series_label.str()][record.n].push_back(value_of(record));
      }
      std::vector<BandSeries> series;
      for (auto& [series_label, by_n] : groups) {
        BandSeries s;
        s.label = series_label;
        for (auto& [n, values] : by_n)
          s.points.push_back(BandPoint{static_cast<double>(n),
                                       percentile(values, 0.5),
                                       percentile(values, 0.25),
                                       percentile(values, 0.75)});
        series.push_back(std::move(s));
      }
      ChartSpec spec;
      spec.title = title;
      spec.x_label = "samples per environment";
      spec.y_label = y_label;
      spec.log_x = true;
      spec.log_y = log_y;
      fs::path path = out_dir / file;
      write_text_file(path, render_band_chart_svg(spec, series));
      outcome.artifacts.push_back(path);
    };
    make_chart("ari_vs_n.svg", "Partition recovery (median and IQR)", "ARI", false,
               [](const RunRecord& r) { return r.ari; });
    make_chart("fscore_vs_n.svg", "Edge recovery (median and IQR)", "F-score", false,
               [](const RunRecord& r) { return r.f; });
    make_chart("runtime_vs_n.svg", "Learn-stage runtime (median and IQR)",
               "runtime [ms]", true,
               [](const RunRecord& r) { return r.runtime_ms; });
  }
  return outcome;
}

std::vector<fs::path> generate_datasets(const ExperimentConfig& config) {
  config.check();
  std::vector<fs::path> written;
  for (int d : config.d_grid) {
    for (double density : config.density_grid) {
      for (int iota : config.iota_grid) {
        for (int n : config.n_grid) {
          for (int seed : config.seeds) {
            SuiteParams params;
            params.family = config.family;
            params.d = d;
            params.density = density;
            params.iota = iota;
            params.n = n;
            ExperimentSuite suite =
                experiment_suite(params, static_cast<std::uint64_t>(seed));

            CellKey key{d, density, iota, n, seed};
            fs::path dir = fs::path(config.output_dir) / cell_dir_name(config.family, key) /
                           ("seed_" + std::to_string(seed));
            fs::create_directories(dir);

            Manifest manifest;
            manifest.observational = "obs.csv";
            write_matrix_csv(dir / "obs.csv", suite.data.observational);
            written.push_back(dir / "obs.csv");
            for (size_t j = 0; j < suite.data.interventional.size(); ++j) {
              std::string file = "env_" + std::to_string(j + 1) + ".csv";
              write_matrix_csv(dir / file, suite.data.interventional[j]);
              written.push_back(dir / file);
              manifest.interventions.push_back(
                  ManifestEntry{file, suite.interventions[j].targets});
            }
            write_manifest(dir / "manifest.json", manifest);
            written.push_back(dir / "manifest.json");
            write_json_file(dir / "ground_truth.json",
                            ground_truth_to_json(ground_truth_of(suite)));
            written.push_back(dir / "ground_truth.json");
          }
        }
      }
    }
  }
  return written;
}

LearnCommandResult learn_from_manifest(const fs::path& manifest_path,
                                       const TestConfig& config,
                                       bool use_exact_oracles, int jobs) {
  EnvironmentData data = load_environment_data(manifest_path);
  standardize(data);

  auto start = std::chrono::steady_clock::now();
  RepareResult r = [&] {
    if (use_exact_oracles) {
      fs::path truth_path = manifest_path.parent_path() / "ground_truth.json";
      if (!fs::exists(truth_path))
        throw IoError("exact-oracle mode needs " + truth_path.string());
      GroundTruth truth = ground_truth_from_json(read_json_file(truth_path));
      SignatureMatrix m = reachability_signatures(truth.graph, truth.targets);
      RepareOptions options;
      options.between = signature_between_policy(m);
      return repare(truth.graph.node_count(), signature_refine_oracle(m),
                    dsep_edge_oracle(truth.graph), options);
    }
    StatisticalOracles oracles = statistical_oracles(data, config, jobs);
    RepareOptions options;
    options.between = oracles.between;
    return repare(data.node_count(), oracles.refine, oracles.edge, options);
  }();
  auto stop = std::chrono::steady_clock::now();
  return LearnCommandResult{
      std::move(r.coarsening), std::move(r.trace),
      std::chrono::duration<double, std::milli>(stop - start).count()};
}

EvalResult evaluate_against_truth(const Coarsening& learned, const GroundTruth& truth) {
  EvalResult result;
  result.ari = ari(learned.partition, truth.interventional.partition);
  result.edges = coarsened_edge_metrics(learned, truth.graph);
  return result;
}

json eval_result_to_json(const EvalResult& result) {
  return json{{"ari", result.ari},
              {"precision", result.edges.precision},
              {"recall", result.edges.recall},
              {"f_score", result.edges.f_score},
              {"tp", result.edges.tp},
              {"fp", result.edges.fp},
              {"fn", result.edges.fn}};
}

}  // namespace coarse
