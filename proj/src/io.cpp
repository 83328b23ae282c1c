#include "coarse/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace coarse {

using nlohmann::json;

namespace {

json nodeset_to_json(const NodeSet& s) {
  json out = json::array();
  for (int v : s) out.push_back(v);
  return out;
}

NodeSet nodeset_from_json(const json& j) {
  NodeSet out;
  for (const auto& v : j) out.insert(v.get<int>());
  return out;
}

std::string part_label(const NodeSet& part) {
  std::string label;
  for (int v : part) {
    if (!label.empty()) label += ",";
    label += std::to_string(v);
  }
  return label;
}

}  // namespace

json dag_to_json(const Dag& g) {
  json edges = json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  return json{{"d", g.node_count()}, {"edges", edges}};
}

Dag dag_from_json(const json& j) {
  if (!j.contains("d") || !j.contains("edges"))
    throw IoError("graph JSON needs fields \"d\" and \"edges\"");
  std::vector<std::pair<int, int>> edges;
  for (const auto& edge : j.at("edges"))
    edges.push_back({edge.at(0).get<int>(), edge.at(1).get<int>()});
  try {
    return Dag(j.at("d").get<int>(), std::move(edges));
  } catch (const std::exception& error) {
    throw IoError(std::string("graph JSON invalid: ") + error.what());
  }
}

std::string dag_to_dot(const Dag& g) {
  std::ostringstream out;
  out << "digraph g {\n";
  std::vector<bool> mentioned(g.node_count() + 1, false);
  for (const auto& [u, v] : g.edges()) {
    out << "  " << u << " -> " << v << ";\n";
    mentioned[u] = mentioned[v] = true;
  }
  for (int v = 1; v <= g.node_count(); ++v)
    if (!mentioned[v]) out << "  " << v << ";\n";
  out << "}\n";
  return out.str();
}

Dag dag_from_dot(const std::string& text) {
  std::vector<std::pair<int, int>> edges;
  int max_node = 0;
  std::istringstream in(text);
  std::string line;
  auto parse_int = [](const std::string& token, int& value) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    return ec == std::errc() && ptr == token.data() + token.size();
  };
  while (std::getline(in, line)) {
    // strip comments, braces, semicolons
    if (auto pos = line.find("//"); pos != std::string::npos) line.resize(pos);
    for (char& c : line)
      if (c == ';' || c == '{' || c == '}') c = ' ';
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;
    if (first == "digraph" || first == "graph") continue;
    int u = 0;
    if (!parse_int(first, u)) continue;
    max_node = std::max(max_node, u);
    std::string arrow;
    if (tokens >> arrow) {
      if (arrow != "->") throw IoError("DOT parse: expected '->' after node id");
      std::string second;
      int v = 0;
      if (!(tokens >> second) || !parse_int(second, v))
        throw IoError("DOT parse: missing target node id");
      max_node = std::max(max_node, v);
      edges.push_back({u, v});
    }
  }
  if (max_node == 0) throw IoError("DOT parse: no nodes found");
  try {
    return Dag(max_node, std::move(edges));
  } catch (const std::exception& error) {
    throw IoError(std::string("DOT graph invalid: ") + error.what());
  }
}

json partition_to_json(const Partition& p) {
  json out = json::array();
  for (const NodeSet& part : p.parts()) out.push_back(nodeset_to_json(part));
  return out;
}

Partition partition_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw IoError("partition JSON must be a non-empty array of parts");
  std::vector<NodeSet> parts;
  int d = 0;
  for (const auto& part : j) {
    parts.push_back(nodeset_from_json(part));
    for (int v : parts.back()) d = std::max(d, v);
  }
  try {
    return Partition(d, std::move(parts));
  } catch (const std::exception& error) {
    throw IoError(std::string("partition JSON invalid: ") + error.what());
  }
}

json coarsening_to_json(const Coarsening& c) {
  json edges = json::array();
  for (const auto& [i, j] : c.edges) edges.push_back({i, j});
  return json{{"partition", partition_to_json(c.partition)}, {"edges", edges}};
}

Coarsening coarsening_from_json(const json& j) {
  if (!j.contains("partition") || !j.contains("edges"))
    throw IoError("coarsening JSON needs fields \"partition\" and \"edges\"");
  Partition p = partition_from_json(j.at("partition"));
  std::set<std::pair<int, int>> edges;
  for (const auto& edge : j.at("edges")) {
    int a = edge.at(0).get<int>(), b = edge.at(1).get<int>();
    if (a < 0 || b < 0 || a >= p.part_count() || b >= p.part_count())
      throw IoError("coarsening JSON: edge index out of range");
    edges.insert({a, b});
  }
  Coarsening c{std::move(p), std::move(edges)};
  try {
    c.quotient_dag();  // rejects cyclic edge sets
  } catch (const std::exception& error) {
    throw IoError(std::string("coarsening JSON invalid: ") + error.what());
  }
  return c;
}

std::string coarsening_to_dot(const Coarsening& c) {
  std::ostringstream out;
  out << "digraph coarsening {\n";
  for (int i = 0; i < c.partition.part_count(); ++i)
    out << "  p" << i << " [label=\"{" << part_label(c.partition.part(i)) << "}\"];\n";
  for (const auto& [i, j] : c.edges) out << "  p" << i << " -> p" << j << ";\n";
  out << "}\n";
  return out.str();
}

std::string lattice_to_dot(const std::vector<Coarsening>& lattice) {
  std::ostringstream out;
  out << "digraph lattice {\n  rankdir=BT;\n";
  auto label = [&](const Coarsening& c) {
    std::string text;
    for (const NodeSet& part : c.partition.parts()) {
      if (!text.empty()) text += "|";
      for (int v : part) text += std::to_string(v);
    }
    return text;
  };
  for (size_t i = 0; i < lattice.size(); ++i)
    out << "  n" << i << " [label=\"" << label(lattice[i]) << "\"];\n";
  // Cover relations: i directly below j with nothing in between.
  for (size_t i = 0; i < lattice.size(); ++i) {
    for (size_t j = 0; j < lattice.size(); ++j) {
      if (i == j) continue;
      if (!refines(lattice[i], lattice[j])) continue;
      if (lattice[i].partition == lattice[j].partition) continue;
      bool covered = true;
      for (size_t k = 0; k < lattice.size() && covered; ++k) {
        if (k == i || k == j) continue;
        if (refines(lattice[i], lattice[k]) && refines(lattice[k], lattice[j]) &&
            lattice[k].partition != lattice[i].partition &&
            lattice[k].partition != lattice[j].partition)
          covered = false;
      }
      if (covered) out << "  n" << i << " -> n" << j << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.precision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out << ",";
    out << (c + 1);
  }
  out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ",";
      out << m(r, c);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
  Eigen::Index cols = std::count(line.begin(), line.end(), ',') + 1;
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    Eigen::Index c = 0;
    while (std::getline(fields, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw IoError("malformed CSV value '" + field + "' in " + path.string());
      }
      ++c;
    }
    if (c != cols)
      throw IoError("ragged CSV row in " + path.string());
    ++rows;
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[r * cols + c];
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json interventions = json::array();
  for (const ManifestEntry& entry : manifest.interventions) {
    json e{{"file", entry.file}};
    e["targets"] = entry.targets ? nodeset_to_json(*entry.targets) : json();
    interventions.push_back(e);
  }
  write_json_file(path, json{{"observational", manifest.observational},
                             {"interventions", interventions}});
}

Manifest read_manifest(const std::filesystem::path& path) {
  json j = read_json_file(path);
  if (!j.contains("observational"))
    throw IoError("manifest missing \"observational\": " + path.string());
  Manifest manifest;
  manifest.observational = j.at("observational").get<std::string>();
  for (const auto& e : j.value("interventions", json::array())) {
    ManifestEntry entry;
    entry.file = e.at("file").get<std::string>();
    if (e.contains("targets") && !e.at("targets").is_null())
      entry.targets = nodeset_from_json(e.at("targets"));
    manifest.interventions.push_back(std::move(entry));
  }
  return manifest;
}

EnvironmentData load_environment_data(const std::filesystem::path& manifest_path) {
  Manifest manifest = read_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  auto resolve = [&](const std::string& file) {
    std::filesystem::path p(file);
    return p.is_absolute() ? p : base / p;
  };
  EnvironmentData data;
  data.observational = read_matrix_csv(resolve(manifest.observational));
  for (const ManifestEntry& entry : manifest.interventions)
    data.interventional.push_back(read_matrix_csv(resolve(entry.file)));
  try {
    validate(data);
  } catch (const std::exception& error) {
    throw IoError(std::string("environment data invalid: ") + error.what());
  }
  return data;
}

json ground_truth_to_json(const GroundTruth& truth) {
  json weights = json::array();
  for (const auto& [u, v, w] : truth.weights) weights.push_back({u, v, w});
  json targets = json::array();
  for (const NodeSet& t : truth.targets) targets.push_back(nodeset_to_json(t));
  return json{{"graph", dag_to_json(truth.graph)},
              {"weights", weights},
              {"noise_means", truth.noise_means},
              {"noise_variances", truth.noise_variances},
              {"targets", targets},
              {"interventional_coarsening", coarsening_to_json(truth.interventional)}};
}

GroundTruth ground_truth_from_json(const json& j) {
  for (const char* field : {"graph", "weights", "noise_means", "noise_variances",
                            "targets", "interventional_coarsening"})
    if (!j.contains(field))
      throw IoError(std::string("ground truth JSON missing \"") + field + "\"");
  Dag graph = dag_from_json(j.at("graph"));
  GroundTruth truth{graph, {}, {}, {}, {}, coarsening_from_json(j.at("interventional_coarsening"))};
  for (const auto& w : j.at("weights"))
    truth.weights.push_back({w.at(0).get<int>(), w.at(1).get<int>(), w.at(2).get<double>()});
  truth.noise_means = j.at("noise_means").get<std::vector<double>>();
  truth.noise_variances = j.at("noise_variances").get<std::vector<double>>();
  for (const auto& t : j.at("targets")) truth.targets.push_back(nodeset_from_json(t));
  return truth;
}

GroundTruth ground_truth_of(const ExperimentSuite& suite) {
  GroundTruth truth{suite.graph, {}, {}, {}, {}, suite.truth};
  for (const auto& [u, v] : suite.graph.edges())
    truth.weights.push_back({u, v, suite.model.weights(u - 1, v - 1)});
  const int d = suite.graph.node_count();
  truth.noise_means.assign(suite.model.noise_means.data(),
                           suite.model.noise_means.data() + d);
  truth.noise_variances.assign(suite.model.noise_variances.data(),
                               suite.model.noise_variances.data() + d);
  for (const SoftIntervention& iv : suite.interventions)
    truth.targets.push_back(iv.targets);
  return truth;
}

void write_trace_jsonl(const std::filesystem::path& path, const LearningTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const TraceStep& step : trace) {
    json queries = json::array();
    for (const auto& [query, answer] : step.queries) {
      const char* kind = query.kind == EdgeQueryKind::kBetweenSplit ? "between-split"
                         : query.kind == EdgeQueryKind::kParentOfSplit
                             ? "parent-of-split"
                             : "child-of-split";
      json given = json::array();
      for (const NodeSet& z : query.conditioning) given.push_back(nodeset_to_json(z));
      queries.push_back(json{{"kind", kind},
                             {"from", nodeset_to_json(query.from_part)},
                             {"to", nodeset_to_json(query.to_part)},
                             {"given", given},
                             {"edge", answer}});
    }
    json line{{"partition", partition_to_json(step.partition_before)},
              {"split", json{{"part", step.decision.target_part},
                             {"a", nodeset_to_json(step.decision.part_a)},
                             {"b", nodeset_to_json(step.decision.part_b)}}},
              {"queries", queries}};
    out << line.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& error) {
    throw IoError("JSON parse error in " + path.string() + ": " + error.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace coarse
