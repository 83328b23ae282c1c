#include "coarse/scm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace coarse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<int> shuffled_nodes(int d, std::mt19937_64& rng) {
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + splitmix64(stream));
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(split_seed(seed, stream));
}

Dag sample_er_dag(int d, double density, std::mt19937_64& rng) {
  if (density < 0.0 || density > 1.0)
    throw std::invalid_argument("sample_er_dag: density outside [0, 1]");
  std::vector<int> order = shuffled_nodes(d, rng);
  std::bernoulli_distribution coin(density);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (coin(rng)) edges.push_back({order[i], order[j]});
  return Dag(d, std::move(edges));
}

Dag sample_ba_dag(int d, double density, std::mt19937_64& rng) {
  if (d < 2) throw std::invalid_argument("sample_ba_dag: need at least 2 nodes");
  const double degree = density * (d - 1);
  int m = static_cast<int>(std::lround(std::max(degree / 2.0, 1.0)));
  if (m >= d) {
    std::clog << "sample_ba_dag: attachment parameter m = " << m
              << " clamped to " << (d - 1) << "\n";
    m = d - 1;
  }

  // Preferential attachment on 0-based nodes, then +1.
  std::vector<std::pair<int, int>> undirected;
  std::vector<int> targets(m);
  std::iota(targets.begin(), targets.end(), 0);
  std::vector<int> repeated;
  for (int source = m; source < d; ++source) {
    for (int t : targets) undirected.push_back({source, t});
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, source);
    std::set<int> next;
    while (static_cast<int>(next.size()) < m) {
      std::uniform_int_distribution<size_t> pick(0, repeated.size() - 1);
      next.insert(repeated[pick(rng)]);
    }
    targets.assign(next.begin(), next.end());
  }

  std::vector<int> order = shuffled_nodes(d, rng);
  std::vector<int> position(d + 1, 0);
  for (int i = 0; i < d; ++i) position[order[i]] = i;
  std::vector<std::pair<int, int>> edges;
  for (const auto& [a, b] : undirected) {
    int u = a + 1, v = b + 1;
    if (position[u] < position[v])
      edges.push_back({u, v});
    else
      edges.push_back({v, u});
  }
  return Dag(d, std::move(edges));
}

Lganm sample_lganm(const Dag& g, std::mt19937_64& rng) {
  const int d = g.node_count();
  Lganm model{g, Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d),
              Eigen::VectorXd::Ones(d)};
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);
  for (const auto& [u, v] : g.edges()) {
    double w = magnitude(rng);
    model.weights(u - 1, v - 1) = sign(rng) ? w : -w;
  }
  std::uniform_real_distribution<double> mean(-2.0, 2.0);
  for (int v = 0; v < d; ++v) model.noise_means(v) = mean(rng);
  std::uniform_real_distribution<double> variance(0.5, 2.0);
  for (int v = 0; v < d; ++v) model.noise_variances(v) = variance(rng);
  return model;
}

namespace {

void intervened_noise(const Lganm& model, const SoftIntervention* intervention,
                      Eigen::VectorXd& means, Eigen::VectorXd& variances) {
  means = model.noise_means;
  variances = model.noise_variances;
  if (!intervention) return;
  if (intervention->targets.empty())
    throw std::invalid_argument("SoftIntervention: empty target set");
  for (int t : intervention->targets) {
    if (t < 1 || t > model.graph.node_count())
      throw std::out_of_range("SoftIntervention: target out of range");
    means(t - 1) += intervention->mean_shift;
    variances(t - 1) = intervention->variance;
  }
}

}  // namespace

Eigen::MatrixXd sample_environment(const Lganm& model,
                                   const SoftIntervention* intervention, int n,
                                   std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("sample_environment: n must be positive");
  const int d = model.graph.node_count();
  Eigen::VectorXd means, variances;
  intervened_noise(model, intervention, means, variances);

  Eigen::MatrixXd x(n, d);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int v : topological_order(model.graph)) {
    const double sd = std::sqrt(variances(v - 1));
    Eigen::VectorXd column(n);
    for (int i = 0; i < n; ++i) column(i) = means(v - 1) + sd * unit(rng);
    for (int u : model.graph.parents_of(v))
      column += model.weights(u - 1, v - 1) * x.col(u - 1);
    x.col(v - 1) = column;
  }
  return x;
}

Eigen::VectorXd model_mean(const Lganm& model, const SoftIntervention* intervention) {
  const int d = model.graph.node_count();
  Eigen::VectorXd means, variances;
  intervened_noise(model, intervention, means, variances);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - model.weights.transpose();
  return a.partialPivLu().solve(means);
}

Eigen::MatrixXd model_covariance(const Lganm& model,
                                 const SoftIntervention* intervention) {
  const int d = model.graph.node_count();
  Eigen::VectorXd means, variances;
  intervened_noise(model, intervention, means, variances);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - model.weights.transpose();
  Eigen::MatrixXd a_inv = a.partialPivLu().solve(Eigen::MatrixXd::Identity(d, d));
  return a_inv * variances.asDiagonal() * a_inv.transpose();
}

ExperimentSuite experiment_suite(const SuiteParams& params, std::uint64_t seed) {
  if (params.iota < 0 || params.iota > params.d)
    throw std::invalid_argument("experiment_suite: iota must lie in [0, d]");
  std::mt19937_64 graph_rng = seeded_rng(seed, 0);
  std::mt19937_64 model_rng = seeded_rng(seed, 1);
  std::mt19937_64 target_rng = seeded_rng(seed, 2);

  Dag graph = params.family == GraphFamily::kErdosRenyi
                  ? sample_er_dag(params.d, params.density, graph_rng)
                  : sample_ba_dag(params.d, params.density, graph_rng);
  Lganm model = sample_lganm(graph, model_rng);

  std::vector<int> pool = shuffled_nodes(params.d, target_rng);
  std::vector<SoftIntervention> interventions;
  std::vector<NodeSet> target_sets;
  for (int i = 0; i < params.iota; ++i) {
    interventions.push_back(SoftIntervention{{pool[i]}, params.mean_shift,
                                             params.intervention_variance});
    target_sets.push_back({pool[i]});
  }

  EnvironmentData data;
  std::mt19937_64 obs_rng = seeded_rng(seed, 3);
  data.observational = sample_environment(model, nullptr, params.n, obs_rng);
  for (size_t j = 0; j < interventions.size(); ++j) {
    std::mt19937_64 env_rng = seeded_rng(seed, 4 + j);
    data.interventional.push_back(
        sample_environment(model, &interventions[j], params.n, env_rng));
  }
  if (params.standardize_data) standardize(data);

  Coarsening truth = interventional_coarsening(graph, target_sets);
  return ExperimentSuite{std::move(graph), std::move(model),
                         std::move(interventions), std::move(data),
                         std::move(truth)};
}

}  // namespace coarse
