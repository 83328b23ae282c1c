#include "coarse/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <thread>

namespace coarse {

double ari(const Partition& p1, const Partition& p2) {
  if (p1.node_count() != p2.node_count())
    throw std::invalid_argument("ari: mismatched node counts");
  const int d = p1.node_count();
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };

  std::map<std::pair<int, int>, long> cells;
  for (int v = 1; v <= d; ++v) ++cells[{p1.part_of(v), p2.part_of(v)}];
  double index = 0.0;
  for (const auto& [cell, count] : cells) index += choose2(static_cast<double>(count));
  double a = 0.0, b = 0.0;
  for (const NodeSet& part : p1.parts()) a += choose2(static_cast<double>(part.size()));
  for (const NodeSet& part : p2.parts()) b += choose2(static_cast<double>(part.size()));

  const double expected = a * b / choose2(static_cast<double>(d));
  const double maximum = (a + b) / 2.0;
  if (maximum == expected) return p1 == p2 ? 1.0 : 0.0;
  return (index - expected) / (maximum - expected);
}

EdgeMetrics coarsened_edge_metrics(const Coarsening& learned, const Dag& true_g) {
  if (learned.partition.node_count() != true_g.node_count())
    throw std::invalid_argument("coarsened_edge_metrics: partition does not cover the graph");
  std::set<std::pair<int, int>> truth;
  for (const auto& [u, v] : true_g.edges()) {
    int pu = learned.partition.part_of(u);
    int pv = learned.partition.part_of(v);
    if (pu != pv) truth.insert({pu, pv});
  }
  EdgeMetrics out;
  for (const auto& edge : learned.edges) {
    if (truth.count(edge))
      ++out.tp;
    else
      ++out.fp;
  }
  out.fn = static_cast<long>(truth.size()) - out.tp;
  out.precision = learned.edges.empty()
                      ? 1.0
                      : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp);
  out.recall = truth.empty()
                   ? 1.0
                   : static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn);
  out.f_score = (out.precision + out.recall) > 0.0
                    ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                    : 0.0;
  return out;
}

namespace {

struct EnvironmentMoments {
  double rows = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // centered, MLE normalization (1/n)
};

EnvironmentMoments moments_of(const Eigen::MatrixXd& env) {
  EnvironmentMoments m;
  m.rows = static_cast<double>(env.rows());
  m.mean = env.colwise().mean();
  Eigen::MatrixXd centered = env.rowwise() - m.mean.transpose();
  m.covariance = centered.transpose() * centered / m.rows;
  return m;
}

}  // namespace

double mle_score(const Coarsening& c, const EnvironmentData& data,
                 const DescendantMatrix& m, double ridge_epsilon) {
  validate(data);
  const int d = data.node_count();
  if (c.partition.node_count() != d)
    throw std::invalid_argument("mle_score: coarsening does not cover the data columns");
  const int e = data.interventional_count();
  if (m.entries.rows() < d || m.entries.cols() < e)
    throw std::invalid_argument("mle_score: descendant matrix shape mismatch");

  // Expansion parents: all fine pairs across coarse edges, plus ascending
  // node ids within each part.
  std::vector<std::vector<int>> expansion_parents(d + 1);
  for (const auto& [pi, pj] : c.edges)
    for (int w : c.partition.part(pj))
      for (int v : c.partition.part(pi)) expansion_parents[w].push_back(v);
  for (const NodeSet& part : c.partition.parts()) {
    for (int w : part)
      for (int v : part)
        if (v < w) expansion_parents[w].push_back(v);
  }
  for (int w = 1; w <= d; ++w)
    std::sort(expansion_parents[w].begin(), expansion_parents[w].end());

  // Pooled uncentered Gram for the shared least-squares fit, per-environment
  // centered covariances for the likelihood terms.
  std::vector<EnvironmentMoments> envs;
  envs.push_back(moments_of(data.observational));
  for (const auto& env : data.interventional) envs.push_back(moments_of(env));
  Eigen::MatrixXd gram = data.observational.transpose() * data.observational;
  for (const auto& env : data.interventional) gram += env.transpose() * env;

  auto flagged = [&](int node, int env_index) {
    // env_index 0 is observational and never environment-specific.
    return env_index > 0 && m.entries(node - 1, env_index - 1);
  };

  // Per-node weights and residual variances.
  Eigen::MatrixXd coefficient = Eigen::MatrixXd::Zero(d, d);  // (w-1, parent-1)
  bool floored = false;
  for (int w = 1; w <= d; ++w) {
    const auto& parents = expansion_parents[w];
    if (parents.empty()) continue;
    const int k = static_cast<int>(parents.size());
    Eigen::MatrixXd gpp(k, k);
    Eigen::VectorXd gpw(k);
    for (int i = 0; i < k; ++i) {
      gpw(i) = gram(parents[i] - 1, w - 1);
      for (int j = 0; j < k; ++j) gpp(i, j) = gram(parents[i] - 1, parents[j] - 1);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gpp);
    if (llt.info() != Eigen::Success) {
      gpp.diagonal().array() += ridge_epsilon * std::max(1.0, gpp.diagonal().maxCoeff());
      llt.compute(gpp);
    }
    Eigen::VectorXd beta = llt.solve(gpw);
    for (int i = 0; i < k; ++i) coefficient(w - 1, parents[i] - 1) = beta(i);
  }

  // Residual variance of node w in environment moments me given the fit.
  auto residual_variance = [&](int w, const EnvironmentMoments& me) {
    const auto& parents = expansion_parents[w];
    double var = me.covariance(w - 1, w - 1);
    for (int u : parents) {
      const double bu = coefficient(w - 1, u - 1);
      var -= 2.0 * bu * me.covariance(u - 1, w - 1);
      for (int v : parents)
        var += bu * coefficient(w - 1, v - 1) * me.covariance(u - 1, v - 1);
    }
    return var;
  };

  // Noise variances: environment-specific where flagged, otherwise pooled
  // over the observational and unflagged environments.
  Eigen::MatrixXd omega(d, 1 + e);
  for (int w = 1; w <= d; ++w) {
    double pooled_ss = 0.0, pooled_rows = 0.0;
    for (int j = 0; j <= e; ++j) {
      if (flagged(w, j)) continue;
      pooled_ss += residual_variance(w, envs[j]) * envs[j].rows;
      pooled_rows += envs[j].rows;
    }
    const double shared = pooled_rows > 0 ? pooled_ss / pooled_rows : 1.0;
    for (int j = 0; j <= e; ++j) {
      double value = flagged(w, j) ? residual_variance(w, envs[j]) : shared;
      if (value < 1e-12) {
        value = 1e-12;
        floored = true;
      }
      omega(w - 1, j) = value;
    }
  }
  if (floored)
    std::clog << "mle_score: residual variance floored at 1e-12\n";

  // A X = eps with A = I - B^T; ln det K = -sum ln omega since det A = 1.
  Eigen::MatrixXd a_matrix =
      Eigen::MatrixXd::Identity(d, d) - coefficient;
  double score = 0.0;
  for (int j = 0; j <= e; ++j) {
    Eigen::MatrixXd transformed = a_matrix * envs[j].covariance * a_matrix.transpose();
    double log_det_k = 0.0, trace = 0.0;
    for (int w = 0; w < d; ++w) {
      log_det_k -= std::log(omega(w, j));
      trace += transformed(w, w) / omega(w, j);
    }
    score += envs[j].rows / 2.0 * (log_det_k - trace);
  }
  return score;
}

bool score_preferred(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  const int pa = a.coarsening.partition.part_count();
  const int pb = b.coarsening.partition.part_count();
  if (pa != pb) return pa < pb;
  if (a.config.alpha_ref != b.config.alpha_ref)
    return a.config.alpha_ref < b.config.alpha_ref;
  return a.config.alpha_edge < b.config.alpha_edge;
}

ScoredCandidate grid_select(const std::vector<TestConfig>& grid,
                            const EnvironmentData& data, int jobs,
                            std::vector<GridCell>* cells) {
  if (grid.empty()) throw std::invalid_argument("grid_select: empty grid");
  std::vector<GridCell> table(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) table[i].config = grid[i];

  // All candidates are scored against one reference descendant matrix at the
  // conventional level, so that a permissive alpha_ref cannot buy itself
  // extra environment-specific variance freedom in the likelihood.
  std::optional<DescendantMatrix> reference;
  std::string reference_error;
  try {
    reference = descendant_matrix(data, TestConfig{}.alpha_ref);
  } catch (const std::exception& error) {
    reference_error = error.what();
  }

  auto run_cell = [&](size_t i) {
    try {
      if (!reference) throw std::runtime_error(reference_error);
      StatisticalOracles oracles = statistical_oracles(data, grid[i]);
      RepareOptions options;
      options.between = oracles.between;
      RepareResult result =
          repare(data.node_count(), oracles.refine, oracles.edge, options);
      double score = mle_score(result.coarsening, data, *reference,
                               grid[i].ridge_epsilon);
      table[i].candidate =
          ScoredCandidate{grid[i], std::move(result.coarsening), score};
    } catch (const std::exception& error) {
      table[i].error = error.what();
    }
  };

  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  if (jobs == 1) {
    for (size_t i = 0; i < grid.size(); ++i) run_cell(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (size_t i = next++; i < grid.size(); i = next++) run_cell(i);
      });
    for (auto& worker : workers) worker.join();
  }

  const ScoredCandidate* best = nullptr;
  for (const GridCell& cell : table) {
    if (!cell.candidate) continue;
    if (!best || score_preferred(*cell.candidate, *best)) best = &*cell.candidate;
  }
  if (cells) *cells = table;
  if (!best) {
    std::string detail;
    for (const GridCell& cell : table)
      if (!cell.error.empty()) detail += " [" + cell.error + "]";
    throw std::runtime_error("grid_select: every configuration failed:" + detail);
  }
  return *best;
}

}  // namespace coarse
