#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "coarse/coarsening.hpp"
#include "coarse/dag.hpp"
#include "coarse/stats.hpp"

namespace coarse {

/// Linear Gaussian additive-noise model: X_v = sum_{u in pa(v)} w_uv X_u + e_v
/// with e_v ~ N(mean_v, var_v). weights(u-1, v-1) is nonzero only on edges.
struct Lganm {
  Dag graph;
  Eigen::MatrixXd weights;
  Eigen::VectorXd noise_means;
  Eigen::VectorXd noise_variances;
};

/// Soft shift intervention: targets keep their parent dependence but their
/// noise mean shifts by mean_shift and their noise variance becomes variance.
struct SoftIntervention {
  NodeSet targets;
  double mean_shift = 2.0;
  double variance = 1.0;
};

/// Deterministic sub-stream derivation (splitmix64 mixing), so that e.g.
/// changing the sample size cannot change the sampled graph.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream);

/// Erdos-Renyi DAG: a uniformly random causal order, then each forward pair
/// becomes an edge independently with probability `density`.
Dag sample_er_dag(int d, double density, std::mt19937_64& rng);

/// Barabasi-Albert DAG: undirected preferential attachment with
/// m = round(max(deg/2, 1)) where deg = density * (d - 1), oriented by a
/// uniformly random node ordering. m is clamped to d - 1 when oversized.
Dag sample_ba_dag(int d, double density, std::mt19937_64& rng);

/// Edge weights uniform on [0.5, 2.0] with independent random signs; noise
/// means uniform on [-2, 2]; noise variances uniform on [0.5, 2].
Lganm sample_lganm(const Dag& g, std::mt19937_64& rng);

/// Ancestral sampling of n rows; pass nullptr for the observational regime.
Eigen::MatrixXd sample_environment(const Lganm& model,
                                   const SoftIntervention* intervention, int n,
                                   std::mt19937_64& rng);

/// Closed-form moments via (I - B^T)^{-1} algebra.
Eigen::VectorXd model_mean(const Lganm& model, const SoftIntervention* intervention);
Eigen::MatrixXd model_covariance(const Lganm& model,
                                 const SoftIntervention* intervention);

enum class GraphFamily { kErdosRenyi, kBarabasiAlbert };

struct SuiteParams {
  GraphFamily family = GraphFamily::kErdosRenyi;
  int d = 10;
  double density = 0.2;
  int iota = 5;  // number of single-target interventions
  int n = 1000;  // per-environment sample size
  double mean_shift = 2.0;
  double intervention_variance = 1.0;
  bool standardize_data = true;
};

/// One full synthetic experiment: graph, model, iota distinct single-target
/// interventions, sampled environments (standardized with pooled statistics
/// unless disabled), and the ground-truth interventional coarsening.
struct ExperimentSuite {
  Dag graph;
  Lganm model;
  std::vector<SoftIntervention> interventions;
  EnvironmentData data;
  Coarsening truth;
};

ExperimentSuite experiment_suite(const SuiteParams& params, std::uint64_t seed);

}  // namespace coarse
