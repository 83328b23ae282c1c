#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coarse/coarsening.hpp"
#include "coarse/stats.hpp"

namespace coarse {

struct EdgeMetrics {
  double precision = 1.0;
  double recall = 1.0;
  double f_score = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// Hubert-Arabie adjusted Rand index. Degenerate contingency tables (both
/// partitions trivial or both discrete) score 1 when the partitions agree.
double ari(const Partition& p1, const Partition& p2);

/// Precision/recall/F over directed part pairs, comparing the learned edges
/// to the quotient of the true fine graph under the learned partition. The
/// quotient is taken as a plain directed-edge set even when cyclic. An empty
/// prediction has precision 1 by convention.
EdgeMetrics coarsened_edge_metrics(const Coarsening& learned, const Dag& true_g);

/// Gaussian log-likelihood of the coarsening's fine-grained expansion
/// (between-part edges expanded to all fine pairs, complete DAGs along
/// ascending node ids within parts), with per-node weights fit by pooled
/// least squares and environment-specific noise variances exactly where the
/// descendant matrix flags a response. Constants independent of the model are
/// dropped; only rankings are meaningful.
double mle_score(const Coarsening& c, const EnvironmentData& data,
                 const DescendantMatrix& m, double ridge_epsilon = 1e-8);

struct ScoredCandidate {
  TestConfig config;
  Coarsening coarsening;
  double score = 0.0;
};

/// True iff a should be preferred over b: higher score, ties toward coarser
/// partitions (fewer parts), then smaller alpha_ref, then smaller alpha_edge.
bool score_preferred(const ScoredCandidate& a, const ScoredCandidate& b);

/// Per-config outcome of a grid run, for callers that want the full table.
struct GridCell {
  TestConfig config;
  std::optional<ScoredCandidate> candidate;
  std::string error;
};

/// Runs the full statistical pipeline for every config, scores each learned
/// coarsening with mle_score, and returns the preferred candidate. Individual
/// failures are recorded and skipped; throws when every config fails.
ScoredCandidate grid_select(const std::vector<TestConfig>& grid,
                            const EnvironmentData& data, int jobs = 1,
                            std::vector<GridCell>* cells = nullptr);

}  // namespace coarse
