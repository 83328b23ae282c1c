#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coarse/coarsening.hpp"
#include "coarse/dag.hpp"
#include "coarse/partition.hpp"

namespace coarse {

/// A refine oracle's answer: the part to split (index into the canonical
/// partition it was shown) and the two halves, or "no split".
struct RefineDecision {
  int target_part = -1;
  NodeSet part_a;
  NodeSet part_b;

  bool is_none() const { return target_part < 0; }
  static RefineDecision none() { return {}; }
};

enum class EdgeQueryKind { kBetweenSplit, kParentOfSplit, kChildOfSplit };

/// One conditional-dependence question posed to the edge oracle: is there an
/// edge from `from_part` to `to_part`, testing dependence given the listed
/// conditioning parts?
struct EdgeQuery {
  NodeSet from_part;
  NodeSet to_part;
  std::vector<NodeSet> conditioning;
  EdgeQueryKind kind = EdgeQueryKind::kBetweenSplit;
};

/// One engine step: the partition before the split, the split taken, and all
/// edge queries issued (in order) with their answers.
struct TraceStep {
  Partition partition_before;
  RefineDecision decision;
  std::vector<std::pair<EdgeQuery, bool>> queries;
};

using LearningTrace = std::vector<TraceStep>;

using RefineOracle = std::function<RefineDecision(const Partition&)>;
using EdgeOracle = std::function<bool(const EdgeQuery&)>;

/// Directions to test between the halves of a split, in order. `true` means
/// part_a -> part_b. The default policy tests a->b then b->a.
using BetweenPolicy =
    std::function<std::vector<bool>(const NodeSet& part_a, const NodeSet& part_b)>;

/// Thrown when an oracle breaks its contract: a split that does not partition
/// the chosen part, a split violating acyclicity preservation (when a graph
/// is supplied for checking), or an accepted edge set that becomes cyclic.
class OracleViolation : public std::runtime_error {
 public:
  OracleViolation(std::string message, std::vector<int> witness_cycle = {})
      : std::runtime_error(std::move(message)),
        witness_cycle_(std::move(witness_cycle)) {}

  /// Part indices forming the offending cycle, when one exists.
  const std::vector<int>& witness_cycle() const { return witness_cycle_; }

 private:
  std::vector<int> witness_cycle_;
};

struct RepareOptions {
  /// When set, each split is checked against Def-style acyclicity
  /// preservation on this graph and violations throw OracleViolation.
  const Dag* contract_check = nullptr;
  /// Between-split direction policy; defaults to testing both directions.
  BetweenPolicy between;
};

struct RepareResult {
  Coarsening coarsening;
  LearningTrace trace;
};

/// Lattice descent from the trivial partition: repeatedly asks the refine
/// oracle for a split, then rebuilds the edge set around the split part by
/// querying the edge oracle (between-split first, then parents of the split
/// part sorted by part index, then children sorted by part index). Edges not
/// incident to the split part are carried over. Iterative; at most d-1 splits.
RepareResult repare(int node_count, const RefineOracle& refine,
                    const EdgeOracle& is_edge, const RepareOptions& options = {});

/// Oracle pair that descends to a known target coarsening of g. The refine
/// half picks the min-index part not in the target and peels off the target
/// sub-part that is a source of the target quotient restricted to the part
/// (min node id breaks ties between sources).
RefineOracle exact_refine_oracle(const Partition& target, const Dag& g);

/// Answers true iff some fine edge of g crosses from the query's from_part
/// into its to_part. Ignores conditioning.
EdgeOracle exact_edge_oracle(const Dag& g);

/// Noiseless conditional-independence answers: true iff the preimages are
/// d-connected in g given the union of the conditioning parts.
EdgeOracle dsep_edge_oracle(const Dag& g);

/// Boolean node-by-intervention signature matrix. Row v-1 holds node v's
/// detected responses; column j corresponds to the j-th interventional
/// environment.
using SignatureMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Scans parts in min-index order; for the first part whose rows of m are
/// mixed, peels off the signature class that is subset-minimal within the
/// part (min node id among members of minimal classes picks the pivot).
/// Returns none when every part is signature-pure.
RefineOracle signature_refine_oracle(const SignatureMatrix& m);

/// Between-split directions justified by the signature structure: the
/// a->b candidate exists iff some member of part_b has a signature strictly
/// containing part_a's signature; no candidate otherwise.
BetweenPolicy signature_between_policy(const SignatureMatrix& m);

/// The noiseless signature matrix: entry (v-1, j) is true iff node v is a
/// descendant of some target of the j-th intervention. Empty target sets
/// (observational) contribute all-false columns and are kept so that column
/// indices match the intervention list.
SignatureMatrix reachability_signatures(const Dag& g,
                                        const std::vector<NodeSet>& interventions);

}  // namespace coarse
