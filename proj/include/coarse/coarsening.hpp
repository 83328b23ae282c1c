#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "coarse/dag.hpp"
#include "coarse/partition.hpp"

namespace coarse {

/// A partition of the fine nodes together with the induced coarse edge set.
/// Edges are ordered pairs of 0-based part indices (canonical part order).
struct Coarsening {
  Partition partition;
  std::set<std::pair<int, int>> edges;

  bool operator==(const Coarsening& other) const {
    return partition == other.partition && edges == other.edges;
  }
  bool operator!=(const Coarsening& other) const { return !(*this == other); }

  /// The quotient graph as a Dag over part indices shifted to 1-based ids.
  Dag quotient_dag() const;
};

/// Result of inducing a quotient: either the valid coarsening, or a witness
/// cycle of part indices showing why the quotient is not a DAG.
struct InduceResult {
  std::optional<Coarsening> coarsening;
  std::vector<int> witness_cycle;

  bool valid() const { return coarsening.has_value(); }
};

/// Builds the quotient edge set (between-part images of fine edges) and
/// reports validity.
InduceResult induce(const Dag& g, const Partition& p);

/// As induce(), but throws std::invalid_argument when the quotient is cyclic.
Coarsening induce_valid(const Dag& g, const Partition& p);

bool refines(const Coarsening& c1, const Coarsening& c2);

/// Lattice meet: pairwise non-empty part intersections, re-induced from g.
/// Guaranteed valid when both inputs are valid coarsenings of g.
Coarsening meet(const Dag& g, const Coarsening& c1, const Coarsening& c2);

/// Lattice join: the least valid coarsening coarsening both inputs. Computed
/// as the partition-lattice join followed by merging strongly connected
/// components of the induced quotient until acyclic.
Coarsening join(const Dag& g, const Coarsening& c1, const Coarsening& c2);

/// All valid coarsenings of g, in the deterministic order inherited from
/// enumerate_partitions. Throws when node_count exceeds the cap.
std::vector<Coarsening> enumerate_valid(const Dag& g, int cap = 10);

/// Groups nodes by equal intervened-ancestor signature relative to the given
/// interventions (empty target sets are ignored); always valid.
Coarsening interventional_coarsening(const Dag& g,
                                     const std::vector<NodeSet>& interventions);

/// Groups nodes by equal maximal-ancestor sets; always valid.
Coarsening marginal_coarsening(const Dag& g);

/// Checks x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z) over all triples of the given
/// lattice, which must be the full enumerated coarsening lattice of g.
/// Throws if the input is not closed under meet and join.
bool is_distributive(const Dag& g, const std::vector<Coarsening>& lattice);

}  // namespace coarse
