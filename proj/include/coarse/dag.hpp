#pragma once

#include <set>
#include <utility>
#include <vector>

namespace coarse {

/// Nodes are 1-based contiguous integer ids in [1, d].
using NodeSet = std::set<int>;

/// Immutable directed acyclic graph over nodes {1, ..., d}.
/// Construction validates the node range, rejects self-loops and duplicate
/// edges, and rejects cyclic edge sets.
class Dag {
 public:
  Dag(int node_count, std::vector<std::pair<int, int>> edges);

  int node_count() const { return d_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& parents_of(int v) const;
  const std::vector<int>& children_of(int v) const;
  bool has_edge(int u, int v) const;
  NodeSet nodes() const;

  bool operator==(const Dag& other) const {
    return d_ == other.d_ && edges_ == other.edges_;
  }

 private:
  int d_;
  std::vector<std::pair<int, int>> edges_;         // sorted, unique
  std::vector<std::vector<int>> parents_;          // index 0 unused
  std::vector<std::vector<int>> children_;
  std::set<std::pair<int, int>> edge_lookup_;
};

NodeSet ancestors(const Dag& g, const NodeSet& s);
NodeSet descendants(const Dag& g, const NodeSet& s);
NodeSet parents(const Dag& g, const NodeSet& s);
NodeSet children(const Dag& g, const NodeSet& s);

/// Kahn's algorithm with min-id tie-breaking; deterministic for a fixed graph.
std::vector<int> topological_order(const Dag& g);

/// True iff a and b are d-separated given c. Inputs must be pairwise disjoint.
/// Computed by reachability on the moralized ancestral subgraph.
bool d_separated(const Dag& g, const NodeSet& a, const NodeSet& b,
                 const NodeSet& c);

/// Ancestors of v that are source nodes of g (every source is its own
/// maximal ancestor).
NodeSet maximal_ancestors(const Dag& g, int v);

/// Indices into `interventions` whose targets intersect the ancestors of v.
/// Empty target sets (the observational regime) are skipped.
std::set<int> intervened_ancestors(const Dag& g, int v,
                                   const std::vector<NodeSet>& interventions);

namespace detail {
/// If the digraph on nodes {0,...,n-1} given by adjacency lists has a directed
/// cycle, returns one witness cycle (first node not repeated); else empty.
std::vector<int> find_cycle(const std::vector<std::vector<int>>& adjacency);
}  // namespace detail

}  // namespace coarse
