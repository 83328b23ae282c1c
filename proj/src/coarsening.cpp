#include "coarse/coarsening.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace coarse {

namespace {

std::vector<std::vector<int>> quotient_adjacency(
    const Dag& g, const Partition& p, std::set<std::pair<int, int>>* edges) {
  std::vector<std::vector<int>> adjacency(p.part_count());
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : g.edges()) {
    int pu = p.part_of(u), pv = p.part_of(v);
    if (pu == pv) continue;
    if (seen.insert({pu, pv}).second) adjacency[pu].push_back(pv);
  }
  if (edges) *edges = seen;
  return adjacency;
}

Coarsening group_by_signature(const Dag& g,
                              const std::map<int, std::set<int>>& signature) {
  // Nodes sharing a signature value share a part.
  std::map<std::set<int>, NodeSet> classes;
  for (const auto& [v, sig] : signature) classes[sig].insert(v);
  std::vector<NodeSet> parts;
  parts.reserve(classes.size());
  for (auto& [sig, part] : classes) parts.push_back(std::move(part));
  return induce_valid(g, Partition(g.node_count(), std::move(parts)));
}

}  // namespace

Dag Coarsening::quotient_dag() const {
  std::vector<std::pair<int, int>> shifted;
  shifted.reserve(edges.size());
  for (const auto& [i, j] : edges) shifted.push_back({i + 1, j + 1});
  return Dag(partition.part_count(), std::move(shifted));
}

InduceResult induce(const Dag& g, const Partition& p) {
  if (p.node_count() != g.node_count())
    throw std::invalid_argument("induce: partition does not cover the graph's nodes");
  std::set<std::pair<int, int>> edges;
  auto adjacency = quotient_adjacency(g, p, &edges);
  std::vector<int> cycle = detail::find_cycle(adjacency);
  if (!cycle.empty()) return {std::nullopt, std::move(cycle)};
  return {Coarsening{p, std::move(edges)}, {}};
}

Coarsening induce_valid(const Dag& g, const Partition& p) {
  InduceResult r = induce(g, p);
  if (!r.valid())
    throw std::invalid_argument("induce_valid: quotient is cyclic through " +
                                std::to_string(r.witness_cycle.size()) +
                                " parts");
  return std::move(*r.coarsening);
}

bool refines(const Coarsening& c1, const Coarsening& c2) {
  return refines(c1.partition, c2.partition);
}

Coarsening meet(const Dag& g, const Coarsening& c1, const Coarsening& c2) {
  InduceResult r = induce(g, partition_meet(c1.partition, c2.partition));
  if (!r.valid())
    throw std::invalid_argument("meet: inputs are not valid coarsenings of g");
  return std::move(*r.coarsening);
}

Coarsening join(const Dag& g, const Coarsening& c1, const Coarsening& c2) {
  Partition p = partition_join(c1.partition, c2.partition);
  while (true) {
    InduceResult r = induce(g, p);
    if (r.valid()) return std::move(*r.coarsening);
    // Merge every strongly connected component of the quotient into one part.
    auto adjacency = quotient_adjacency(g, p, nullptr);
    const int k = p.part_count();
    // Tarjan-free SCC via Kosaraju (k is tiny).
    std::vector<std::vector<int>> reverse(k);
    for (int u = 0; u < k; ++u)
      for (int v : adjacency[u]) reverse[v].push_back(u);
    std::vector<int> order;
    std::vector<char> seen(k, 0);
    std::function<void(int)> dfs1 = [&](int u) {
      seen[u] = 1;
      for (int v : adjacency[u])
        if (!seen[v]) dfs1(v);
      order.push_back(u);
    };
    for (int u = 0; u < k; ++u)
      if (!seen[u]) dfs1(u);
    std::vector<int> component(k, -1);
    int n_components = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (component[*it] != -1) continue;
      std::vector<int> stack{*it};
      component[*it] = n_components;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : reverse[u]) {
          if (component[v] == -1) {
            component[v] = n_components;
            stack.push_back(v);
          }
        }
      }
      ++n_components;
    }
    std::vector<NodeSet> merged(n_components);
    for (int i = 0; i < k; ++i)
      merged[component[i]].insert(p.part(i).begin(), p.part(i).end());
    p = Partition(p.node_count(), std::move(merged));
  }
}

std::vector<Coarsening> enumerate_valid(const Dag& g, int cap) {
  std::vector<Coarsening> out;
  for (const Partition& p : enumerate_partitions(g.node_count(), cap)) {
    InduceResult r = induce(g, p);
    if (r.valid()) out.push_back(std::move(*r.coarsening));
  }
  return out;
}

Coarsening interventional_coarsening(
    const Dag& g, const std::vector<NodeSet>& interventions) {
  std::map<int, std::set<int>> signature;
  for (int v = 1; v <= g.node_count(); ++v)
    signature[v] = intervened_ancestors(g, v, interventions);
  return group_by_signature(g, signature);
}

Coarsening marginal_coarsening(const Dag& g) {
  std::map<int, std::set<int>> signature;
  for (int v = 1; v <= g.node_count(); ++v)
    signature[v] = maximal_ancestors(g, v);
  return group_by_signature(g, signature);
}

bool is_distributive(const Dag& g, const std::vector<Coarsening>& lattice) {
  const int n = static_cast<int>(lattice.size());
  if (n <= 2) return true;
  std::map<Partition, int> index;
  for (int i = 0; i < n; ++i) index[lattice[i].partition] = i;

  auto lookup = [&](const Coarsening& c, const char* op) {
    auto it = index.find(c.partition);
    if (it == index.end())
      throw std::invalid_argument(std::string("is_distributive: lattice not closed under ") + op);
    return it->second;
  };

  std::vector<std::vector<int>> meet_table(n, std::vector<int>(n));
  std::vector<std::vector<int>> join_table(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      meet_table[i][j] = meet_table[j][i] = lookup(meet(g, lattice[i], lattice[j]), "meet");
      join_table[i][j] = join_table[j][i] = lookup(join(g, lattice[i], lattice[j]), "join");
    }
  }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        int lhs = meet_table[x][join_table[y][z]];
        int rhs = join_table[meet_table[x][y]][meet_table[x][z]];
        if (lhs != rhs) return false;
      }
  return true;
}

}  // namespace coarse
