#include "coarse/dag.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace coarse {

namespace {

void check_node(int v, int d, const char* what) {
  if (v < 1 || v > d) {
    throw std::out_of_range(std::string(what) + ": node id " +
                            std::to_string(v) + " outside [1, " +
                            std::to_string(d) + "]");
  }
}

void check_nodes(const NodeSet& s, int d, const char* what) {
  for (int v : s) check_node(v, d, what);
}

}  // namespace

Dag::Dag(int node_count, std::vector<std::pair<int, int>> edges)
    : d_(node_count), edges_(std::move(edges)) {
  if (d_ < 1) throw std::invalid_argument("Dag: node_count must be positive");
  std::sort(edges_.begin(), edges_.end());
  parents_.assign(d_ + 1, {});
  children_.assign(d_ + 1, {});
  for (const auto& [u, v] : edges_) {
    check_node(u, d_, "Dag edge");
    check_node(v, d_, "Dag edge");
    if (u == v) throw std::invalid_argument("Dag: self-loop at " + std::to_string(u));
    if (!edge_lookup_.insert({u, v}).second) {
      throw std::invalid_argument("Dag: duplicate edge " + std::to_string(u) +
                                  "->" + std::to_string(v));
    }
    parents_[v].push_back(u);
    children_[u].push_back(v);
  }
  for (int v = 1; v <= d_; ++v) {
    std::sort(parents_[v].begin(), parents_[v].end());
    std::sort(children_[v].begin(), children_[v].end());
  }
  topological_order(*this);  // throws on a cycle
}

const std::vector<int>& Dag::parents_of(int v) const {
  check_node(v, d_, "parents_of");
  return parents_[v];
}

const std::vector<int>& Dag::children_of(int v) const {
  check_node(v, d_, "children_of");
  return children_[v];
}

bool Dag::has_edge(int u, int v) const {
  return edge_lookup_.count({u, v}) > 0;
}

NodeSet Dag::nodes() const {
  NodeSet out;
  for (int v = 1; v <= d_; ++v) out.insert(v);
  return out;
}

namespace {

// Closure of s under a neighbor relation (s itself included).
NodeSet reach(const Dag& g, const NodeSet& s,
              const std::vector<int>& (Dag::*step)(int) const) {
  check_nodes(s, g.node_count(), "reach");
  NodeSet seen = s;
  std::vector<int> stack(s.begin(), s.end());
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : (g.*step)(v)) {
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  return seen;
}

}  // namespace

NodeSet ancestors(const Dag& g, const NodeSet& s) {
  return reach(g, s, &Dag::parents_of);
}

NodeSet descendants(const Dag& g, const NodeSet& s) {
  return reach(g, s, &Dag::children_of);
}

NodeSet parents(const Dag& g, const NodeSet& s) {
  check_nodes(s, g.node_count(), "parents");
  NodeSet out;
  for (int v : s) out.insert(g.parents_of(v).begin(), g.parents_of(v).end());
  return out;
}

NodeSet children(const Dag& g, const NodeSet& s) {
  check_nodes(s, g.node_count(), "children");
  NodeSet out;
  for (int v : s) out.insert(g.children_of(v).begin(), g.children_of(v).end());
  return out;
}

std::vector<int> topological_order(const Dag& g) {
  const int d = g.node_count();
  std::vector<int> indegree(d + 1, 0);
  for (int v = 1; v <= d; ++v) indegree[v] = static_cast<int>(g.parents_of(v).size());
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 1; v <= d; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(d);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : g.children_of(v))
      if (--indegree[w] == 0) ready.push(w);
  }
  if (static_cast<int>(order.size()) != d) {
    throw std::invalid_argument("topological_order: cycle detected");
  }
  return order;
}

bool d_separated(const Dag& g, const NodeSet& a, const NodeSet& b,
                 const NodeSet& c) {
  const int d = g.node_count();
  check_nodes(a, d, "d_separated");
  check_nodes(b, d, "d_separated");
  check_nodes(c, d, "d_separated");
  for (int v : a)
    if (b.count(v) || c.count(v))
      throw std::invalid_argument("d_separated: input sets overlap");
  for (int v : b)
    if (c.count(v)) throw std::invalid_argument("d_separated: input sets overlap");
  if (a.empty() || b.empty()) return true;

  // Ancestral subgraph of a ∪ b ∪ c, moralized, with c removed.
  NodeSet relevant;
  relevant.insert(a.begin(), a.end());
  relevant.insert(b.begin(), b.end());
  relevant.insert(c.begin(), c.end());
  NodeSet anc = ancestors(g, relevant);

  std::vector<std::set<int>> undirected(d + 1);
  auto link = [&](int u, int v) {
    undirected[u].insert(v);
    undirected[v].insert(u);
  };
  for (int v : anc) {
    std::vector<int> pa_in;
    for (int u : g.parents_of(v))
      if (anc.count(u)) pa_in.push_back(u);
    for (int u : pa_in) link(u, v);
    for (size_t i = 0; i < pa_in.size(); ++i)
      for (size_t j = i + 1; j < pa_in.size(); ++j) link(pa_in[i], pa_in[j]);
  }

  // BFS from a to b avoiding c.
  std::vector<char> visited(d + 1, 0);
  std::vector<int> stack;
  for (int v : a) {
    visited[v] = 1;
    stack.push_back(v);
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (b.count(v)) return false;
    for (int w : undirected[v]) {
      if (!visited[w] && !c.count(w)) {
        visited[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return true;
}

NodeSet maximal_ancestors(const Dag& g, int v) {
  check_node(v, g.node_count(), "maximal_ancestors");
  NodeSet anc = ancestors(g, {v});
  NodeSet out;
  for (int w : anc)
    if (g.parents_of(w).empty()) out.insert(w);
  return out;
}

std::set<int> intervened_ancestors(const Dag& g, int v,
                                   const std::vector<NodeSet>& interventions) {
  NodeSet anc = ancestors(g, {v});
  std::set<int> out;
  for (size_t i = 0; i < interventions.size(); ++i) {
    const NodeSet& targets = interventions[i];
    if (targets.empty()) continue;  // observational regime
    check_nodes(targets, g.node_count(), "intervened_ancestors");
    for (int t : targets) {
      if (anc.count(t)) {
        out.insert(static_cast<int>(i));
        break;
      }
    }
  }
  return out;
}

namespace detail {

std::vector<int> find_cycle(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<int> state(n, 0);  // 0 unseen, 1 on stack, 2 done
  std::vector<int> parent(n, -1);
  for (int root = 0; root < n; ++root) {
    if (state[root] != 0) continue;
    // Iterative DFS keeping the current path for witness extraction.
    std::vector<std::pair<int, size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [v, idx] = stack.back();
      if (idx < adjacency[v].size()) {
        int w = adjacency[v][idx++];
        if (state[w] == 1) {
          std::vector<int> cycle{w};
          for (int u = v; u != w; u = parent[u]) cycle.push_back(u);
          std::reverse(cycle.begin() + 1, cycle.end());
          return cycle;
        }
        if (state[w] == 0) {
          state[w] = 1;
          parent[w] = v;
          stack.push_back({w, 0});
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

}  // namespace detail

}  // namespace coarse
