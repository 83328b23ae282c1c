#include "coarse/partition.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace coarse {

Partition::Partition(int node_count, std::vector<NodeSet> parts)
    : d_(node_count), parts_(std::move(parts)) {
  if (d_ < 1) throw std::invalid_argument("Partition: node_count must be positive");
  part_of_.assign(d_ + 1, -1);
  std::sort(parts_.begin(), parts_.end(),
            [](const NodeSet& a, const NodeSet& b) {
              if (a.empty() || b.empty())
                throw std::invalid_argument("Partition: empty part");
              return *a.begin() < *b.begin();
            });
  int covered = 0;
  for (size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].empty()) throw std::invalid_argument("Partition: empty part");
    for (int v : parts_[i]) {
      if (v < 1 || v > d_)
        throw std::invalid_argument("Partition: node " + std::to_string(v) +
                                    " outside [1, " + std::to_string(d_) + "]");
      if (part_of_[v] != -1)
        throw std::invalid_argument("Partition: node " + std::to_string(v) +
                                    " in two parts");
      part_of_[v] = static_cast<int>(i);
      ++covered;
    }
  }
  if (covered != d_)
    throw std::invalid_argument("Partition: parts do not cover [1, " +
                                std::to_string(d_) + "]");
}

Partition Partition::discrete(int d) {
  std::vector<NodeSet> parts;
  parts.reserve(d);
  for (int v = 1; v <= d; ++v) parts.push_back({v});
  return Partition(d, std::move(parts));
}

Partition Partition::trivial(int d) {
  NodeSet all;
  for (int v = 1; v <= d; ++v) all.insert(v);
  return Partition(d, {all});
}

int Partition::part_of(int v) const {
  if (v < 1 || v > d_)
    throw std::out_of_range("Partition::part_of: node out of range");
  return part_of_[v];
}

bool Partition::operator<(const Partition& other) const {
  if (d_ != other.d_) return d_ < other.d_;
  return parts_ < other.parts_;
}

bool refines(const Partition& p1, const Partition& p2) {
  if (p1.node_count() != p2.node_count())
    throw std::invalid_argument("refines: mismatched node counts");
  for (const NodeSet& part : p1.parts()) {
    const int target = p2.part_of(*part.begin());
    for (int v : part)
      if (p2.part_of(v) != target) return false;
  }
  return true;
}

Partition partition_meet(const Partition& p1, const Partition& p2) {
  if (p1.node_count() != p2.node_count())
    throw std::invalid_argument("partition_meet: mismatched node counts");
  const int d = p1.node_count();
  std::map<std::pair<int, int>, NodeSet> cells;
  for (int v = 1; v <= d; ++v) cells[{p1.part_of(v), p2.part_of(v)}].insert(v);
  std::vector<NodeSet> parts;
  parts.reserve(cells.size());
  for (auto& [key, cell] : cells) parts.push_back(std::move(cell));
  return Partition(d, std::move(parts));
}

Partition partition_join(const Partition& p1, const Partition& p2) {
  if (p1.node_count() != p2.node_count())
    throw std::invalid_argument("partition_join: mismatched node counts");
  const int d = p1.node_count();
  // Union-find over nodes; nodes sharing a part in either partition merge.
  std::vector<int> root(d + 1);
  std::iota(root.begin(), root.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  auto unite = [&](int a, int b) { root[find(a)] = find(b); };
  for (const Partition* p : {&p1, &p2}) {
    for (const NodeSet& part : p->parts()) {
      int first = *part.begin();
      for (int v : part) unite(first, v);
    }
  }
  std::map<int, NodeSet> groups;
  for (int v = 1; v <= d; ++v) groups[find(v)].insert(v);
  std::vector<NodeSet> parts;
  for (auto& [key, part] : groups) parts.push_back(std::move(part));
  return Partition(d, std::move(parts));
}

std::vector<Partition> enumerate_partitions(int d, int cap) {
  if (d < 1) throw std::invalid_argument("enumerate_partitions: d must be positive");
  if (d > cap)
    throw std::invalid_argument(
        "enumerate_partitions: d = " + std::to_string(d) + " exceeds cap " +
        std::to_string(cap) + " (Bell numbers grow too fast)");
  std::vector<Partition> out;
  // Restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(d, 0);
  while (true) {
    int k = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<NodeSet> parts(k);
    for (int v = 1; v <= d; ++v) parts[a[v - 1]].insert(v);
    out.emplace_back(d, std::move(parts));

    int i = d - 1;
    for (; i > 0; --i) {
      int prefix_max = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= prefix_max) break;
    }
    if (i == 0) break;
    ++a[i];
    std::fill(a.begin() + i + 1, a.end(), 0);
  }
  return out;
}

}  // namespace coarse
