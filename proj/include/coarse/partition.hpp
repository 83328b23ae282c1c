#pragma once

#include <vector>

#include "coarse/dag.hpp"

namespace coarse {

/// Disjoint cover of {1, ..., d}. Parts are kept in canonical order (sorted
/// by minimum element), so equal partitions compare equal structurally.
class Partition {
 public:
  Partition(int node_count, std::vector<NodeSet> parts);

  static Partition discrete(int d);
  static Partition trivial(int d);

  int node_count() const { return d_; }
  int part_count() const { return static_cast<int>(parts_.size()); }
  const std::vector<NodeSet>& parts() const { return parts_; }
  const NodeSet& part(int index) const { return parts_.at(index); }

  /// 0-based index of the part containing v.
  int part_of(int v) const;

  bool operator==(const Partition& other) const {
    return d_ == other.d_ && parts_ == other.parts_;
  }
  bool operator!=(const Partition& other) const { return !(*this == other); }
  bool operator<(const Partition& other) const;  // canonical ordering

 private:
  int d_;
  std::vector<NodeSet> parts_;
  std::vector<int> part_of_;
};

/// True iff every part of p1 is contained in some part of p2.
bool refines(const Partition& p1, const Partition& p2);

/// Finest common coarsening / coarsest common refinement in the partition
/// refinement lattice (no graph involved).
Partition partition_meet(const Partition& p1, const Partition& p2);
Partition partition_join(const Partition& p1, const Partition& p2);

/// All partitions of {1,...,d} in restricted-growth-string order.
/// Throws if d exceeds the cap (Bell(10) = 115975 is the intended ceiling).
std::vector<Partition> enumerate_partitions(int d, int cap = 10);

}  // namespace coarse
