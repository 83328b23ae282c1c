#include "coarse/repare.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <string>

namespace coarse {

namespace {

Partition snapshot(const std::map<int, NodeSet>& parts, int d) {
  std::vector<NodeSet> ps;
  ps.reserve(parts.size());
  for (const auto& [key, part] : parts) ps.push_back(part);
  return Partition(d, std::move(ps));
}

bool intersects(const NodeSet& a, const NodeSet& b) {
  const NodeSet& small = a.size() <= b.size() ? a : b;
  const NodeSet& large = a.size() <= b.size() ? b : a;
  for (int v : small)
    if (large.count(v)) return true;
  return false;
}

void validate_split(const NodeSet& whole, const RefineDecision& dec) {
  if (dec.part_a.empty() || dec.part_b.empty())
    throw OracleViolation("refine oracle returned an empty split half");
  if (intersects(dec.part_a, dec.part_b))
    throw OracleViolation("refine oracle returned overlapping split halves");
  if (dec.part_a.size() + dec.part_b.size() != whole.size())
    throw OracleViolation("refine oracle split does not partition the part");
  for (int v : dec.part_a)
    if (!whole.count(v))
      throw OracleViolation("refine oracle split leaves part membership");
  for (int v : dec.part_b)
    if (!whole.count(v))
      throw OracleViolation("refine oracle split leaves part membership");
}

}  // namespace

RepareResult repare(int node_count, const RefineOracle& refine,
                    const EdgeOracle& is_edge, const RepareOptions& options) {
  if (node_count < 1)
    throw std::invalid_argument("repare: node_count must be positive");
  if (options.contract_check &&
      options.contract_check->node_count() != node_count)
    throw std::invalid_argument("repare: contract-check graph has wrong node count");

  BetweenPolicy between = options.between;
  if (!between)
    between = [](const NodeSet&, const NodeSet&) {
      return std::vector<bool>{true, false};
    };

  std::map<int, NodeSet> parts;  // keyed by min element, stable across splits
  {
    NodeSet all;
    for (int v = 1; v <= node_count; ++v) all.insert(v);
    parts[1] = std::move(all);
  }
  std::set<std::pair<int, int>> edges;  // pairs of part keys
  LearningTrace trace;

  for (int step = 0; step + 1 < node_count; ++step) {
    Partition pi = snapshot(parts, node_count);
    RefineDecision dec = refine(pi);
    if (dec.is_none()) break;
    if (dec.target_part < 0 || dec.target_part >= pi.part_count())
      throw OracleViolation("refine oracle returned an invalid part index");

    auto it = parts.begin();
    std::advance(it, dec.target_part);
    const int old_key = it->first;
    validate_split(it->second, dec);
    if (options.contract_check) {
      const Dag& g = *options.contract_check;
      if (intersects(ancestors(g, dec.part_a), dec.part_b) &&
          intersects(ancestors(g, dec.part_b), dec.part_a))
        throw OracleViolation("refine oracle split violates acyclicity preservation");
    }

    TraceStep ts{pi, dec, {}};
    const int key_a = *dec.part_a.begin();
    const int key_b = *dec.part_b.begin();

    std::vector<int> pa_keys, ch_keys;
    for (const auto& [u, v] : edges) {
      if (v == old_key) pa_keys.push_back(u);
      if (u == old_key) ch_keys.push_back(v);
    }
    std::sort(pa_keys.begin(), pa_keys.end());
    std::sort(ch_keys.begin(), ch_keys.end());

    for (auto e = edges.begin(); e != edges.end();) {
      if (e->first == old_key || e->second == old_key)
        e = edges.erase(e);
      else
        ++e;
    }
    parts.erase(old_key);
    parts[key_a] = dec.part_a;
    parts[key_b] = dec.part_b;

    auto ask = [&](int from_key, int to_key, std::vector<NodeSet> conditioning,
                   EdgeQueryKind kind) {
      EdgeQuery q{parts.at(from_key), parts.at(to_key), std::move(conditioning),
                  kind};
      bool answer = is_edge(q);
      ts.queries.emplace_back(std::move(q), answer);
      if (answer) edges.insert({from_key, to_key});
      return answer;
    };
    auto parts_of_keys = [&](const std::vector<int>& keys, int skip = -1) {
      std::vector<NodeSet> out;
      for (int k : keys)
        if (k != skip) out.push_back(parts.at(k));
      return out;
    };

    bool accepted_a_to_b = false;
    for (bool a_to_b : between(dec.part_a, dec.part_b)) {
      int from = a_to_b ? key_a : key_b;
      int to = a_to_b ? key_b : key_a;
      bool answer = ask(from, to, parts_of_keys(pa_keys),
                        EdgeQueryKind::kBetweenSplit);
      if (a_to_b && answer) accepted_a_to_b = true;
    }

    for (int q_key : pa_keys) {
      ask(q_key, key_a, parts_of_keys(pa_keys, q_key),
          EdgeQueryKind::kParentOfSplit);
      std::vector<NodeSet> z = parts_of_keys(pa_keys, q_key);
      if (accepted_a_to_b) z.push_back(parts.at(key_a));
      ask(q_key, key_b, std::move(z), EdgeQueryKind::kParentOfSplit);
    }

    for (int c_key : ch_keys) {
      for (int new_key : {key_a, key_b}) {
        // Currently determined parents of the child, minus the candidate.
        std::vector<NodeSet> z;
        for (const auto& [u, v] : edges)
          if (v == c_key && u != new_key) z.push_back(parts.at(u));
        ask(new_key, c_key, std::move(z), EdgeQueryKind::kChildOfSplit);
      }
    }

    // Map keys to contiguous slots and look for cycles in the accepted edges.
    {
      std::map<int, int> slot;
      for (const auto& [key, part] : parts)
        slot[key] = static_cast<int>(slot.size());
      std::vector<std::vector<int>> adjacency(parts.size());
      for (const auto& [u, v] : edges) adjacency[slot[u]].push_back(slot[v]);
      std::vector<int> cycle = detail::find_cycle(adjacency);
      if (!cycle.empty())
        throw OracleViolation("accepted edge set became cyclic", cycle);
    }

    trace.push_back(std::move(ts));
  }

  Partition final_partition = snapshot(parts, node_count);
  std::map<int, int> index_of_key;
  for (const auto& [key, part] : parts)
    index_of_key[key] = static_cast<int>(index_of_key.size());
  std::set<std::pair<int, int>> final_edges;
  for (const auto& [u, v] : edges)
    final_edges.insert({index_of_key[u], index_of_key[v]});
  return {Coarsening{std::move(final_partition), std::move(final_edges)}, std::move(trace)};
}

RefineOracle exact_refine_oracle(const Partition& target, const Dag& g) {
  Coarsening target_coarsening = induce_valid(g, target);  // throws if invalid
  return [target, target_coarsening](const Partition& pi) -> RefineDecision {
    if (pi == target) return RefineDecision::none();
    if (!refines(target, pi))
      throw OracleViolation("exact refine oracle: current partition does not coarsen the target");
    for (int index = 0; index < pi.part_count(); ++index) {
      const NodeSet& part = pi.part(index);
      // A part of the current partition is finished iff it is a target part.
      std::set<int> sub_parts;
      for (int v : part) sub_parts.insert(target.part_of(v));
      if (sub_parts.size() == 1) continue;
      // Source sub-part of the target quotient restricted to this part;
      // ties between sources broken by smallest node id.
      std::set<int> has_incoming;
      for (const auto& [i, j] : target_coarsening.edges)
        if (sub_parts.count(i) && sub_parts.count(j)) has_incoming.insert(j);
      int chosen = -1;
      for (int s : sub_parts) {
        if (has_incoming.count(s)) continue;
        if (chosen < 0 || *target.part(s).begin() < *target.part(chosen).begin())
          chosen = s;
      }
      RefineDecision dec;
      dec.target_part = index;
      dec.part_a = target.part(chosen);
      for (int v : part)
        if (!dec.part_a.count(v)) dec.part_b.insert(v);
      return dec;
    }
    return RefineDecision::none();  // unreachable when target strictly refines pi
  };
}

EdgeOracle exact_edge_oracle(const Dag& g) {
  return [g](const EdgeQuery& q) {
    for (int v : q.to_part)
      for (int u : g.parents_of(v))
        if (q.from_part.count(u)) return true;
    return false;
  };
}

EdgeOracle dsep_edge_oracle(const Dag& g) {
  return [g](const EdgeQuery& q) {
    NodeSet given;
    for (const NodeSet& z : q.conditioning) given.insert(z.begin(), z.end());
    return !d_separated(g, q.from_part, q.to_part, given);
  };
}

namespace {

// r1 strictly contained in r2, as sets of responding interventions.
bool strict_subset(const SignatureMatrix& m, int row1, int row2) {
  bool equal = true;
  for (int j = 0; j < m.cols(); ++j) {
    if (m(row1, j) && !m(row2, j)) return false;
    if (m(row1, j) != m(row2, j)) equal = false;
  }
  return !equal;
}

bool same_row(const SignatureMatrix& m, int row1, int row2) {
  for (int j = 0; j < m.cols(); ++j)
    if (m(row1, j) != m(row2, j)) return false;
  return true;
}

}  // namespace

RefineOracle signature_refine_oracle(const SignatureMatrix& m) {
  SignatureMatrix mat = m;
  return [mat](const Partition& pi) -> RefineDecision {
    if (mat.rows() < pi.node_count())
      throw std::invalid_argument("signature_refine_oracle: matrix rows do not cover the nodes");
    for (int index = 0; index < pi.part_count(); ++index) {
      const NodeSet& part = pi.part(index);
      if (part.size() < 2) continue;
      const int first = *part.begin();
      bool mixed = false;
      for (int v : part) {
        if (!same_row(mat, v - 1, first - 1)) {
          mixed = true;
          break;
        }
      }
      if (!mixed) continue;
      // Pivot: smallest node id whose signature is subset-minimal in the part.
      int pivot = -1;
      for (int v : part) {
        bool minimal = true;
        for (int w : part) {
          if (w != v && strict_subset(mat, w - 1, v - 1)) {
            minimal = false;
            break;
          }
        }
        if (minimal) {
          pivot = v;
          break;
        }
      }
      RefineDecision dec;
      dec.target_part = index;
      for (int v : part) {
        if (same_row(mat, v - 1, pivot - 1))
          dec.part_a.insert(v);
        else
          dec.part_b.insert(v);
      }
      return dec;
    }
    return RefineDecision::none();
  };
}

BetweenPolicy signature_between_policy(const SignatureMatrix& m) {
  SignatureMatrix mat = m;
  return [mat](const NodeSet& part_a, const NodeSet& part_b) -> std::vector<bool> {
    const int pivot = *part_a.begin();
    for (int y : part_b)
      if (strict_subset(mat, pivot - 1, y - 1)) return {true};
    return {};
  };
}

SignatureMatrix reachability_signatures(const Dag& g,
                                        const std::vector<NodeSet>& interventions) {
  SignatureMatrix m(g.node_count(), interventions.size());
  m.setConstant(false);
  for (size_t j = 0; j < interventions.size(); ++j) {
    if (interventions[j].empty()) continue;
    NodeSet affected = descendants(g, interventions[j]);
    for (int v : affected) m(v - 1, static_cast<int>(j)) = true;
  }
  return m;
}

}  // namespace coarse
