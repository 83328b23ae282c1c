#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>

#include "coarse/repare.hpp"
#include "test_support.hpp"

using namespace coarse;

namespace {

Dag collider4() { return Dag(4, {{1, 3}, {2, 3}, {3, 4}}); }

std::vector<NodeSet> example_interventions() { return {{}, {1}, {2}}; }

RefineOracle scripted(std::vector<RefineDecision> decisions) {
  auto remaining = std::make_shared<std::vector<RefineDecision>>(std::move(decisions));
  return [remaining](const Partition&) {
    if (remaining->empty()) return RefineDecision::none();
    RefineDecision d = remaining->front();
    remaining->erase(remaining->begin());
    return d;
  };
}

}  // namespace

TEST_CASE("repare with a silent refine oracle returns the trivial coarsening") {
  auto refine = [](const Partition&) { return RefineDecision::none(); };
  auto edge = [](const EdgeQuery&) { return true; };
  RepareResult r = repare(5, refine, edge);
  CHECK(r.coarsening.partition == Partition::trivial(5));
  CHECK(r.coarsening.edges.empty());
  CHECK(r.trace.empty());
}

TEST_CASE("exact refine oracle") {
  Dag g(4, {{1, 2}, {2, 3}, {3, 4}});
  Partition target(4, {{1}, {2}, {3, 4}});
  RefineOracle refine = exact_refine_oracle(target, g);

  SUBCASE("first split peels the source sub-part") {
    RefineDecision dec = refine(Partition::trivial(4));
    CHECK(dec.target_part == 0);
    CHECK(dec.part_a == NodeSet{1});
    CHECK(dec.part_b == NodeSet{2, 3, 4});
  }
  SUBCASE("fixed point returns none") {
    CHECK(refine(target).is_none());
  }
  SUBCASE("misuse is detected") {
    CHECK_THROWS_AS(refine(Partition(4, {{1, 3}, {2, 4}})), OracleViolation);
  }
  SUBCASE("source rule with min-id ties on the collider graph") {
    RefineOracle discrete_refine =
        exact_refine_oracle(Partition::discrete(4), collider4());
    RefineDecision dec = discrete_refine(Partition::trivial(4));
    CHECK(dec.part_a == NodeSet{1});
    CHECK(dec.part_b == NodeSet{2, 3, 4});
  }
  SUBCASE("invalid target partition is rejected") {
    CHECK_THROWS_AS(exact_refine_oracle(Partition(4, {{1}, {2, 4}, {3}}), g),
                    std::invalid_argument);
  }
}

TEST_CASE("exact edge oracle") {
  EdgeOracle edge = exact_edge_oracle(Dag(4, {{1, 2}, {2, 3}, {3, 4}}));
  CHECK(edge({{1}, {2, 3, 4}, {}, EdgeQueryKind::kBetweenSplit}));
  CHECK_FALSE(exact_edge_oracle(Dag(2, {}))({{1}, {2}, {}, EdgeQueryKind::kBetweenSplit}));
  EdgeOracle collider_edge = exact_edge_oracle(collider4());
  CHECK_FALSE(collider_edge({{3, 4}, {1}, {}, EdgeQueryKind::kBetweenSplit}));
}

TEST_CASE("repare with exact oracles hits small targets") {
  SUBCASE("collider interventional coarsening") {
    Dag g = collider4();
    Coarsening truth = interventional_coarsening(g, example_interventions());
    RepareOptions options;
    options.contract_check = &g;
    RepareResult r = repare(4, exact_refine_oracle(truth.partition, g),
                            exact_edge_oracle(g), options);
    CHECK(r.coarsening == truth);
  }
  SUBCASE("descending to the discrete partition reproduces the graph") {
    Dag g(3, {{1, 2}, {2, 3}});
    RepareResult r = repare(3, exact_refine_oracle(Partition::discrete(3), g),
                            exact_edge_oracle(g));
    CHECK(r.coarsening == induce_valid(g, Partition::discrete(3)));
  }
}

TEST_CASE("exact completeness on random DAGs and random targets") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 40; ++rep) {
    int d = 2 + static_cast<int>(rng() % 5);  // up to 6
    Dag g = testsupport::random_dag(d, 0.4, rng);
    std::vector<Coarsening> lattice = enumerate_valid(g);
    for (int pick = 0; pick < 4; ++pick) {
      const Coarsening& target = lattice[rng() % lattice.size()];
      RepareOptions options;
      options.contract_check = &g;
      RepareResult r = repare(d, exact_refine_oracle(target.partition, g),
                              exact_edge_oracle(g), options);
      REQUIRE(r.coarsening == target);
      CHECK(r.trace.size() <= static_cast<size_t>(d - 1));
      // Successive partitions strictly refine.
      for (size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(refines(r.trace[i].partition_before, r.trace[i - 1].partition_before));
        CHECK(r.trace[i].partition_before != r.trace[i - 1].partition_before);
      }
    }
  }
}

TEST_CASE("signature refine oracle") {
  SUBCASE("uniform rows mean no split") {
    SignatureMatrix m(3, 2);
    m.setConstant(true);
    CHECK(signature_refine_oracle(m)(Partition::trivial(3)).is_none());
  }
  SUBCASE("replaying the collider example takes two splits") {
    Dag g = collider4();
    SignatureMatrix m = reachability_signatures(g, example_interventions());
    RefineOracle refine = signature_refine_oracle(m);
    RefineDecision first = refine(Partition::trivial(4));
    CHECK(first.part_a == NodeSet{1});
    CHECK(first.part_b == NodeSet{2, 3, 4});
    RefineDecision second = refine(Partition(4, {{1}, {2, 3, 4}}));
    CHECK(second.part_a == NodeSet{2});
    CHECK(second.part_b == NodeSet{3, 4});
    CHECK(refine(Partition(4, {{1}, {2}, {3, 4}})).is_none());
  }
  SUBCASE("d distinct rows refine to the discrete partition in d-1 splits") {
    const int d = 5;
    SignatureMatrix m(d, d);
    m.setConstant(false);
    for (int v = 0; v < d; ++v)
      for (int j = 0; j <= v; ++j) m(v, j) = true;  // nested signatures
    RefineOracle refine = signature_refine_oracle(m);
    auto edge = [](const EdgeQuery&) { return false; };
    RepareResult r = repare(d, refine, edge);
    CHECK(r.coarsening.partition == Partition::discrete(d));
    CHECK(r.trace.size() == d - 1);
  }
}

TEST_CASE("edge query schedule") {
  SUBCASE("first split issues a single between query with empty conditioning") {
    Dag g = collider4();
    SignatureMatrix m = reachability_signatures(g, example_interventions());
    RepareOptions options;
    options.between = signature_between_policy(m);
    RepareResult r = repare(4, signature_refine_oracle(m), dsep_edge_oracle(g), options);
    REQUIRE(!r.trace.empty());
    REQUIRE(r.trace[0].queries.size() == 1);
    const auto& [query, answer] = r.trace[0].queries[0];
    CHECK(query.kind == EdgeQueryKind::kBetweenSplit);
    CHECK(query.conditioning.empty());
    CHECK(answer);
  }
  SUBCASE("splitting a sink part with two parents issues 1 + 2*2 queries") {
    Dag g = collider4();
    std::vector<NodeSet> interventions = {{}, {1}, {2}, {4}};
    SignatureMatrix m = reachability_signatures(g, interventions);
    RepareOptions options;
    options.between = signature_between_policy(m);
    RepareResult r = repare(4, signature_refine_oracle(m), dsep_edge_oracle(g), options);
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[2].decision.part_a == NodeSet{3});
    CHECK(r.trace[2].decision.part_b == NodeSet{4});
    CHECK(r.trace[2].queries.size() == 5);
    CHECK(r.coarsening == interventional_coarsening(g, interventions));
  }
  SUBCASE("children of a split part are re-tested") {
    Dag g = collider4();
    RefineDecision split_top;
    split_top.target_part = 0;
    split_top.part_a = {1, 2};
    split_top.part_b = {3, 4};
    RefineDecision split_sources;
    split_sources.target_part = 0;
    split_sources.part_a = {1};
    split_sources.part_b = {2};
    RepareResult r = repare(4, scripted({split_top, split_sources}),
                            exact_edge_oracle(g));
    bool saw_child_query = false;
    for (const auto& [query, answer] : r.trace[1].queries)
      if (query.kind == EdgeQueryKind::kChildOfSplit) {
        saw_child_query = true;
        CHECK(answer);
      }
    CHECK(saw_child_query);
    CHECK(r.coarsening.edges == std::set<std::pair<int, int>>{{0, 2}, {1, 2}});
  }
}

TEST_CASE("noiseless signature pipeline recovers the interventional coarsening") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 60; ++rep) {
    int d = 2 + static_cast<int>(rng() % 7);  // up to 8
    Dag g = testsupport::random_dag(d, 0.35, rng);
    std::vector<NodeSet> interventions = {{}};
    int k = static_cast<int>(rng() % (d + 1));
    std::vector<int> pool(d);
    std::iota(pool.begin(), pool.end(), 1);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int i = 0; i < k; ++i) interventions.push_back({pool[i]});

    SignatureMatrix m = reachability_signatures(g, interventions);
    RepareOptions options;
    options.between = signature_between_policy(m);
    options.contract_check = &g;
    RepareResult r = repare(d, signature_refine_oracle(m), dsep_edge_oracle(g), options);
    REQUIRE(r.coarsening == interventional_coarsening(g, interventions));

    // Accepted edges point from strictly smaller to larger signatures.
    auto signature_of = [&](int v) {
      std::set<int> s;
      for (int j = 0; j < m.cols(); ++j)
        if (m(v - 1, j)) s.insert(j);
      return s;
    };
    for (const TraceStep& step : r.trace) {
      for (const auto& [query, answer] : step.queries) {
        if (!answer) continue;
        auto from_sig = signature_of(*query.from_part.begin());
        bool found = false;
        for (int y : query.to_part) {
          auto to_sig = signature_of(y);
          if (from_sig != to_sig &&
              std::includes(to_sig.begin(), to_sig.end(), from_sig.begin(),
                            from_sig.end()))
            found = true;
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("engine surfaces oracle contract violations") {
  SUBCASE("split that leaves the chosen part") {
    RefineDecision bad;
    bad.target_part = 0;
    bad.part_a = {1};
    bad.part_b = {2, 9};
    auto edge = [](const EdgeQuery&) { return false; };
    CHECK_THROWS_AS(repare(3, scripted({bad}), edge), OracleViolation);
  }
  SUBCASE("acyclicity-preservation check against a supplied graph") {
    // Chain 2 -> 1 -> 3: peeling {1} leaves ancestry in both directions.
    Dag g(3, {{2, 1}, {1, 3}});
    RefineDecision bad;
    bad.target_part = 0;
    bad.part_a = {1};
    bad.part_b = {2, 3};
    RepareOptions options;
    options.contract_check = &g;
    auto edge = [](const EdgeQuery&) { return false; };
    CHECK_THROWS_AS(repare(3, scripted({bad}), edge, options), OracleViolation);
  }
  SUBCASE("edge oracle accepting both split directions yields a witness cycle") {
    RefineDecision split;
    split.target_part = 0;
    split.part_a = {1};
    split.part_b = {2};
    auto edge = [](const EdgeQuery&) { return true; };
    try {
      repare(2, scripted({split}), edge);
      FAIL("expected OracleViolation");
    } catch (const OracleViolation& violation) {
      CHECK(violation.witness_cycle().size() == 2);
    }
  }
}
