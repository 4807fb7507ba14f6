#include "transit/community.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "transit/oracle.hpp"
#include "test_support.hpp"

using namespace transit;

namespace {

// two 4-cliques joined by a single bridge edge (0-3 and 4-7, bridge 0-4)
TransitGraph bridged_cliques() {
  std::vector<oracle::Edge> edges;
  for (int base : {0, 4})
    for (int i = base; i < base + 4; ++i)
      for (int j = i + 1; j < base + 4; ++j) edges.push_back({i, j, 1.0});
  edges.push_back({0, 4, 1.0});
  return ts::graph_of(8, edges);
}

}  // namespace

TEST(Modularity, SingleCommunityIsExactlyZero) {
  auto g = ts::graph_of(4, {{0, 1, 3.0}, {1, 2, 5.0}, {2, 3, 1.0}, {3, 0, 2.0}, {1, 3, 7.0}});
  EXPECT_EQ(modularity(g, {0, 0, 0, 0}), 0.0);
}

TEST(Modularity, TwoDisjointTrianglesSplitByTriangle) {
  std::vector<oracle::Edge> edges;
  for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}})
    edges.push_back({a, b, 1.0});
  auto g = ts::graph_of(6, edges);
  EXPECT_EQ(modularity(g, {0, 0, 0, 1, 1, 1}), 0.5);
}

TEST(Modularity, EdgelessGraphScoresZero) {
  auto g = ts::graph_of(3, {});
  EXPECT_DOUBLE_EQ(modularity(g, {0, 1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(modularity(g, {0, 0, 0}), 0.0);
}

TEST(Modularity, InputValidation) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}});
  EXPECT_THROW(modularity(g, {0, 1}), Error);       // short assignment
  EXPECT_THROW(modularity(g, {0, -1, 0}), Error);   // negative id
  TransitGraph empty;
  EXPECT_THROW(modularity(empty, {}), Error);
}

TEST(Modularity, SelfLoopsAndDirectionsFoldedOut) {
  // directions sum; self-loops never count
  TransitGraph g;
  int a = g.add_node("A"), b = g.add_node("B"), c = g.add_node("C");
  g.add_flow(a, b, 2.0);
  g.add_flow(b, a, 4.0);  // combined undirected weight 6
  g.add_flow(b, c, 6.0);
  g.add_flow(a, a, 100.0);  // ignored
  // m2 = 2*(6+6) = 24; split {A,B} vs {C}: in0=12, tot0=18, tot1=6
  double want = 12.0 / 24.0 - std::pow(18.0 / 24.0, 2) + 0.0 - std::pow(6.0 / 24.0, 2);
  EXPECT_DOUBLE_EQ(modularity(g, {0, 0, 1}), want);
}

TEST(Modularity, MatchesOracleFormOnRandomGraphs) {
  Rng rng(616);
  for (int round = 0; round < 25; ++round) {
    int n = 3 + int(rng.below(5));
    int64_t cap = int64_t(n) * (n - 1);
    int m = int(std::min<int64_t>(cap, 2 + int64_t(rng.below(uint64_t(2 * n)))));
    auto edges = oracle::random_digraph(n, m, rng, true);
    auto g = ts::graph_of(n, edges);
    std::vector<int> part(static_cast<size_t>(n), 0);
    for (auto& p : part) p = int(rng.below(3));
    // oracle route: dense matrix Newman double sum
    std::vector<std::vector<double>> a(size_t(n), std::vector<double>(size_t(n), 0.0));
    for (const auto& e : edges) {
      if (e.src == e.dst) continue;
      a[size_t(e.src)][size_t(e.dst)] += e.weight;
      a[size_t(e.dst)][size_t(e.src)] += e.weight;
    }
    std::vector<double> k(size_t(n), 0.0);
    double m2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        k[size_t(i)] += a[size_t(i)][size_t(j)];
        m2 += a[size_t(i)][size_t(j)];
      }
    double want = oracle::brute_modularity(n, a, k, m2, part);
    ASSERT_NEAR(modularity(g, part), want, 1e-12) << "round " << round;
  }
}

TEST(Louvain, RecoversBridgedCliques) {
  auto g = bridged_cliques();
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto part = louvain(g, seed);
    ASSERT_EQ(part.communities.size(), 2u) << "seed " << seed;
    std::set<int> left, right;
    for (int v = 0; v < 4; ++v) left.insert(part.assignment[size_t(v)]);
    for (int v = 4; v < 8; ++v) right.insert(part.assignment[size_t(v)]);
    EXPECT_EQ(left.size(), 1u) << "seed " << seed;
    EXPECT_EQ(right.size(), 1u) << "seed " << seed;
    EXPECT_NE(*left.begin(), *right.begin()) << "seed " << seed;
  }
}

TEST(Louvain, ReportedModularityMatchesRecomputation) {
  Rng rng(808);
  for (int round = 0; round < 10; ++round) {
    int n = 5 + int(rng.below(10));
    int64_t cap = int64_t(n) * (n - 1);
    int m = int(std::min<int64_t>(cap, n + int64_t(rng.below(uint64_t(2 * n)))));
    auto g = ts::graph_of(n, oracle::random_digraph(n, m, rng, true));
    auto part = louvain(g, 7);
    EXPECT_NEAR(part.modularity, modularity(g, part.assignment), 1e-12);
  }
}

TEST(Louvain, NearOptimalOnTinyGraphs) {
  Rng rng(909);
  int hits = 0, trials = 40;
  for (int round = 0; round < trials; ++round) {
    int n = 4 + int(rng.below(4));  // 4..7
    int64_t cap = int64_t(n) * (n - 1);
    int m = int(std::min<int64_t>(cap, 3 + int64_t(rng.below(uint64_t(2 * n)))));
    auto edges = oracle::random_digraph(n, m, rng, true);
    auto g = ts::graph_of(n, edges);
    auto part = louvain(g, uint64_t(round) + 1);
    auto best = oracle::brute_modularity_max(n, edges);
    EXPECT_LE(part.modularity, best.q + 1e-9);
    if (part.modularity >= best.q - 0.05) ++hits;
  }
  EXPECT_GE(hits, trials * 9 / 10);
}

TEST(Louvain, DeterministicPerSeed) {
  auto g = bridged_cliques();
  auto a = louvain(g, 3);
  auto b = louvain(g, 3);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_DOUBLE_EQ(a.modularity, b.modularity);
}

TEST(Louvain, CanonicalIdsBySizeThenLabel) {
  // sizes 3 and 2, the larger group holding the lexicographically later labels
  std::vector<oracle::Edge> edges{{0, 1, 5.0}, {2, 3, 5.0}, {3, 4, 5.0}, {2, 4, 5.0}};
  auto g = ts::graph_of(5, edges);
  auto part = louvain(g, 1);
  ASSERT_EQ(part.communities.size(), 2u);
  EXPECT_EQ(part.communities[0].size, 3u);
  EXPECT_EQ(part.communities[1].size, 2u);
  // community 0 is the triangle {2,3,4}, community 1 the pair {0,1}
  EXPECT_EQ(part.assignment[2], 0);
  EXPECT_EQ(part.assignment[3], 0);
  EXPECT_EQ(part.assignment[4], 0);
  EXPECT_EQ(part.assignment[0], 1);
  EXPECT_EQ(part.assignment[1], 1);
}

TEST(Louvain, EqualSizesOrderBySmallestLabel) {
  std::vector<oracle::Edge> edges{{0, 1, 5.0}, {2, 3, 5.0}};
  auto g = ts::graph_of(4, edges);
  auto part = louvain(g, 1);
  ASSERT_EQ(part.communities.size(), 2u);
  EXPECT_EQ(part.assignment[0], 0);  // group holding label "0" comes first
  EXPECT_EQ(part.assignment[2], 1);
}

TEST(Louvain, EdgelessGraphKeepsSingletons) {
  auto g = ts::graph_of(3, {});
  auto part = louvain(g, 5);
  EXPECT_EQ(part.communities.size(), 3u);
  EXPECT_DOUBLE_EQ(part.modularity, 0.0);
  TransitGraph empty;
  EXPECT_THROW(louvain(empty, 1), Error);
}

TEST(CommunityMetrics, RowsCarrySizeDegreeAndQ) {
  auto g = bridged_cliques();
  auto part = louvain(g, 2);
  auto rows = community_metrics(g, part);
  ASSERT_EQ(rows.size(), 2u);
  // each directed clique edge contributes one endpoint degree; bridge endpoints
  // get one extra, so per community the degrees are 4,3,3,3
  for (const auto& r : rows) {
    EXPECT_EQ(r.size, 4u);
    EXPECT_DOUBLE_EQ(r.average_degree, (4.0 + 3.0 + 3.0 + 3.0) / 4.0);
    EXPECT_DOUBLE_EQ(r.modularity, part.modularity);
  }
}
