#include "transit/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "transit/oracle.hpp"
#include "test_support.hpp"

using namespace transit;

TEST(Degrees, DistinctNeighborsSelfExcluded) {
  TransitGraph g;
  int a = g.add_node("A"), b = g.add_node("B"), c = g.add_node("C");
  g.add_flow(a, b, 5.0);
  g.add_flow(b, a, 5.0);
  g.add_flow(a, a, 9.0);  // ignored
  g.add_flow(a, c, 1.0);
  auto deg = degrees(g);
  EXPECT_EQ(deg[size_t(a)], 3);  // out: B, C; in: B
  EXPECT_EQ(deg[size_t(b)], 2);
  EXPECT_EQ(deg[size_t(c)], 1);
}

TEST(Betweenness, PathGraphMiddleNode) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto bc = betweenness(g, false);
  EXPECT_DOUBLE_EQ(bc[1], 0.5);  // one of (n-1)(n-2)=2 ordered pairs routes through
  EXPECT_DOUBLE_EQ(bc[0], 0.0);
  EXPECT_DOUBLE_EQ(bc[2], 0.0);
}

TEST(Betweenness, WeightsRerouteGeodesics) {
  // two parallel two-hop routes; weights pick one of them
  auto g = ts::graph_of(4, {{0, 1, 10.0}, {1, 3, 10.0}, {0, 2, 1.0}, {2, 3, 1.0}});
  auto unweighted = betweenness(g, false);
  EXPECT_DOUBLE_EQ(unweighted[1], 0.5 / 6.0 * 1.0);  // half credit for pair (0,3)
  EXPECT_DOUBLE_EQ(unweighted[2], 0.5 / 6.0 * 1.0);
  auto weighted = betweenness(g, true);
  EXPECT_DOUBLE_EQ(weighted[1], 0.0);
  EXPECT_DOUBLE_EQ(weighted[2], 1.0 / 6.0);
}

TEST(Betweenness, NeedsThreeNodes) {
  auto g = ts::graph_of(2, {{0, 1, 1.0}});
  try {
    betweenness(g, false);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_few_nodes);
  }
}

TEST(Betweenness, AgreesWithExhaustiveSearch) {
  Rng rng(314);
  for (int round = 0; round < 15; ++round) {
    int n = 4 + int(rng.below(6));
    int m = n + int(rng.below(uint64_t(n)));
    auto edges = oracle::random_digraph(n, m, rng, true);
    auto g = ts::graph_of(n, edges);
    for (bool weighted : {false, true}) {
      auto got = betweenness(g, weighted);
      auto want = oracle::brute_betweenness(n, edges, weighted);
      for (int v = 0; v < n; ++v)
        ASSERT_NEAR(got[size_t(v)], want[size_t(v)], 1e-9)
            << "round " << round << " weighted " << weighted << " node " << v;
    }
  }
}

TEST(Betweenness, DijkstraMatchesBfsOnUnitWeights) {
  Rng rng(2718);
  for (int round = 0; round < 10; ++round) {
    int n = 5 + int(rng.below(5));
    auto edges = oracle::random_digraph(n, 2 * n, rng, false);
    auto g = ts::graph_of(n, edges);
    auto hop = betweenness(g, false);
    auto dist = betweenness(g, true);
    for (size_t v = 0; v < hop.size(); ++v) ASSERT_NEAR(hop[v], dist[v], 1e-12);
  }
}

TEST(Closeness, ReachScaledOnAPath) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto cl = closeness(g, false);
  EXPECT_DOUBLE_EQ(cl[0], (2.0 / 2.0) * (2.0 / 3.0));
  EXPECT_DOUBLE_EQ(cl[1], (1.0 / 2.0) * (1.0 / 1.0));
  EXPECT_DOUBLE_EQ(cl[2], 0.0);  // reaches nothing
}

TEST(Closeness, WeightedUsesDistances) {
  auto g = ts::graph_of(2, {{0, 1, 4.0}});
  auto cl = closeness(g, true);
  EXPECT_DOUBLE_EQ(cl[0], (1.0 / 1.0) * (1.0 / 4.0));
  auto hop = closeness(g, false);
  EXPECT_DOUBLE_EQ(hop[0], 1.0);
}

TEST(Closeness, TinyGraphsScoreZero) {
  auto g = ts::graph_of(1, {});
  auto cl = closeness(g, false);
  ASSERT_EQ(cl.size(), 1u);
  EXPECT_DOUBLE_EQ(cl[0], 0.0);
  TransitGraph empty;
  EXPECT_TRUE(closeness(empty).empty());
}

TEST(Clustering, UnevenTriangleIsExactlyHalf) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 0.125}});
  EXPECT_EQ(weighted_global_clustering(g), 0.5);
}

TEST(Clustering, IsolatedNodesDiluteTheMean) {
  auto g = ts::graph_of(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 0.125}});
  EXPECT_EQ(weighted_global_clustering(g), 0.375);  // 3 * 0.5 / 4
}

TEST(Clustering, OpenWedgeScoresZero) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_DOUBLE_EQ(weighted_global_clustering(g), 0.0);
  TransitGraph empty;
  EXPECT_THROW(weighted_global_clustering(empty), Error);
  auto edgeless = ts::graph_of(3, {});
  EXPECT_DOUBLE_EQ(weighted_global_clustering(edgeless), 0.0);
}

TEST(Clustering, NormalizedFlowsPreferredWhenPresent) {
  auto g = ts::graph_of(3, {{0, 1, 8.0}, {1, 2, 8.0}, {2, 0, 1.0}});
  double raw = weighted_global_clustering(g);
  // after scaling, the weakest edge drops to 0 and kills every triangle
  normalize_flows(g);
  double scaled = weighted_global_clustering(g);
  EXPECT_GT(raw, 0.0);
  EXPECT_DOUBLE_EQ(scaled, 0.0);
}

namespace {

// plain unweighted global clustering, computed from scratch on a dense
// undirected adjacency; the reference for the equal-weights invariant
double unweighted_clustering(int n, const std::vector<oracle::Edge>& edges) {
  std::vector<std::vector<bool>> und(size_t(n), std::vector<bool>(size_t(n), false));
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    und[size_t(e.src)][size_t(e.dst)] = und[size_t(e.dst)][size_t(e.src)] = true;
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> nb;
    for (int v = 0; v < n; ++v)
      if (und[size_t(i)][size_t(v)]) nb.push_back(v);
    size_t k = nb.size();
    if (k < 2) continue;
    double closed = 0.0;
    for (size_t a = 0; a < k; ++a)
      for (size_t b = a + 1; b < k; ++b)
        if (und[size_t(nb[a])][size_t(nb[b])]) closed += 1.0;
    acc += 2.0 * closed / (double(k) * double(k - 1));
  }
  return acc / double(n);
}

}  // namespace

TEST(Clustering, EqualWeightsMatchUnweighted) {
  Rng rng(55);
  for (int round = 0; round < 20; ++round) {
    int n = 4 + int(rng.below(8));
    int64_t cap = int64_t(n) * (n - 1);
    int m = int(std::min<int64_t>(cap, n + int64_t(rng.below(uint64_t(2 * n)))));
    auto edges = oracle::random_digraph(n, m, rng, false);
    for (auto& e : edges) e.weight = 7.5;  // equal but not 1
    auto flat = ts::graph_of(n, edges);
    ASSERT_NEAR(weighted_global_clustering(flat), unweighted_clustering(n, edges), 1e-12)
        << "round " << round;
  }
}

TEST(CubeRoot, ExactOnRepresentableCubes) {
  EXPECT_EQ(detail::cube_root(0.125), 0.5);
  EXPECT_EQ(detail::cube_root(1.0), 1.0);
  EXPECT_EQ(detail::cube_root(27.0), 3.0);
  EXPECT_EQ(detail::cube_root(0.0), 0.0);
  EXPECT_EQ(detail::cube_root(-0.125), -0.5);
  EXPECT_EQ(detail::cube_root(1e-6), 0.01);
}

TEST(CubeRoot, NeverWorseThanLibm) {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform() * 10.0;
    double mine = detail::cube_root(x);
    double libm = std::cbrt(x);
    auto err = [x](double c) {
      long double e = (long double)c * c * c - (long double)x;
      return e < 0 ? -e : e;
    };
    EXPECT_LE(err(mine), err(libm));
  }
}

TEST(Scc, HandGraph) {
  auto g = ts::graph_of(5, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
  auto comps = strongly_connected_components(g);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(comps[1], (std::vector<int>{2, 3}));
  EXPECT_EQ(comps[2], (std::vector<int>{4}));
}

TEST(Scc, LargestTiesGoToSmallestMember) {
  auto g = ts::graph_of(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
  auto comps = strongly_connected_components(g);
  const auto& big = largest_component(comps);
  EXPECT_EQ(big, (std::vector<int>{0, 1}));
  EXPECT_THROW(largest_component({}), Error);
}

TEST(AvgPath, DirectedTriangle) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  // ordered pairs: three at distance 1, three at distance 2
  EXPECT_DOUBLE_EQ(avg_shortest_path(g), 1.5);
}

TEST(AvgPath, IgnoresNodesOutsideTheCore) {
  auto g = ts::graph_of(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {0, 3, 1.0}});
  EXPECT_DOUBLE_EQ(avg_shortest_path(g), 1.5);
}

TEST(AvgPath, AcyclicGraphHasNoCore) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  try {
    avg_shortest_path(g);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_valid_component);
  }
}

TEST(AvgPath, InvertedWeightsShrinkHighFlowEdges) {
  auto g = ts::graph_of(2, {{0, 1, 4.0}, {1, 0, 4.0}});
  EXPECT_DOUBLE_EQ(avg_shortest_path(g), 4.0);
  MetricOptions opt;
  opt.invert_weights = true;
  EXPECT_DOUBLE_EQ(avg_shortest_path(g, opt), 0.25);
}

TEST(Efficiency, PathGraph) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  EXPECT_DOUBLE_EQ(global_efficiency(g), (1.0 + 0.5 + 1.0) / 6.0);
  auto one = ts::graph_of(1, {});
  EXPECT_THROW(global_efficiency(one), Error);
}

TEST(Efficiency, ZeroDistanceClampKeepsValuesFinite) {
  auto g = ts::graph_of(2, {{0, 1, 0.0}});
  double e = global_efficiency(g);
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_DOUBLE_EQ(e, (1.0 / 1e-9) / 2.0);
}

TEST(Zscores, CenteredAndScaled) {
  auto z = zscores({1.0, 2.0, 3.0});
  EXPECT_NEAR(z[0], -std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(z[1], 0.0, 1e-12);
  EXPECT_NEAR(z[2], std::sqrt(1.5), 1e-12);
}

TEST(Zscores, ConstantColumnIsAllZero) {
  auto z = zscores({4.0, 4.0, 4.0, 4.0});
  for (double v : z) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_THROW(zscores({1.0}), Error);
}

TEST(CompositeRank, SumsThreeZScoreColumns) {
  // star with a clear hub plus two stragglers
  auto g = ts::graph_of(5, {{0, 1, 1.0}, {1, 0, 1.0}, {0, 2, 1.0}, {2, 0, 1.0},
                            {0, 3, 1.0}, {3, 0, 1.0}, {0, 4, 1.0}, {4, 0, 1.0}});
  auto rows = compute_node_metrics(g);
  ASSERT_EQ(rows.size(), 5u);
  // manual recomputation of the composite column
  std::vector<double> degd, bc, cl;
  for (const auto& r : rows) {
    degd.push_back(double(r.degree));
    bc.push_back(r.betweenness);
    cl.push_back(r.closeness);
  }
  auto zd = zscores(degd), zb = zscores(bc), zc = zscores(cl);
  for (size_t i = 0; i < rows.size(); ++i)
    EXPECT_DOUBLE_EQ(rows[i].composite_z, zd[i] + zb[i] + zc[i]);
  auto top = composite_rank(g, rows, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0], 0);  // the hub
  EXPECT_EQ(top[1], 1);  // leaves tie, label "1" sorts first
  EXPECT_THROW(composite_rank(g, rows, 6), Error);
}

TEST(CompositeRank, TiesBreakByNaturalLabelOrder) {
  TransitGraph g;
  g.add_node("10");
  g.add_node("2");
  g.add_node("banana");
  std::vector<NodeMetricsRow> rows(3);
  for (int i = 0; i < 3; ++i) rows[size_t(i)].node = i;
  auto order = composite_rank(g, rows, 3);
  EXPECT_EQ(g.label(order[0]), "2");
  EXPECT_EQ(g.label(order[1]), "10");
  EXPECT_EQ(g.label(order[2]), "banana");
}

TEST(MannWhitney, HandComputedSmallCase) {
  auto res = mann_whitney_u({1.0, 2.0}, {3.0, 4.0});
  EXPECT_TRUE(res.exact);
  EXPECT_DOUBLE_EQ(res.u, 0.0);
  EXPECT_DOUBLE_EQ(res.p_two_sided, 2.0 / 6.0);
}

TEST(MannWhitney, SymmetricInSampleOrder) {
  std::vector<double> a{1.0, 5.0, 5.0, 9.0};
  std::vector<double> b{2.0, 5.0, 7.0};
  auto ab = mann_whitney_u(a, b);
  auto ba = mann_whitney_u(b, a);
  EXPECT_DOUBLE_EQ(ab.u, ba.u);
  EXPECT_DOUBLE_EQ(ab.p_two_sided, ba.p_two_sided);
}

TEST(MannWhitney, MatchesPairCountingOracle) {
  Rng rng(4242);
  for (int round = 0; round < 60; ++round) {
    size_t na = 1 + rng.below(4), nb = 1 + rng.below(4);
    std::vector<double> a, b;
    for (size_t i = 0; i < na; ++i) a.push_back(double(rng.below(5)));
    for (size_t i = 0; i < nb; ++i) b.push_back(double(rng.below(5)));
    auto got = mann_whitney_u(a, b);
    ASSERT_TRUE(got.exact);
    ASSERT_NEAR(got.p_two_sided, oracle::exact_mwu_p(a, b), 1e-12) << "round " << round;
  }
}

TEST(MannWhitney, ExactFlagFollowsProductBound) {
  std::vector<double> four{1, 2, 3, 4};
  std::vector<double> fifty, fiftyone;
  for (int i = 0; i < 50; ++i) fifty.push_back(double(i));
  for (int i = 0; i < 51; ++i) fiftyone.push_back(double(i));
  EXPECT_TRUE(mann_whitney_u(four, fifty).exact);     // 4*50 = 200
  EXPECT_FALSE(mann_whitney_u(four, fiftyone).exact); // 4*51 = 204
}

TEST(MannWhitney, ApproximateBranchSeparatesDisjointSamples) {
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) a.push_back(double(i));
  for (int i = 0; i < 30; ++i) b.push_back(double(100 + i));
  auto res = mann_whitney_u(a, b);
  EXPECT_FALSE(res.exact);
  EXPECT_LT(res.p_two_sided, 1e-5);
  // all-tied samples have zero variance and p = 1
  std::vector<double> flat_a(30, 3.0), flat_b(30, 3.0);
  auto flat = mann_whitney_u(flat_a, flat_b);
  EXPECT_DOUBLE_EQ(flat.p_two_sided, 1.0);
}

TEST(MannWhitney, EmptySampleRejected) {
  try {
    mann_whitney_u({}, {1.0});
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_sample);
  }
}

TEST(Indicators, FullGraphPopulatesEverything) {
  auto g = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 0, 3.0}, {0, 2, 1.0}});
  auto ind = compute_indicators(g);
  EXPECT_GE(ind.global_clustering, 0.0);
  EXPECT_EQ(ind.scc_count, 1u);
  ASSERT_TRUE(ind.avg_shortest_path.has_value());
  ASSERT_TRUE(ind.efficiency.has_value());
  EXPECT_DOUBLE_EQ(*ind.avg_shortest_path, avg_shortest_path(g));
  EXPECT_DOUBLE_EQ(*ind.efficiency, global_efficiency(g));
}

TEST(Indicators, DegenerateGraphLeavesOptionalsEmpty) {
  auto one = ts::graph_of(1, {});
  auto ind = compute_indicators(one);
  EXPECT_EQ(ind.scc_count, 1u);
  EXPECT_FALSE(ind.avg_shortest_path.has_value());
  EXPECT_FALSE(ind.efficiency.has_value());

  auto dag = ts::graph_of(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto ind2 = compute_indicators(dag);
  EXPECT_EQ(ind2.scc_count, 3u);
  EXPECT_FALSE(ind2.avg_shortest_path.has_value());  // no 2-node core
  ASSERT_TRUE(ind2.efficiency.has_value());
}
