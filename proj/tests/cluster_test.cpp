#include "transit/cluster.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_support.hpp"

using namespace transit;

namespace {

std::vector<Point> two_blobs() {
  // tight group near the origin, tight group near (10, 10)
  return {{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1}, {10.0, 10.0}, {10.1, 10.0}, {10.0, 10.1}};
}

}  // namespace

TEST(KMeans, SeparatesObviousBlobs) {
  auto pts = two_blobs();
  auto km = kmeans_fit(pts, 2, 7);
  ASSERT_EQ(km.assignment.size(), 6u);
  EXPECT_TRUE(km.converged);
  EXPECT_EQ(km.assignment[0], km.assignment[1]);
  EXPECT_EQ(km.assignment[0], km.assignment[2]);
  EXPECT_EQ(km.assignment[3], km.assignment[4]);
  EXPECT_EQ(km.assignment[3], km.assignment[5]);
  EXPECT_NE(km.assignment[0], km.assignment[3]);
}

TEST(KMeans, KEqualsDistinctPointCountIsExact) {
  std::vector<Point> pts{{0, 0}, {1, 0}, {2, 5}, {7, 3}};
  auto km = kmeans_fit(pts, 4, 1);
  EXPECT_TRUE(km.converged);
  EXPECT_NEAR(km.inertia(), 0.0, 1e-15);
  std::set<int> used(km.assignment.begin(), km.assignment.end());
  EXPECT_EQ(used.size(), 4u);
}

TEST(KMeans, KLargerThanDistinctPointsFails) {
  std::vector<Point> pts{{0, 0}, {0, 0}, {1, 1}};
  try {
    kmeans_fit(pts, 3, 1);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::k_too_large);
  }
  EXPECT_THROW(kmeans_fit({}, 1, 1), Error);
  EXPECT_THROW(kmeans_fit(pts, 0, 1), Error);
}

TEST(KMeans, DeterministicForFixedSeed) {
  Rng noise(11);
  std::vector<Point> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back({noise.uniform() * 4.0, noise.uniform() * 4.0});
  auto a = kmeans_fit(pts, 7, 99);
  auto b = kmeans_fit(pts, 7, 99);
  EXPECT_EQ(a.assignment, b.assignment);
  ASSERT_EQ(a.centroids.size(), b.centroids.size());
  for (size_t i = 0; i < a.centroids.size(); ++i) {
    EXPECT_EQ(a.centroids[i].x, b.centroids[i].x);
    EXPECT_EQ(a.centroids[i].y, b.centroids[i].y);
  }
}

TEST(KMeans, InertiaTraceNeverIncreases) {
  Rng noise(13);
  std::vector<Point> pts;
  for (int i = 0; i < 300; ++i)
    pts.push_back({noise.uniform() * 10.0, noise.uniform() * 10.0});
  auto km = kmeans_fit(pts, 9, 3);
  ASSERT_GE(km.inertia_trace.size(), 2u);
  for (size_t i = 1; i < km.inertia_trace.size(); ++i)
    EXPECT_LE(km.inertia_trace[i], km.inertia_trace[i - 1] + 1e-9) << "at " << i;
}

TEST(KMeans, FinalAssignmentIsNearestCentroid) {
  Rng noise(17);
  std::vector<Point> pts;
  for (int i = 0; i < 150; ++i)
    pts.push_back({noise.uniform() * 6.0, noise.uniform() * 6.0});
  auto km = kmeans_fit(pts, 5, 23);
  ASSERT_TRUE(km.converged);
  for (size_t i = 0; i < pts.size(); ++i) {
    int best = 0;
    double best_d = detail::sqdist(pts[i], km.centroids[0]);
    for (int c = 1; c < 5; ++c) {
      double d = detail::sqdist(pts[i], km.centroids[size_t(c)]);
      if (d < best_d) { best_d = d; best = c; }
    }
    EXPECT_EQ(km.assignment[i], best) << "point " << i;
  }
}

TEST(KMeans, PlusPlusInitAlsoSeparatesBlobs) {
  auto pts = two_blobs();
  KMeansOptions opt;
  opt.plusplus_init = true;
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    auto km = kmeans_fit(pts, 2, seed, opt);
    EXPECT_NE(km.assignment[0], km.assignment[3]) << "seed " << seed;
  }
}

TEST(KMeans, AssignPointTiesGoLow) {
  KMeansResult model;
  model.centroids = {{0.0, 0.0}, {2.0, 0.0}};
  EXPECT_EQ(assign_point({1.0, 0.0}, model), 0);  // equidistant
  EXPECT_EQ(assign_point({1.9, 0.0}, model), 1);
  KMeansResult empty;
  EXPECT_THROW(assign_point({0, 0}, empty), Error);
}

TEST(NodeMapping, FromKMeansAndLookup) {
  KMeansResult km;
  km.assignment = {1, 0, 1};
  auto map = node_map_from_kmeans(km, 2);
  EXPECT_EQ(map.node_count, 2);
  EXPECT_EQ(map.node_of(0), 1);
  EXPECT_EQ(map.node_of(1), 0);
  EXPECT_THROW(map.node_of(3), Error);
  EXPECT_THROW(map.node_of(-1), Error);
}

TEST(AggregateNodes, MeansFlowsAndEmptyClusters) {
  auto cat = ts::catalog_of({{"A", 116.0, 39.0}, {"B", 118.0, 41.0}, {"C", 120.0, 45.0}});
  NodeMap map;
  map.station_to_node = {0, 0, 2};  // cluster 1 stays empty
  map.node_count = 3;
  std::unordered_map<int, int64_t> flows{{0, 5}, {2, 7}};
  auto nodes = aggregate_nodes(cat, map, flows);
  ASSERT_EQ(nodes.size(), 2u);  // empty cluster omitted
  EXPECT_EQ(nodes[0].node, 0);
  EXPECT_EQ(nodes[0].size, 2u);
  EXPECT_DOUBLE_EQ(nodes[0].lon, 117.0);
  EXPECT_DOUBLE_EQ(nodes[0].lat, 40.0);
  EXPECT_EQ(nodes[0].total_flow, 5);
  EXPECT_EQ(nodes[1].node, 2);
  EXPECT_EQ(nodes[1].total_flow, 7);
}

TEST(AggregateNodes, SizeMismatchRejected) {
  auto cat = ts::catalog_of({{"A", 116.0, 39.0}, {"B", 118.0, 41.0}});
  NodeMap map;
  map.station_to_node = {0};
  map.node_count = 1;
  try {
    aggregate_nodes(cat, map);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::partial_assignment);
  }
}

TEST(KMeans, EmptyClusterReseedStillCoversAllK) {
  // adversarial: two far-apart duplicated heaps plus one outlier, k=3;
  // whatever the seed picks, every cluster must end up non-degenerate
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({0.0 + i * 1e-6, 0.0});
  for (int i = 0; i < 20; ++i) pts.push_back({100.0 + i * 1e-6, 0.0});
  pts.push_back({50.0, 80.0});
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto km = kmeans_fit(pts, 3, seed);
    std::set<int> used(km.assignment.begin(), km.assignment.end());
    EXPECT_EQ(used.size(), 3u) << "seed " << seed;
  }
}
