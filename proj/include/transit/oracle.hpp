#pragma once

// Brute-force reference implementations used to check the production graph
// algorithms. Everything here works on a plain (node count, edge list)
// representation and shares no code with the production side: betweenness
// enumerates simple paths, SCCs come from a boolean reachability closure,
// distances from Floyd-Warshall, modularity from exhaustive partition search,
// and the Mann-Whitney p-value from direct arrangement counting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "transit/core.hpp"

namespace transit {
namespace oracle {

struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

constexpr double kNoEdge = std::numeric_limits<double>::infinity();

namespace detail {
inline std::vector<std::vector<double>> weight_matrix(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<double>> w(size_t(n), std::vector<double>(size_t(n), kNoEdge));
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      fail(Errc::internal, "edge endpoint outside the node range");
    if (e.src == e.dst) continue;  // self-loops never enter the metrics
    w[size_t(e.src)][size_t(e.dst)] = std::min(w[size_t(e.src)][size_t(e.dst)], e.weight);
  }
  return w;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Betweenness by full simple-path enumeration per ordered pair: find the
// geodesic length, count the geodesics, and credit every interior node.

inline std::vector<double> brute_betweenness(int n, const std::vector<Edge>& edges,
                                             bool weighted) {
  if (n > 12) fail(Errc::instance_too_large, "brute betweenness capped at 12 nodes");
  if (n < 3) fail(Errc::instance_too_large, "betweenness normalization needs 3 nodes");
  auto w = detail::weight_matrix(n, edges);
  std::vector<double> score(size_t(n), 0.0);

  std::vector<int> path;
  std::vector<char> visited(size_t(n), 0);
  double best = 0.0, best_count = 0.0;
  std::vector<double> through(size_t(n), 0.0);
  int target = 0;

  auto dfs = [&](auto&& self, int u, double dist) -> void {
    if (u == target) {
      if (dist < best - 1e-12) {
        best = dist;
        best_count = 1.0;
        std::fill(through.begin(), through.end(), 0.0);
        for (size_t i = 1; i + 1 < path.size(); ++i) through[size_t(path[i])] += 1.0;
      } else if (dist <= best + 1e-12) {
        best_count += 1.0;
        for (size_t i = 1; i + 1 < path.size(); ++i) through[size_t(path[i])] += 1.0;
      }
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (visited[size_t(v)] || w[size_t(u)][size_t(v)] == kNoEdge) continue;
      double step = weighted ? w[size_t(u)][size_t(v)] : 1.0;
      if (dist + step > best + 1e-12) continue;  // already longer than the best geodesic
      visited[size_t(v)] = 1;
      path.push_back(v);
      self(self, v, dist + step);
      path.pop_back();
      visited[size_t(v)] = 0;
    }
  };

  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      if (s == t) continue;
      best = std::numeric_limits<double>::infinity();
      best_count = 0.0;
      std::fill(through.begin(), through.end(), 0.0);
      target = t;
      path.assign(1, s);
      std::fill(visited.begin(), visited.end(), 0);
      visited[size_t(s)] = 1;
      dfs(dfs, s, 0.0);
      if (best_count == 0.0) continue;  // t unreachable from s
      for (int v = 0; v < n; ++v)
        if (v != s && v != t) score[size_t(v)] += through[size_t(v)] / best_count;
    }
  double norm = double(n - 1) * double(n - 2);
  for (auto& v : score) v /= norm;
  return score;
}

// ---------------------------------------------------------------------------
// SCCs from the boolean reachability closure: u and v share a component when
// each reaches the other.

inline std::vector<std::vector<int>> brute_scc(int n, const std::vector<Edge>& edges) {
  if (n > 50) fail(Errc::instance_too_large, "brute SCC capped at 50 nodes");
  std::vector<std::vector<char>> reach(size_t(n), std::vector<char>(size_t(n), 0));
  for (int v = 0; v < n; ++v) reach[size_t(v)][size_t(v)] = 1;
  for (const auto& e : edges) reach[size_t(e.src)][size_t(e.dst)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!reach[size_t(i)][size_t(k)]) continue;
      for (int j = 0; j < n; ++j)
        if (reach[size_t(k)][size_t(j)]) reach[size_t(i)][size_t(j)] = 1;
    }
  std::vector<int> comp_of(size_t(n), -1);
  std::vector<std::vector<int>> comps;
  for (int v = 0; v < n; ++v) {
    if (comp_of[size_t(v)] != -1) continue;
    std::vector<int> comp;
    for (int u = v; u < n; ++u)
      if (comp_of[size_t(u)] == -1 && reach[size_t(v)][size_t(u)] && reach[size_t(u)][size_t(v)]) {
        comp_of[size_t(u)] = int(comps.size());
        comp.push_back(u);
      }
    comps.push_back(std::move(comp));
  }
  return comps;  // members ascending, components ordered by smallest member
}

// ---------------------------------------------------------------------------
// All-pairs distances by Floyd-Warshall, plus the two summary indicators
// derived from them.

inline std::vector<std::vector<double>> brute_all_pairs(int n, const std::vector<Edge>& edges) {
  if (n > 100) fail(Errc::instance_too_large, "brute all-pairs capped at 100 nodes");
  auto dist = detail::weight_matrix(n, edges);
  for (int v = 0; v < n; ++v) dist[size_t(v)][size_t(v)] = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (dist[size_t(i)][size_t(k)] == kNoEdge) continue;
      for (int j = 0; j < n; ++j) {
        double via = dist[size_t(i)][size_t(k)] + dist[size_t(k)][size_t(j)];
        if (via < dist[size_t(i)][size_t(j)]) dist[size_t(i)][size_t(j)] = via;
      }
    }
  return dist;
}

// Mean geodesic distance over ordered pairs inside the largest mutually
// reachable set (ties by smallest member). The component is read straight
// off the distance matrix, so this route stays independent of brute_scc and
// shares its 100-node ceiling with brute_all_pairs.
inline double brute_avg_shortest_path(int n, const std::vector<Edge>& edges) {
  auto dist = brute_all_pairs(n, edges);
  std::vector<int> largest;
  std::vector<char> placed(size_t(n), 0);
  for (int u = 0; u < n; ++u) {
    if (placed[size_t(u)]) continue;
    std::vector<int> comp;
    for (int v = 0; v < n; ++v)
      if (dist[size_t(u)][size_t(v)] != kNoEdge && dist[size_t(v)][size_t(u)] != kNoEdge) {
        comp.push_back(v);
        placed[size_t(v)] = 1;
      }
    if (comp.size() > largest.size()) largest = std::move(comp);
  }
  if (largest.size() < 2)
    fail(Errc::no_valid_component, "largest component has fewer than 2 nodes");
  double total = 0.0;
  for (int u : largest)
    for (int v : largest) {
      if (u == v) continue;
      total += dist[size_t(u)][size_t(v)];
    }
  double s = double(largest.size());
  return total / (s * (s - 1.0));
}

inline double brute_global_efficiency(int n, const std::vector<Edge>& edges) {
  if (n < 2) fail(Errc::instance_too_large, "efficiency needs at least 2 nodes");
  auto dist = brute_all_pairs(n, edges);
  double total = 0.0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v || dist[size_t(u)][size_t(v)] == kNoEdge) continue;
      total += 1.0 / dist[size_t(u)][size_t(v)];
    }
  return total / (double(n) * double(n - 1));
}

// ---------------------------------------------------------------------------
// Exhaustive modularity maximization over every set partition (restricted
// growth strings). The undirected weight matrix is built directly from the
// edge list and Q evaluated as the straight double sum of Eq-style terms.

struct ModularityOptimum {
  double q = 0.0;
  std::vector<int> partition;
};

inline double brute_modularity(int n, const std::vector<std::vector<double>>& a,
                               const std::vector<double>& k, double m2,
                               const std::vector<int>& part) {
  if (m2 == 0.0) return 0.0;
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (part[size_t(i)] != part[size_t(j)]) continue;
      q += a[size_t(i)][size_t(j)] - k[size_t(i)] * k[size_t(j)] / m2;
    }
  return q / m2;
}

inline ModularityOptimum brute_modularity_max(int n, const std::vector<Edge>& edges) {
  if (n > 8) fail(Errc::instance_too_large, "exhaustive partition search capped at 8 nodes");
  if (n < 1) fail(Errc::instance_too_large, "need at least one node");
  // undirected symmetric weight matrix, directions summed, self-loops dropped
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

  ModularityOptimum best;
  best.q = -std::numeric_limits<double>::infinity();
  std::vector<int> rgs(size_t(n), 0);
  auto consider = [&] {
    double q = brute_modularity(n, a, k, m2, rgs);
    if (q > best.q) {
      best.q = q;
      best.partition = rgs;
    }
  };
  // enumerate restricted growth strings: rgs[0]=0, rgs[i] <= max(prefix)+1
  auto rec = [&](auto&& self, int i, int max_used) -> void {
    if (i == n) {
      consider();
      return;
    }
    for (int c = 0; c <= max_used + 1; ++c) {
      rgs[size_t(i)] = c;
      self(self, i + 1, std::max(max_used, c));
    }
  };
  rgs[0] = 0;
  rec(rec, 1, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Exact two-sided Mann-Whitney p by complete arrangement enumeration. U is
// computed from pair counts (wins plus half-ties), not ranks, giving a route
// independent of the production midrank formula.

inline double exact_mwu_p(const std::vector<double>& a, const std::vector<double>& b) {
  size_t na = a.size(), nb = b.size(), n = na + nb;
  if (na == 0 || nb == 0) fail(Errc::empty_sample, "both samples must be non-empty");
  if (n > 10) fail(Errc::instance_too_large, "exact enumeration capped at 10 values");

  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  auto pair_u = [&](uint32_t mask_a) {
    double ua = 0.0, ub = 0.0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        bool ia = mask_a >> i & 1, ja = mask_a >> j & 1;
        if (!ia || ja) continue;  // need i in A, j in B
        if (pooled[i] > pooled[j]) ua += 1.0;
        else if (pooled[i] == pooled[j]) ua += 0.5;
      }
    ub = double(na) * double(nb) - ua;
    return std::min(ua, ub);
  };

  uint32_t observed_mask = (uint32_t(1) << na) - 1;  // first na entries are sample A
  double observed = pair_u(observed_mask);
  uint64_t extreme = 0, total = 0;
  for (uint32_t mask = 0; mask < (uint32_t(1) << n); ++mask) {
    if (size_t(__builtin_popcount(mask)) != na) continue;
    ++total;
    if (pair_u(mask) <= observed + 1e-12) ++extreme;
  }
  return double(extreme) / double(total);
}

// ---------------------------------------------------------------------------
// Random digraph used by the self-check and the test suite: n nodes, m edges
// without duplicates or self-loops, dyadic weights (multiples of 1/64) so
// path-length comparisons are exact in floating point.

inline std::vector<Edge> random_digraph(int n, int m, Rng& rng, bool dyadic_weights) {
  if (n < 2) fail(Errc::invalid_config, "random digraph needs at least 2 nodes");
  int64_t max_edges = int64_t(n) * (n - 1);
  if (int64_t(m) > max_edges)
    fail(Errc::invalid_config, "more edges requested than ordered pairs available");
  std::vector<char> used(size_t(n) * size_t(n), 0);
  std::vector<Edge> edges;
  edges.reserve(size_t(m));
  while (int(edges.size()) < m) {
    int u = int(rng.below(uint64_t(n)));
    int v = int(rng.below(uint64_t(n)));
    if (u == v || used[size_t(u) * size_t(n) + size_t(v)]) continue;
    used[size_t(u) * size_t(n) + size_t(v)] = 1;
    double w = dyadic_weights ? double(1 + rng.below(64)) / 64.0 : 1.0;
    edges.push_back({u, v, w});
  }
  return edges;
}

}  // namespace oracle
}  // namespace transit
