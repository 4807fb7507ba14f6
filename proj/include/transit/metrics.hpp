#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "transit/core.hpp"
#include "transit/graph.hpp"

namespace transit {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge distance selection for the path-based metrics. The distance of an edge
// is its normalized flow when present, else its raw flow; `invert` switches
// to 1/weight for the high-flow-means-close reading. Distances are clamped
// below by `min_distance` so they stay strictly positive.
struct MetricOptions {
  bool weighted_betweenness = true;
  bool weighted_closeness = false;
  bool invert_weights = false;
  double min_distance = 1e-9;
};

namespace detail {
inline std::vector<std::vector<std::pair<int, double>>> distance_adjacency(
    const TransitGraph& g, const MetricOptions& opt) {
  std::vector<std::vector<std::pair<int, double>>> adj(g.node_count());
  for (const auto& [key, data] : g.edges()) {
    if (key.first == key.second) continue;
    double base = data.normalized ? *data.normalized : data.flow;
    double d = opt.invert_weights ? 1.0 / std::max(base, opt.min_distance)
                                  : std::max(base, opt.min_distance);
    adj[size_t(key.first)].emplace_back(key.second, d);
  }
  return adj;
}

// libm cbrt can land one ulp off even when the exact root is representable
// (cbrt(0.125) does on this platform); checking both neighbors against the
// extended-precision residual recovers the correctly rounded value.
inline double cube_root(double x) {
  double y = std::cbrt(x);
  if (!std::isfinite(y)) return y;
  auto err = [x](double cand) {
    long double c = cand;
    long double e = c * c * c - static_cast<long double>(x);
    return e < 0 ? -e : e;
  };
  double best = y;
  long double best_err = err(y);
  for (double cand : {std::nextafter(y, -kInf), std::nextafter(y, kInf)}) {
    long double e = err(cand);
    if (e < best_err) {
      best_err = e;
      best = cand;
    }
  }
  return best;
}

// Single-source Dijkstra over a positive-weight adjacency. Ties in the queue
// break on node id, so settle order is deterministic.
inline void dijkstra(const std::vector<std::vector<std::pair<int, double>>>& adj, int src,
                     std::vector<double>& dist) {
  dist.assign(adj.size(), kInf);
  dist[size_t(src)] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0.0, src);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[size_t(u)]) continue;
    for (auto [v, w] : adj[size_t(u)]) {
      double nd = d + w;
      if (nd < dist[size_t(v)]) {
        dist[size_t(v)] = nd;
        pq.emplace(nd, v);
      }
    }
  }
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Degree: distinct in-neighbors plus distinct out-neighbors, self excluded.

inline std::vector<int> degrees(const TransitGraph& g) {
  std::vector<int> deg(g.node_count(), 0);
  for (const auto& [key, data] : g.edges()) {
    if (key.first == key.second) continue;
    ++deg[size_t(key.first)];   // one distinct out-neighbor of src
    ++deg[size_t(key.second)];  // one distinct in-neighbor of dst
  }
  return deg;
}

// ---------------------------------------------------------------------------
// Betweenness centrality, Brandes accumulation, endpoints excluded, result
// divided by (n-1)(n-2). Weighted mode runs geodesics on edge distances;
// unweighted mode on hop counts. Parallel over source nodes with per-chunk
// accumulators merged in chunk order.

inline std::vector<double> betweenness(const TransitGraph& g, bool weighted,
                                       const MetricOptions& opt = {}) {
  size_t n = g.node_count();
  if (n < 3) fail(Errc::too_few_nodes, "betweenness normalization needs at least 3 nodes");
  auto adj = detail::distance_adjacency(g, opt);

  auto accumulate_source = [&](int s, std::vector<double>& bc) {
    std::vector<double> sigma(n, 0.0), delta(n, 0.0), dist(n, kInf);
    std::vector<std::vector<int>> pred(n);
    std::vector<int> order;
    order.reserve(n);
    sigma[size_t(s)] = 1.0;
    dist[size_t(s)] = 0.0;
    if (weighted) {
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.emplace(0.0, s);
      std::vector<char> settled(n, 0);
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[size_t(u)]) continue;
        settled[size_t(u)] = 1;
        order.push_back(u);
        for (auto [v, w] : adj[size_t(u)]) {
          double nd = d + w;
          if (nd < dist[size_t(v)]) {
            dist[size_t(v)] = nd;
            sigma[size_t(v)] = sigma[size_t(u)];
            pred[size_t(v)].assign(1, u);
            pq.emplace(nd, v);
          } else if (nd == dist[size_t(v)] && !settled[size_t(v)]) {
            sigma[size_t(v)] += sigma[size_t(u)];
            pred[size_t(v)].push_back(u);
          }
        }
      }
    } else {
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        order.push_back(u);
        for (auto [v, w] : adj[size_t(u)]) {
          (void)w;
          if (dist[size_t(v)] == kInf) {
            dist[size_t(v)] = dist[size_t(u)] + 1.0;
            q.push(v);
          }
          if (dist[size_t(v)] == dist[size_t(u)] + 1.0) {
            sigma[size_t(v)] += sigma[size_t(u)];
            pred[size_t(v)].push_back(u);
          }
        }
      }
    }
    for (size_t i = order.size(); i-- > 0;) {
      int w = order[i];
      for (int v : pred[size_t(w)])
        delta[size_t(v)] += sigma[size_t(v)] / sigma[size_t(w)] * (1.0 + delta[size_t(w)]);
      if (w != s) bc[size_t(w)] += delta[size_t(w)];
    }
  };

  auto bc = parallel_reduce<std::vector<double>>(
      n, std::vector<double>(n, 0.0),
      [&](std::vector<double>& acc, size_t begin, size_t end) {
        for (size_t s = begin; s < end; ++s) accumulate_source(int(s), acc);
      },
      [](std::vector<double>& out, const std::vector<double>& part) {
        for (size_t i = 0; i < out.size(); ++i) out[i] += part[i];
      });
  double norm = double(n - 1) * double(n - 2);
  for (auto& v : bc) v /= norm;
  return bc;
}

// ---------------------------------------------------------------------------
// Closeness, reach-scaled: with r nodes reachable from v at total distance S,
// closeness(v) = (r/(n-1)) * (r/S); nodes that reach nothing score 0.

inline std::vector<double> closeness(const TransitGraph& g, bool weighted = false,
                                     const MetricOptions& opt = {}) {
  size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  auto adj = detail::distance_adjacency(g, opt);

  parallel_chunks(n, [&](size_t, size_t begin, size_t end) {
    std::vector<double> dist;
    for (size_t s = begin; s < end; ++s) {
      if (weighted) {
        detail::dijkstra(adj, int(s), dist);
      } else {
        dist.assign(n, kInf);
        dist[s] = 0.0;
        std::queue<int> q;
        q.push(int(s));
        while (!q.empty()) {
          int u = q.front();
          q.pop();
          for (auto [v, w] : adj[size_t(u)]) {
            (void)w;
            if (dist[size_t(v)] == kInf) {
              dist[size_t(v)] = dist[size_t(u)] + 1.0;
              q.push(v);
            }
          }
        }
      }
      double reach = 0.0, total = 0.0;
      for (size_t v = 0; v < n; ++v) {
        if (v == s || dist[v] == kInf) continue;
        reach += 1.0;
        total += dist[v];
      }
      out[s] = total > 0.0 ? (reach / double(n - 1)) * (reach / total) : 0.0;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Weighted global clustering coefficient: undirected projection (max of the
// two directions), weights scaled by the max, per-node triangle intensity
// C_i = (1/(k_i(k_i-1))) * sum over neighbor pairs of the geometric mean of
// the three scaled weights; global value is the mean over all nodes.

inline double weighted_global_clustering(const TransitGraph& g) {
  size_t n = g.node_count();
  if (n == 0) fail(Errc::empty_graph, "clustering needs a non-empty graph");
  bool use_norm = g.has_normalized();
  auto und = undirected_projection(g, Combine::max, use_norm);
  double wmax = 0.0;
  for (const auto& row : und)
    for (auto [v, w] : row) wmax = std::max(wmax, w);
  if (wmax <= 0.0) return 0.0;  // no edges (or all-zero weights): no triangles

  // neighbor lists are sorted, so the closing edge of each wedge is a binary
  // search away; a dense matrix would not survive station-level graph sizes
  auto weight_between = [&](int j, int h) -> double {
    const auto& row = und[size_t(j)];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(h, -kInf));
    return it != row.end() && it->first == h ? it->second : 0.0;
  };
  double sum = parallel_reduce<double>(
      n, 0.0,
      [&](double& acc, size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
          size_t k = und[i].size();
          if (k < 2) continue;
          double ci = 0.0;
          for (size_t a = 0; a < k; ++a)
            for (size_t b = a + 1; b < k; ++b) {
              double wjh = weight_between(und[i][a].first, und[i][b].first);
              if (wjh == 0.0) continue;
              ci += detail::cube_root((und[i][a].second / wmax) * (und[i][b].second / wmax) *
                                      (wjh / wmax));
            }
          acc += 2.0 * ci / (double(k) * double(k - 1));
        }
      },
      [](double& out, const double& part) { out += part; });
  return sum / double(n);
}

// ---------------------------------------------------------------------------
// Strongly connected components, iterative Tarjan. Members come out sorted
// ascending; components are ordered by smallest member.

inline std::vector<std::vector<int>> strongly_connected_components(const TransitGraph& g) {
  size_t n = g.node_count();
  auto adj = g.out_adjacency(false);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int next_index = 0;

  struct Frame {
    int node;
    size_t edge;
  };
  std::vector<Frame> call;
  for (size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({int(root), 0});
    while (!call.empty()) {
      auto& fr = call.back();
      int u = fr.node;
      if (fr.edge == 0) {
        index[size_t(u)] = low[size_t(u)] = next_index++;
        stack.push_back(u);
        on_stack[size_t(u)] = 1;
      }
      bool descended = false;
      while (fr.edge < adj[size_t(u)].size()) {
        int v = adj[size_t(u)][fr.edge].first;
        ++fr.edge;
        if (index[size_t(v)] == -1) {
          call.push_back({v, 0});
          descended = true;
          break;
        }
        if (on_stack[size_t(v)]) low[size_t(u)] = std::min(low[size_t(u)], index[size_t(v)]);
      }
      if (descended) continue;
      if (low[size_t(u)] == index[size_t(u)]) {
        std::vector<int> comp;
        for (;;) {
          int v = stack.back();
          stack.pop_back();
          on_stack[size_t(v)] = 0;
          comp.push_back(v);
          if (v == u) break;
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty())
        low[size_t(call.back().node)] = std::min(low[size_t(call.back().node)], low[size_t(u)]);
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });
  return comps;
}

// Largest component; ties go to the one with the smallest member.
inline const std::vector<int>& largest_component(const std::vector<std::vector<int>>& comps) {
  if (comps.empty()) fail(Errc::empty_graph, "no components in an empty graph");
  size_t best = 0;
  for (size_t i = 1; i < comps.size(); ++i)
    if (comps[i].size() > comps[best].size()) best = i;
  return comps[best];
}

// ---------------------------------------------------------------------------
// Average shortest path over ordered pairs inside the largest SCC. Distances
// use the same edge-distance rule as the other path metrics; every pair
// inside an SCC is reachable, so the mean is always finite.

inline double avg_shortest_path(const TransitGraph& g, const MetricOptions& opt = {}) {
  auto comps = strongly_connected_components(g);
  if (comps.empty()) fail(Errc::no_valid_component, "graph has no nodes");
  const auto& scc = largest_component(comps);
  if (scc.size() < 2)
    fail(Errc::no_valid_component, "largest strongly connected component has fewer than 2 nodes");
  auto adj = detail::distance_adjacency(g, opt);
  std::vector<char> in_scc(g.node_count(), 0);
  for (int v : scc) in_scc[size_t(v)] = 1;

  double total = parallel_reduce<double>(
      scc.size(), 0.0,
      [&](double& acc, size_t begin, size_t end) {
        std::vector<double> dist;
        for (size_t i = begin; i < end; ++i) {
          detail::dijkstra(adj, scc[i], dist);
          for (int v : scc) {
            if (v == scc[i]) continue;
            if (dist[size_t(v)] == kInf)
              fail(Errc::internal, "unreachable pair inside a strongly connected component");
            acc += dist[size_t(v)];
          }
        }
      },
      [](double& out, const double& part) { out += part; });
  double s = double(scc.size());
  return total / (s * (s - 1.0));
}

// ---------------------------------------------------------------------------
// Global efficiency: mean of 1/d(u,v) over all ordered pairs, zero for
// unreachable pairs.

inline double global_efficiency(const TransitGraph& g, const MetricOptions& opt = {}) {
  size_t n = g.node_count();
  if (n < 2) fail(Errc::too_few_nodes, "efficiency needs at least 2 nodes");
  auto adj = detail::distance_adjacency(g, opt);
  double total = parallel_reduce<double>(
      n, 0.0,
      [&](double& acc, size_t begin, size_t end) {
        std::vector<double> dist;
        for (size_t s = begin; s < end; ++s) {
          detail::dijkstra(adj, int(s), dist);
          for (size_t v = 0; v < n; ++v) {
            if (v == s || dist[v] == kInf) continue;
            acc += 1.0 / dist[v];
          }
        }
      },
      [](double& out, const double& part) { out += part; });
  return total / (double(n) * double(n - 1));
}

// ---------------------------------------------------------------------------
// Z-scores with the population standard deviation; a constant column has no
// spread and standardizes to all zeros.

inline std::vector<double> zscores(const std::vector<double>& values) {
  if (values.size() < 2) fail(Errc::too_few_values, "z-scores need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size());
  if (var == 0.0) return std::vector<double>(values.size(), 0.0);
  double sd = std::sqrt(var);
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

// ---------------------------------------------------------------------------
// Per-node metric table and the composite hub ranking.

struct NodeMetricsRow {
  int node = 0;
  int degree = 0;
  double betweenness = 0.0;
  double closeness = 0.0;
  double composite_z = 0.0;
};

inline std::vector<NodeMetricsRow> compute_node_metrics(const TransitGraph& g,
                                                        const MetricOptions& opt = {}) {
  auto deg = degrees(g);
  auto bc = betweenness(g, opt.weighted_betweenness, opt);
  auto cl = closeness(g, opt.weighted_closeness, opt);
  std::vector<double> degd(deg.begin(), deg.end());
  auto zd = zscores(degd);
  auto zb = zscores(bc);
  auto zc = zscores(cl);
  std::vector<NodeMetricsRow> rows(g.node_count());
  for (size_t i = 0; i < rows.size(); ++i) {
    rows[i].node = int(i);
    rows[i].degree = deg[i];
    rows[i].betweenness = bc[i];
    rows[i].closeness = cl[i];
    rows[i].composite_z = zd[i] + zb[i] + zc[i];
  }
  return rows;
}

// Node ids sorted by composite score descending, ties by node label in
// natural order; first top_k returned.
inline std::vector<int> composite_rank(const TransitGraph& g,
                                       const std::vector<NodeMetricsRow>& rows, size_t top_k) {
  if (rows.size() < top_k)
    fail(Errc::not_enough_nodes, "ranking " + std::to_string(top_k) + " nodes out of " +
                                     std::to_string(rows.size()));
  std::vector<int> ids(rows.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = rows[i].node;
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    double za = rows[size_t(a)].composite_z, zb = rows[size_t(b)].composite_z;
    if (za != zb) return za > zb;
    return natural_less(g.label(a), g.label(b));
  });
  ids.resize(top_k);
  return ids;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U with midrank ties. Exact two-sided p (share of arrangements
// whose min-U is at most the observed one) when n_a*n_b <= 200; otherwise the
// normal approximation with tie-corrected variance and continuity correction.

struct MannWhitneyResult {
  double u = 0.0;
  double p_two_sided = 1.0;
  bool exact = false;
};

inline MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  if (a.empty() || b.empty()) fail(Errc::empty_sample, "both samples must be non-empty");
  size_t na = a.size(), nb = b.size(), n = na + nb;

  // midranks over the pooled values
  std::vector<std::pair<double, int>> pooled;  // (value, 0 for a / 1 for b)
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<double> rank(n);
  std::vector<size_t> tie_sizes;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    double mid = 0.5 * double(i + 1 + j);  // mean of ranks i+1 .. j
    for (size_t t = i; t < j; ++t) rank[t] = mid;
    tie_sizes.push_back(j - i);
    i = j;
  }
  double ra = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (pooled[i].second == 0) ra += rank[i];
  double ua = ra - double(na) * double(na + 1) / 2.0;
  double ub = double(na) * double(nb) - ua;
  MannWhitneyResult res;
  res.u = std::min(ua, ub);

  if (na * nb <= 200) {
    res.exact = true;
    // enumerate every way to assign na of the n rank slots to sample A
    uint64_t extreme = 0, total = 0;
    std::vector<size_t> pick;
    double target = res.u + 1e-9;
    auto recurse = [&](auto&& self, size_t next, size_t left, double ranksum) -> void {
      if (left == 0) {
        ++total;
        double u1 = ranksum - double(na) * double(na + 1) / 2.0;
        double u2 = double(na) * double(nb) - u1;
        if (std::min(u1, u2) <= target) ++extreme;
        return;
      }
      if (n - next < left) return;
      for (size_t i = next; i + left <= n; ++i) self(self, i + 1, left - 1, ranksum + rank[i]);
    };
    recurse(recurse, 0, na, 0.0);
    res.p_two_sided = double(extreme) / double(total);
  } else {
    double mean = double(na) * double(nb) / 2.0;
    double tie_term = 0.0;
    for (size_t t : tie_sizes) tie_term += double(t) * double(t) * double(t) - double(t);
    double var = double(na) * double(nb) / 12.0 *
                 (double(n + 1) - tie_term / (double(n) * double(n - 1)));
    if (var <= 0.0) {
      res.p_two_sided = 1.0;  // every value tied
    } else {
      double z = (res.u - mean + 0.5) / std::sqrt(var);
      res.p_two_sided = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// The four whole-graph indicators. Path and efficiency entries are optional:
// they stay empty when their preconditions fail (too few nodes, no usable
// component), which downstream reports present as "undefined".

struct GraphIndicators {
  double global_clustering = 0.0;
  size_t scc_count = 0;
  std::optional<double> avg_shortest_path;
  std::optional<double> efficiency;

  friend bool operator==(const GraphIndicators&, const GraphIndicators&) = default;
};

inline GraphIndicators compute_indicators(const TransitGraph& g, const MetricOptions& opt = {}) {
  GraphIndicators ind;
  ind.global_clustering = weighted_global_clustering(g);
  auto comps = strongly_connected_components(g);
  ind.scc_count = comps.size();
  if (!comps.empty() && largest_component(comps).size() >= 2)
    ind.avg_shortest_path = avg_shortest_path(g, opt);
  if (g.node_count() >= 2) ind.efficiency = global_efficiency(g, opt);
  return ind;
}

}  // namespace transit
