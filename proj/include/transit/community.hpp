#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "transit/core.hpp"
#include "transit/graph.hpp"
#include "transit/metrics.hpp"

namespace transit {

// ---------------------------------------------------------------------------
// Modularity of a partition, Newman form on the undirected projection with
// summed directed raw flows, self-loops excluded. Grouped per community as
// Q = sum_c [ in_c/2m - (tot_c/2m)^2 ], with both accumulators filled in
// node-ascending order; for a single all-inclusive community in_c and tot_c
// then sum the very same terms in the very same order, so Q is exactly 0.

inline double modularity(const TransitGraph& g, const std::vector<int>& assignment) {
  size_t n = g.node_count();
  if (n == 0) fail(Errc::empty_graph, "modularity of an empty graph");
  if (assignment.size() != n) fail(Errc::partial_assignment, "assignment does not cover all nodes");
  int n_comm = 0;
  for (int c : assignment) {
    if (c < 0) fail(Errc::partial_assignment, "negative community id");
    n_comm = std::max(n_comm, c + 1);
  }
  auto und = undirected_projection(g, Combine::sum, false);
  std::vector<double> in(size_t(n_comm), 0.0), tot(size_t(n_comm), 0.0);
  double m2 = 0.0;
  for (size_t u = 0; u < n; ++u) {
    int cu = assignment[u];
    for (auto [v, w] : und[u]) {
      m2 += w;
      tot[size_t(cu)] += w;
      if (assignment[size_t(v)] == cu) in[size_t(cu)] += w;
    }
  }
  if (m2 == 0.0) return 0.0;  // edgeless graph: every partition scores 0
  double q = 0.0;
  for (int c = 0; c < n_comm; ++c) {
    double frac_in = in[size_t(c)] / m2;
    double frac_tot = tot[size_t(c)] / m2;
    q += frac_in - frac_tot * frac_tot;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Louvain: repeated local-move passes followed by graph aggregation, on the
// same undirected projection as modularity.

struct CommunityInfo {
  int community = 0;
  size_t size = 0;
  double average_degree = 0.0;  // mean member degree, degrees from the full graph
};

struct CommunityPartition {
  std::vector<int> assignment;  // node -> community id, contiguous from 0
  double modularity = 0.0;
  std::vector<CommunityInfo> communities;
};

namespace detail {

// Working graph for the aggregation levels: undirected weighted adjacency
// plus per-node self-loop weight (internal weight of a collapsed community).
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self_loop;

  size_t size() const { return adj.size(); }
};

struct LocalMoveResult {
  std::vector<int> community;  // renumbered contiguous from 0
  int n_communities = 0;
  bool moved_any = false;
};

inline LocalMoveResult louvain_local_move(const LevelGraph& lg, Rng& rng, double resolution,
                                          double min_gain) {
  size_t n = lg.size();
  std::vector<int> comm(n);
  std::vector<double> strength(n, 0.0);  // k_i including twice the self-loop
  double m2 = 0.0;
  for (size_t u = 0; u < n; ++u) {
    comm[u] = int(u);
    double s = 2.0 * lg.self_loop[u];
    for (auto [v, w] : lg.adj[u]) s += w;
    strength[u] = s;
    m2 += s;
  }
  LocalMoveResult res;
  if (m2 == 0.0) {  // no edges: singletons stand
    res.community = comm;
    res.n_communities = int(n);
    return res;
  }
  std::vector<double> tot(strength);  // per community, starts as singletons

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<double> link_to(n, 0.0);  // weight from the moving node to each community
  std::vector<int> touched;
  const int kMaxPasses = 128;
  int passes = 0;
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t idx = 0; idx < n; ++idx) {
      size_t u = order[idx];
      int cu = comm[u];
      touched.clear();
      link_to[size_t(cu)] = 0.0;
      touched.push_back(cu);
      for (auto [v, w] : lg.adj[u]) {
        int cv = comm[size_t(v)];
        if (link_to[size_t(cv)] == 0.0 && cv != cu) touched.push_back(cv);
        link_to[size_t(cv)] += w;
      }
      tot[size_t(cu)] -= strength[u];
      // gain of joining community c is link_to[c]/m - tot[c]*k_u*resolution/(2m^2);
      // the common positive factor 2/m2 is dropped since only comparisons matter.
      // A move needs a min_gain improvement over staying; ties keep the first
      // candidate in (deterministic) adjacency order.
      double best_gain = link_to[size_t(cu)] - resolution * tot[size_t(cu)] * strength[u] / m2;
      int best = cu;
      for (int c : touched) {
        if (c == cu) continue;
        double gain = link_to[size_t(c)] - resolution * tot[size_t(c)] * strength[u] / m2;
        if (gain > best_gain + min_gain) {
          best_gain = gain;
          best = c;
        }
      }
      tot[size_t(best)] += strength[u];
      if (best != cu) {
        comm[u] = best;
        improved = true;
        res.moved_any = true;
      }
      for (int c : touched) link_to[size_t(c)] = 0.0;
    }
    if (++passes >= kMaxPasses) break;  // FP-noise safety net, never hit in practice
  }

  // renumber communities contiguously in node order
  std::vector<int> remap(n, -1);
  int next = 0;
  res.community.resize(n);
  for (size_t u = 0; u < n; ++u) {
    if (remap[size_t(comm[u])] == -1) remap[size_t(comm[u])] = next++;
    res.community[u] = remap[size_t(comm[u])];
  }
  res.n_communities = next;
  return res;
}

inline LevelGraph louvain_aggregate(const LevelGraph& lg, const std::vector<int>& comm,
                                    int n_comm) {
  LevelGraph out;
  out.adj.resize(size_t(n_comm));
  out.self_loop.assign(size_t(n_comm), 0.0);
  std::map<std::pair<int, int>, double> agg;
  for (size_t u = 0; u < lg.size(); ++u) {
    int cu = comm[u];
    out.self_loop[size_t(cu)] += lg.self_loop[u];
    for (auto [v, w] : lg.adj[u]) {
      if (size_t(v) < u) continue;  // undirected edge stored twice; visit once
      int cv = comm[size_t(v)];
      if (cu == cv)
        out.self_loop[size_t(cu)] += w;  // both directions of (u,v) fold into one loop
      else {
        auto key = cu < cv ? std::make_pair(cu, cv) : std::make_pair(cv, cu);
        agg[key] += w;
      }
    }
  }
  for (const auto& [key, w] : agg) {
    out.adj[size_t(key.first)].emplace_back(key.second, w);
    out.adj[size_t(key.second)].emplace_back(key.first, w);
  }
  for (auto& row : out.adj) std::sort(row.begin(), row.end());
  return out;
}

}  // namespace detail

inline CommunityPartition louvain(const TransitGraph& g, uint64_t seed, double resolution = 1.0) {
  size_t n = g.node_count();
  if (n == 0) fail(Errc::empty_graph, "community detection on an empty graph");
  const double kMinGain = 1e-9;

  detail::LevelGraph level;
  level.adj = undirected_projection(g, Combine::sum, false);
  level.self_loop.assign(n, 0.0);

  std::vector<int> assignment(n);
  for (size_t i = 0; i < n; ++i) assignment[i] = int(i);
  double singleton_q = modularity(g, assignment);

  Rng rng(seed);
  for (;;) {
    auto move = detail::louvain_local_move(level, rng, resolution, kMinGain);
    if (!move.moved_any) break;
    for (auto& a : assignment) a = move.community[size_t(a)];
    if (size_t(move.n_communities) == level.size()) break;
    level = detail::louvain_aggregate(level, move.community, move.n_communities);
  }

  CommunityPartition part;
  part.assignment = std::move(assignment);
  part.modularity = modularity(g, part.assignment);
  if (part.modularity + 1e-12 < singleton_q)
    fail(Errc::internal, "community search regressed below the singleton partition");

  // canonical ids: by descending size, then by smallest member label
  int n_comm = 0;
  for (int c : part.assignment) n_comm = std::max(n_comm, c + 1);
  struct Group {
    int old_id;
    size_t size = 0;
    int min_member = 0;  // index into label order
  };
  auto order = nodes_in_label_order(g);
  std::vector<int> label_pos(n);  // node -> position in label order
  for (size_t i = 0; i < order.size(); ++i) label_pos[size_t(order[i])] = int(i);
  std::vector<Group> groups(static_cast<size_t>(n_comm));
  for (int c = 0; c < n_comm; ++c) {
    groups[size_t(c)].old_id = c;
    groups[size_t(c)].min_member = int(n);
  }
  for (size_t u = 0; u < n; ++u) {
    auto& grp = groups[size_t(part.assignment[u])];
    ++grp.size;
    grp.min_member = std::min(grp.min_member, label_pos[u]);
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (a.size != b.size) return a.size > b.size;
    return a.min_member < b.min_member;
  });
  std::vector<int> remap(static_cast<size_t>(n_comm));
  for (size_t i = 0; i < groups.size(); ++i) remap[size_t(groups[i].old_id)] = int(i);
  for (auto& a : part.assignment) a = remap[size_t(a)];

  // per-community rows, ids now canonical
  auto deg = degrees(g);
  part.communities.resize(size_t(n_comm));
  for (int c = 0; c < n_comm; ++c) part.communities[size_t(c)].community = c;
  for (size_t u = 0; u < n; ++u) {
    auto& info = part.communities[size_t(part.assignment[u])];
    ++info.size;
    info.average_degree += double(deg[u]);
  }
  for (auto& info : part.communities) info.average_degree /= double(info.size);
  return part;
}

// Table rows for a partition: size, mean member degree (degrees taken from
// the full graph), and the whole-partition modularity repeated per row.
struct CommunityMetricsRow {
  int community = 0;
  size_t size = 0;
  double average_degree = 0.0;
  double modularity = 0.0;
};

inline std::vector<CommunityMetricsRow> community_metrics(const TransitGraph& g,
                                                          const CommunityPartition& part) {
  std::vector<CommunityMetricsRow> rows;
  rows.reserve(part.communities.size());
  for (const auto& info : part.communities)
    rows.push_back({info.community, info.size, info.average_degree, part.modularity});
  return rows;
}

}  // namespace transit
