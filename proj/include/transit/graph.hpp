#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "transit/cluster.hpp"
#include "transit/core.hpp"
#include "transit/preprocess.hpp"

namespace transit {

struct EdgeData {
  double flow = 0.0;                     // summed passenger volume
  std::optional<double> normalized;      // min-max scaled flow, set by normalize_flows
};

// Weighted directed multigraph-free graph. Nodes are string keys (station
// names or cluster ids); edges live in an ordered map so every iteration over
// the graph is deterministic. Self-loops may be stored but are skipped by all
// metric computations.
class TransitGraph {
 public:
  int add_node(const std::string& label) {
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(labels_.size());
    labels_.push_back(label);
    index_.emplace(label, id);
    return id;
  }

  std::optional<int> find_node(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void add_flow(int src, int dst, double amount) {
    check_node(src);
    check_node(dst);
    edges_[{src, dst}].flow += amount;
  }

  void set_edge(int src, int dst, EdgeData data) {
    check_node(src);
    check_node(dst);
    edges_[{src, dst}] = data;
  }

  size_t node_count() const { return labels_.size(); }
  size_t edge_count() const { return edges_.size(); }
  const std::string& label(int id) const {
    check_node(id);
    return labels_[size_t(id)];
  }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::map<std::pair<int, int>, EdgeData>& edges() const { return edges_; }

  const EdgeData* edge(int src, int dst) const {
    auto it = edges_.find({src, dst});
    return it == edges_.end() ? nullptr : &it->second;
  }

  // Adjacency snapshot for traversals: out_[u] lists (v, weight) ordered by v.
  // `use_normalized` picks the normalized flow when present.
  std::vector<std::vector<std::pair<int, double>>> out_adjacency(bool use_normalized) const {
    std::vector<std::vector<std::pair<int, double>>> adj(labels_.size());
    for (const auto& [key, data] : edges_) {
      if (key.first == key.second) continue;
      double w = use_normalized && data.normalized ? *data.normalized : data.flow;
      adj[size_t(key.first)].emplace_back(key.second, w);
    }
    return adj;
  }

  std::vector<std::vector<std::pair<int, double>>> in_adjacency(bool use_normalized) const {
    std::vector<std::vector<std::pair<int, double>>> adj(labels_.size());
    for (const auto& [key, data] : edges_) {
      if (key.first == key.second) continue;
      double w = use_normalized && data.normalized ? *data.normalized : data.flow;
      adj[size_t(key.second)].emplace_back(key.first, w);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
  }

  bool has_normalized() const {
    for (const auto& [key, data] : edges_)
      if (key.first != key.second && !data.normalized) return false;
    return !edges_.empty();
  }

 private:
  void check_node(int id) const {
    if (id < 0 || size_t(id) >= labels_.size())
      fail(Errc::internal, "node id " + std::to_string(id) + " out of range");
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::map<std::pair<int, int>, EdgeData> edges_;
};

// ---------------------------------------------------------------------------
// Network construction from chains. Each consecutive pair of legs contributes
// one unit of flow on the directed edge between its stations (or between the
// clusters those stations map to). Same-node pairs become self-loops, which
// stay in the edge set for bookkeeping but never enter metrics.

struct BuildStats {
  size_t leg_pairs = 0;
  size_t self_loops = 0;
  size_t unmapped_station_pairs = 0;  // only with on_unmapped == skip
};

enum class UnmappedPolicy { fail, skip };

struct BuildOptions {
  const StationCatalog* catalog = nullptr;  // required when mapping to clusters
  const NodeMap* node_map = nullptr;        // absent: station-level network
  UnmappedPolicy on_unmapped = UnmappedPolicy::fail;
  bool od_extremes = false;  // count only first->last leg instead of consecutive pairs
};

inline TransitGraph build_network(const std::vector<TravelChain>& chains,
                                  const BuildOptions& opt = {}, BuildStats* stats = nullptr) {
  if (opt.node_map && !opt.catalog)
    fail(Errc::invalid_config, "cluster-level network needs the station catalog");
  TransitGraph g;
  BuildStats local;
  if (opt.node_map) {
    // Pre-register every populated cluster so node ids are 0..k-1 regardless
    // of which clusters appear in the chains.
    std::vector<bool> seen(size_t(opt.node_map->node_count), false);
    for (int sid = 0; sid < int(opt.node_map->station_to_node.size()); ++sid)
      seen[size_t(opt.node_map->station_to_node[size_t(sid)])] = true;
    for (int c = 0; c < opt.node_map->node_count; ++c)
      if (seen[size_t(c)]) g.add_node(std::to_string(c));
  }
  auto resolve = [&](const std::string& name) -> std::optional<int> {
    if (!opt.node_map) return g.add_node(name);
    const Station* s = opt.catalog->find(name);
    if (!s) {
      if (opt.on_unmapped == UnmappedPolicy::fail)
        fail(Errc::unmapped_station, "station '" + name + "' not in catalog");
      return std::nullopt;
    }
    return g.find_node(std::to_string(opt.node_map->node_of(s->id)));
  };
  auto add_pair = [&](const std::string& from, const std::string& to) {
    auto a = resolve(from);
    auto b = resolve(to);
    if (!a || !b) {
      ++local.unmapped_station_pairs;
      return;
    }
    ++local.leg_pairs;
    if (*a == *b) ++local.self_loops;
    g.add_flow(*a, *b, 1.0);
  };
  for (const auto& chain : chains) {
    if (opt.od_extremes) {
      if (chain.legs.size() >= 2)
        add_pair(chain.legs.front().station_name, chain.legs.back().station_name);
    } else {
      for (size_t i = 0; i + 1 < chain.legs.size(); ++i)
        add_pair(chain.legs[i].station_name, chain.legs[i + 1].station_name);
    }
  }
  if (stats) *stats = local;
  return g;
}

// Min-max scaling of edge flows into [0,1] over the full edge multiset.
// Self-loops take part like any other edge (the busiest observed OD pairs are
// often loops within one hub); they are still skipped later by every metric.
inline void normalize_flows(TransitGraph& g) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& [key, data] : g.edges()) {
    if (first) { lo = hi = data.flow; first = false; }
    lo = std::min(lo, data.flow);
    hi = std::max(hi, data.flow);
  }
  if (first) fail(Errc::empty_graph, "no edges to normalize");
  if (lo == hi) fail(Errc::degenerate_flows, "all edge flows equal, nothing to normalize");
  std::vector<std::pair<std::pair<int, int>, EdgeData>> updates;
  for (const auto& [key, data] : g.edges()) {
    EdgeData d = data;
    d.normalized = (data.flow - lo) / (hi - lo);
    updates.emplace_back(key, d);
  }
  for (auto& [key, d] : updates) g.set_edge(key.first, key.second, d);
}

// Rebuilds the graph without the named nodes (and any edge touching them).
// Unknown names are counted, not fatal: removal lists often come from rank
// tables computed on a different cohort.
inline TransitGraph remove_nodes(const TransitGraph& g, const std::vector<std::string>& names,
                                 size_t* unknown = nullptr) {
  std::unordered_set<int> gone;
  size_t missing = 0;
  for (const auto& name : names) {
    auto id = g.find_node(name);
    if (id) gone.insert(*id);
    else ++missing;
  }
  TransitGraph out;
  for (int u = 0; u < int(g.node_count()); ++u)
    if (!gone.count(u)) out.add_node(g.label(u));
  for (const auto& [key, data] : g.edges()) {
    if (gone.count(key.first) || gone.count(key.second)) continue;
    int a = *out.find_node(g.label(key.first));
    int b = *out.find_node(g.label(key.second));
    out.set_edge(a, b, data);
  }
  if (unknown) *unknown = missing;
  return out;
}

// Undirected view of the graph, self-loops dropped. The two directions of an
// edge combine by sum (community detection semantics) or max (clustering
// coefficient semantics). Neighbor lists come out sorted.
enum class Combine { sum, max };

inline std::vector<std::vector<std::pair<int, double>>> undirected_projection(
    const TransitGraph& g, Combine combine, bool use_normalized) {
  std::map<std::pair<int, int>, double> und;
  for (const auto& [key, data] : g.edges()) {
    if (key.first == key.second) continue;
    double w = use_normalized && data.normalized ? *data.normalized : data.flow;
    auto k = key.first < key.second ? key : std::make_pair(key.second, key.first);
    auto [it, fresh] = und.emplace(k, w);
    if (!fresh) it->second = combine == Combine::sum ? it->second + w : std::max(it->second, w);
  }
  std::vector<std::vector<std::pair<int, double>>> adj(g.node_count());
  for (const auto& [k, w] : und) {
    adj[size_t(k.first)].emplace_back(k.second, w);
    adj[size_t(k.second)].emplace_back(k.first, w);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

// Labels in natural order (numeric labels by value, before non-numeric ones);
// fixes the row order of every per-node export.
inline std::vector<int> nodes_in_label_order(const TransitGraph& g) {
  std::vector<int> ids(g.node_count());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = int(i);
  std::sort(ids.begin(), ids.end(),
            [&](int a, int b) { return natural_less(g.label(a), g.label(b)); });
  return ids;
}

}  // namespace transit
