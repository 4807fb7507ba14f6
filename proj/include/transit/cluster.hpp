#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "transit/core.hpp"
#include "transit/ingest.hpp"

namespace transit {

struct Point {
  double x = 0.0;  // longitude
  double y = 0.0;  // latitude
};

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-7;        // max centroid shift (squared distance) to stop
  bool plusplus_init = false;
};

struct KMeansResult {
  std::vector<Point> centroids;        // size k
  std::vector<int> assignment;          // size n, centroid index per point
  std::vector<double> inertia_trace;    // total within-cluster SSE per iteration
  int iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_trace.empty() ? 0.0 : inertia_trace.back(); }
};

namespace detail {
inline double sqdist(Point a, Point b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Distinct points in first-appearance order; k-means seeds must not collide.
inline std::vector<Point> distinct_points(const std::vector<Point>& pts) {
  std::vector<Point> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out)
      if (q.x == p.x && q.y == p.y) { dup = true; break; }
    if (!dup) out.push_back(p);
  }
  return out;
}
}  // namespace detail

// Lloyd iterations on raw coordinates. Deterministic for a given seed: ties in
// the nearest-centroid step go to the lowest centroid index, empty clusters
// are reseeded at the point farthest from its centroid, and all reductions
// run in point order.
inline KMeansResult kmeans_fit(const std::vector<Point>& points, int k, uint64_t seed,
                               const KMeansOptions& opt = {}) {
  if (points.empty()) fail(Errc::empty_input, "k-means needs at least one point");
  if (k <= 0) fail(Errc::invalid_config, "k must be positive");
  auto distinct = detail::distinct_points(points);
  if (size_t(k) > distinct.size())
    fail(Errc::k_too_large, "k=" + std::to_string(k) + " exceeds " +
                                std::to_string(distinct.size()) + " distinct points");

  Rng rng(seed);
  KMeansResult res;
  res.centroids.reserve(size_t(k));
  if (opt.plusplus_init) {
    res.centroids.push_back(distinct[rng.below(distinct.size())]);
    std::vector<double> d2(distinct.size());
    while (res.centroids.size() < size_t(k)) {
      double total = 0.0;
      for (size_t i = 0; i < distinct.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : res.centroids) best = std::min(best, detail::sqdist(distinct[i], c));
        d2[i] = best;
        total += best;
      }
      double target = rng.uniform() * total;
      size_t pick = 0;
      double run = 0.0;
      for (size_t i = 0; i < distinct.size(); ++i) {
        run += d2[i];
        if (run >= target && d2[i] > 0.0) { pick = i; break; }
      }
      res.centroids.push_back(distinct[pick]);
    }
  } else {
    // uniform draw of k distinct points
    std::vector<size_t> idx(distinct.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    for (int i = 0; i < k; ++i) res.centroids.push_back(distinct[idx[size_t(i)]]);
  }

  res.assignment.assign(points.size(), -1);
  std::vector<Point> sums(static_cast<size_t>(k));
  std::vector<size_t> counts(static_cast<size_t>(k));
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    res.iterations = iter + 1;
    double inertia = 0.0;
    std::fill(sums.begin(), sums.end(), Point{});
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = detail::sqdist(points[i], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = detail::sqdist(points[i], res.centroids[size_t(c)]);
        if (d < best_d) { best_d = d; best = c; }
      }
      res.assignment[i] = best;
      inertia += best_d;
      sums[size_t(best)].x += points[i].x;
      sums[size_t(best)].y += points[i].y;
      ++counts[size_t(best)];
    }
    res.inertia_trace.push_back(inertia);

    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[size_t(c)] == 0) {
        // reseed at the point farthest from its own centroid
        size_t far = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < points.size(); ++i) {
          double d = detail::sqdist(points[i], res.centroids[size_t(res.assignment[i])]);
          if (d > far_d) { far_d = d; far = i; }
        }
        shift = std::max(shift, detail::sqdist(res.centroids[size_t(c)], points[far]));
        res.centroids[size_t(c)] = points[far];
        continue;
      }
      Point next{sums[size_t(c)].x / double(counts[size_t(c)]),
                 sums[size_t(c)].y / double(counts[size_t(c)])};
      shift = std::max(shift, detail::sqdist(res.centroids[size_t(c)], next));
      res.centroids[size_t(c)] = next;
    }
    if (shift < opt.tol) {
      res.converged = true;
      // final pass so assignments match the converged centroids
      double final_inertia = 0.0;
      for (size_t i = 0; i < points.size(); ++i) {
        int best = 0;
        double best_d = detail::sqdist(points[i], res.centroids[0]);
        for (int c = 1; c < k; ++c) {
          double d = detail::sqdist(points[i], res.centroids[size_t(c)]);
          if (d < best_d) { best_d = d; best = c; }
        }
        res.assignment[i] = best;
        final_inertia += best_d;
      }
      res.inertia_trace.push_back(final_inertia);
      break;
    }
  }
  return res;
}

// Nearest-centroid query for a point outside the fitted set; ties go to the
// lowest centroid index.
inline int assign_point(Point p, const KMeansResult& model) {
  if (model.centroids.empty()) fail(Errc::empty_input, "model has no centroids");
  int best = 0;
  double best_d = detail::sqdist(p, model.centroids[0]);
  for (int c = 1; c < int(model.centroids.size()); ++c) {
    double d = detail::sqdist(p, model.centroids[size_t(c)]);
    if (d < best_d) { best_d = d; best = c; }
  }
  return best;
}

// Station -> cluster mapping produced from a fitted model over the catalog
// (assignment is index-aligned with catalog.stations).
struct NodeMap {
  std::vector<int> station_to_node;  // indexed by Station::id
  int node_count = 0;

  int node_of(int station_id) const {
    if (station_id < 0 || size_t(station_id) >= station_to_node.size())
      fail(Errc::unmapped_station, "station id " + std::to_string(station_id) + " outside map");
    return station_to_node[size_t(station_id)];
  }
};

inline NodeMap node_map_from_kmeans(const KMeansResult& km, int k) {
  NodeMap m;
  m.station_to_node = km.assignment;
  m.node_count = k;
  return m;
}

// Per-cluster node: member count, coordinate mean of member stations
// (recomputed from members, which equals the fitted centroid once converged),
// and the exact sum of member flows. Empty clusters do not appear.
struct ClusterNode {
  int node = 0;
  size_t size = 0;
  double lon = 0.0;
  double lat = 0.0;
  int64_t total_flow = 0;
};

inline std::vector<ClusterNode> aggregate_nodes(
    const StationCatalog& cat, const NodeMap& map,
    const std::unordered_map<int, int64_t>& station_flows = {}) {
  if (cat.stations.size() != map.station_to_node.size())
    fail(Errc::partial_assignment, "node map does not cover the station catalog");
  std::vector<ClusterNode> out(static_cast<size_t>(map.node_count));
  for (int c = 0; c < map.node_count; ++c) out[size_t(c)].node = c;
  for (const auto& s : cat.stations) {
    auto& cs = out[size_t(map.station_to_node[size_t(s.id)])];
    ++cs.size;
    cs.lon += s.lon;
    cs.lat += s.lat;
    auto it = station_flows.find(s.id);
    if (it != station_flows.end()) cs.total_flow += it->second;
  }
  std::vector<ClusterNode> filled;
  for (auto& cs : out) {
    if (cs.size == 0) continue;
    cs.lon /= double(cs.size);
    cs.lat /= double(cs.size);
    filled.push_back(cs);
  }
  return filled;
}

}  // namespace transit
