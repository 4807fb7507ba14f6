#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "transit/cluster.hpp"
#include "transit/community.hpp"
#include "transit/core.hpp"
#include "transit/graph.hpp"

namespace transit {
namespace geojson {

using nlohmann::json;

inline json point_feature(double lon, double lat, json properties) {
  return json{{"type", "Feature"},
              {"geometry", json{{"type", "Point"}, {"coordinates", json::array({lon, lat})}}},
              {"properties", std::move(properties)}};
}

inline json collection(json features) {
  return json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

// Station point layer straight from the catalog.
inline json station_points(const StationCatalog& cat) {
  json features = json::array();
  for (const auto& s : cat.stations)
    features.push_back(point_feature(
        s.lon, s.lat, json{{"id", s.id}, {"name", s.name}, {"mode", s.mode}}));
  return collection(std::move(features));
}

// One LineString per directed edge, carrying flow and normalized flow for
// thickness mapping in external renderers. Coordinates come from a per-node
// position table aligned with the graph's node ids; self-loops are skipped.
struct NodePosition {
  double lon = 0.0;
  double lat = 0.0;
};

inline json flow_lines(const TransitGraph& g, const std::vector<NodePosition>& pos) {
  if (pos.size() != g.node_count())
    fail(Errc::invalid_config, "node position table does not match the graph");
  json features = json::array();
  for (const auto& [key, data] : g.edges()) {
    if (key.first == key.second) continue;
    json geometry{{"type", "LineString"},
                  {"coordinates",
                   json::array({json::array({pos[size_t(key.first)].lon, pos[size_t(key.first)].lat}),
                                json::array({pos[size_t(key.second)].lon, pos[size_t(key.second)].lat})})}};
    json props{{"src", g.label(key.first)},
               {"dst", g.label(key.second)},
               {"flow", data.flow}};
    if (data.normalized) props["normalized_flow"] = *data.normalized;
    features.push_back(
        json{{"type", "Feature"}, {"geometry", std::move(geometry)}, {"properties", std::move(props)}});
  }
  return collection(std::move(features));
}

namespace detail {
// Andrew's monotone chain; returns hull points counter-clockwise.
inline std::vector<NodePosition> convex_hull(std::vector<NodePosition> pts) {
  std::sort(pts.begin(), pts.end(), [](const NodePosition& a, const NodePosition& b) {
    return a.lon != b.lon ? a.lon < b.lon : a.lat < b.lat;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const NodePosition& a, const NodePosition& b) {
                          return a.lon == b.lon && a.lat == b.lat;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const NodePosition& o, const NodePosition& a, const NodePosition& b) {
    return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
  };
  std::vector<NodePosition> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}
}  // namespace detail

// Convex hull polygon per community (points and 2-point communities degrade
// to Point/LineString geometries so nothing is silently dropped).
inline json community_hulls(const TransitGraph& g, const CommunityPartition& part,
                            const std::vector<NodePosition>& pos) {
  if (pos.size() != g.node_count() || part.assignment.size() != g.node_count())
    fail(Errc::invalid_config, "positions and partition must cover the graph");
  int n_comm = 0;
  for (int c : part.assignment) n_comm = std::max(n_comm, c + 1);
  std::vector<std::vector<NodePosition>> member_pos(static_cast<size_t>(n_comm));
  for (size_t u = 0; u < g.node_count(); ++u)
    member_pos[size_t(part.assignment[u])].push_back(pos[u]);

  json features = json::array();
  for (int c = 0; c < n_comm; ++c) {
    auto hull = detail::convex_hull(member_pos[size_t(c)]);
    json props{{"community", c}, {"size", member_pos[size_t(c)].size()}};
    json geometry;
    if (hull.size() >= 3) {
      json ring = json::array();
      for (const auto& p : hull) ring.push_back(json::array({p.lon, p.lat}));
      ring.push_back(json::array({hull[0].lon, hull[0].lat}));  // closed ring
      geometry = json{{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}};
    } else if (hull.size() == 2) {
      geometry = json{{"type", "LineString"},
                      {"coordinates", json::array({json::array({hull[0].lon, hull[0].lat}),
                                                   json::array({hull[1].lon, hull[1].lat})})}};
    } else if (hull.size() == 1) {
      geometry = json{{"type", "Point"}, {"coordinates", json::array({hull[0].lon, hull[0].lat})}};
    } else {
      continue;  // empty community id, nothing to draw
    }
    features.push_back(json{{"type", "Feature"},
                            {"geometry", std::move(geometry)},
                            {"properties", std::move(props)}});
  }
  return collection(std::move(features));
}

}  // namespace geojson
}  // namespace transit
