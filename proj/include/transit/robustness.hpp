#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "transit/core.hpp"
#include "transit/graph.hpp"
#include "transit/metrics.hpp"

namespace transit {

enum class RemovalStrategy { composite, degree, random };

inline const char* strategy_name(RemovalStrategy s) {
  switch (s) {
    case RemovalStrategy::composite: return "composite";
    case RemovalStrategy::degree: return "degree";
    case RemovalStrategy::random: return "random";
  }
  return "unknown";
}

struct IndicatorDelta {
  std::optional<double> delta;    // after - before; empty when either side is undefined
  std::optional<double> percent;  // 100 * delta / before; empty when before is 0 or undefined
};

struct RobustnessReport {
  std::string network;  // caller-supplied label
  RemovalStrategy strategy = RemovalStrategy::composite;
  size_t k = 0;
  std::vector<std::string> removed;  // node labels in removal-rank order
  GraphIndicators before;
  GraphIndicators after;
  IndicatorDelta clustering_delta;
  IndicatorDelta scc_delta;
  IndicatorDelta path_delta;
  IndicatorDelta efficiency_delta;
};

namespace detail {
inline IndicatorDelta make_delta(std::optional<double> before, std::optional<double> after) {
  IndicatorDelta d;
  if (!before || !after) return d;
  d.delta = *after - *before;
  if (*before != 0.0) d.percent = 100.0 * *d.delta / *before;
  return d;
}

inline void fill_deltas(RobustnessReport& r) {
  r.clustering_delta = make_delta(r.before.global_clustering, r.after.global_clustering);
  r.scc_delta = make_delta(double(r.before.scc_count), double(r.after.scc_count));
  r.path_delta = make_delta(r.before.avg_shortest_path, r.after.avg_shortest_path);
  r.efficiency_delta = make_delta(r.before.efficiency, r.after.efficiency);
}
}  // namespace detail

// Top-k composite hubs removed jointly; the four indicators are reported for
// the intact and the reduced graph. Path and efficiency can come back
// undefined on the reduced graph (optional stays empty) without failing.
inline RobustnessReport robustness_test(const TransitGraph& g, size_t top_k = 10,
                                        const MetricOptions& opt = {}) {
  if (g.node_count() <= top_k)
    fail(Errc::graph_too_small, "cannot remove " + std::to_string(top_k) + " of " +
                                    std::to_string(g.node_count()) + " nodes");
  RobustnessReport report;
  report.strategy = RemovalStrategy::composite;
  report.k = top_k;
  if (top_k > 0) {
    auto rows = compute_node_metrics(g, opt);
    for (int id : composite_rank(g, rows, top_k)) report.removed.push_back(g.label(id));
  }
  report.before = compute_indicators(g, opt);
  if (report.removed.empty()) {
    report.after = report.before;
  } else {
    report.after = compute_indicators(remove_nodes(g, report.removed), opt);
  }
  detail::fill_deltas(report);
  return report;
}

// One report per k under a single strategy. Composite and degree orders are
// rank-once prefixes (so removal sets are nested across k); random is a
// seed-deterministic shuffle, also taken by prefix.
inline std::vector<RobustnessReport> removal_sweep(const TransitGraph& g,
                                                   const std::vector<size_t>& ks,
                                                   RemovalStrategy strategy, uint64_t seed = 0,
                                                   const MetricOptions& opt = {}) {
  size_t max_k = 0;
  for (size_t k : ks) max_k = std::max(max_k, k);
  if (g.node_count() == 0 || max_k >= g.node_count())
    fail(Errc::graph_too_small, "sweep removes " + std::to_string(max_k) + " of " +
                                    std::to_string(g.node_count()) + " nodes");

  std::vector<int> ranking;
  switch (strategy) {
    case RemovalStrategy::composite: {
      if (max_k > 0) ranking = composite_rank(g, compute_node_metrics(g, opt), max_k);
      break;
    }
    case RemovalStrategy::degree: {
      auto deg = degrees(g);
      ranking.resize(g.node_count());
      for (size_t i = 0; i < ranking.size(); ++i) ranking[i] = int(i);
      std::sort(ranking.begin(), ranking.end(), [&](int a, int b) {
        if (deg[size_t(a)] != deg[size_t(b)]) return deg[size_t(a)] > deg[size_t(b)];
        return natural_less(g.label(a), g.label(b));
      });
      break;
    }
    case RemovalStrategy::random: {
      ranking.resize(g.node_count());
      for (size_t i = 0; i < ranking.size(); ++i) ranking[i] = int(i);
      Rng rng(seed);
      rng.shuffle(ranking);
      break;
    }
  }

  auto before = compute_indicators(g, opt);
  std::vector<RobustnessReport> reports;
  reports.reserve(ks.size());
  for (size_t k : ks) {
    RobustnessReport r;
    r.strategy = strategy;
    r.k = k;
    for (size_t i = 0; i < k; ++i) r.removed.push_back(g.label(ranking[i]));
    r.before = before;
    r.after = k == 0 ? before : compute_indicators(remove_nodes(g, r.removed), opt);
    detail::fill_deltas(r);
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace transit
