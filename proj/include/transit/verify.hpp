#pragma once

// Built-in cross-checks. Every statistic with a brute-force reference
// implementation is recomputed on random instances and compared, so a
// deployed binary can prove its own numerics without the test suite
// (`verify` subcommand). Checks favor breadth over depth; the full test
// suite runs the same comparisons at much larger instance counts.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "transit/community.hpp"
#include "transit/core.hpp"
#include "transit/graph.hpp"
#include "transit/metrics.hpp"
#include "transit/oracle.hpp"
#include "transit/robustness.hpp"

namespace transit {

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string note;  // what was compared, or what disagreed
};

namespace detail {

inline TransitGraph graph_from_edge_list(int n, const std::vector<oracle::Edge>& edges) {
  TransitGraph g;
  for (int i = 0; i < n; ++i) g.add_node(std::to_string(i));
  for (const auto& e : edges) g.add_flow(e.src, e.dst, e.weight);
  return g;
}

// Undirected sum-projection adjacency, strengths, and total weight, built
// directly from the edge list rather than through the graph type.
struct PlainProjection {
  std::vector<std::vector<double>> a;
  std::vector<double> k;
  double m2 = 0.0;
};

inline PlainProjection project_edges(int n, const std::vector<oracle::Edge>& edges) {
  PlainProjection p;
  p.a.assign(size_t(n), std::vector<double>(size_t(n), 0.0));
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    p.a[size_t(e.src)][size_t(e.dst)] += e.weight;
    p.a[size_t(e.dst)][size_t(e.src)] += e.weight;
  }
  p.k.assign(size_t(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.k[size_t(i)] += p.a[size_t(i)][size_t(j)];
  for (double v : p.k) p.m2 += v;
  return p;
}

}  // namespace detail

// Runs all cross-checks; `rounds` scales the number of random instances.
inline std::vector<SelfCheck> run_self_checks(uint64_t seed = 2026, int rounds = 20) {
  using detail::graph_from_edge_list;
  std::vector<SelfCheck> out;
  auto add = [&](const std::string& name, bool pass, const std::string& note) {
    out.push_back({name, pass, note});
  };

  // Betweenness against exhaustive path enumeration.
  {
    Rng rng(seed);
    bool ok = true;
    std::string note;
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 3 + int(rng.below(8));
      int m = n + int(rng.below(uint64_t(n) + 1));
      auto edges = oracle::random_digraph(n, m, rng, true);
      auto g = graph_from_edge_list(n, edges);
      for (bool weighted : {false, true}) {
        auto want = oracle::brute_betweenness(n, edges, weighted);
        MetricOptions opt;
        opt.weighted_betweenness = weighted;
        auto got = betweenness(g, weighted, opt);
        for (int i = 0; i < n; ++i)
          if (std::fabs(want[size_t(i)] - got[size_t(i)]) > 1e-9) {
            ok = false;
            note = "node " + std::to_string(i) + " differs on a " + std::to_string(n) +
                   "-node instance";
          }
      }
    }
    add("betweenness", ok, ok ? std::to_string(rounds) + " random digraphs" : note);
  }

  // Strongly connected components against reachability closure.
  {
    Rng rng(seed + 1);
    bool ok = true;
    std::string note;
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 2 + int(rng.below(30));
      int m = int(std::min<int64_t>(int64_t(rng.below(uint64_t(3 * n))), int64_t(n) * (n - 1)));
      auto edges = oracle::random_digraph(n, m, rng, false);
      auto want = oracle::brute_scc(n, edges);
      auto got = strongly_connected_components(graph_from_edge_list(n, edges));
      if (want != got) {
        ok = false;
        note = "component split differs on a " + std::to_string(n) + "-node instance";
      }
    }
    add("components", ok, ok ? std::to_string(rounds) + " random digraphs" : note);
  }

  // Average path length and efficiency against an all-pairs matrix.
  {
    Rng rng(seed + 2);
    bool ok = true;
    std::string note;
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 2 + int(rng.below(40));
      int m = int(std::min<int64_t>(n + int64_t(rng.below(uint64_t(2 * n))),
                                    int64_t(n) * (n - 1)));
      auto edges = oracle::random_digraph(n, m, rng, true);
      auto g = graph_from_edge_list(n, edges);
      MetricOptions opt;
      auto want_eff = oracle::brute_global_efficiency(n, edges);
      double got_eff = global_efficiency(g, opt);
      if (std::fabs(want_eff - got_eff) > 1e-9) {
        ok = false;
        note = "efficiency differs on a " + std::to_string(n) + "-node instance";
        break;
      }
      std::optional<double> want_path, got_path;
      try {
        want_path = oracle::brute_avg_shortest_path(n, edges);
      } catch (const Error& e) {
        if (e.code() != Errc::no_valid_component) throw;
      }
      try {
        got_path = avg_shortest_path(g, opt);
      } catch (const Error& e) {
        if (e.code() != Errc::no_valid_component) throw;
      }
      if (want_path.has_value() != got_path.has_value() ||
          (want_path && std::fabs(*want_path - *got_path) > 1e-9)) {
        ok = false;
        note = "path length differs on a " + std::to_string(n) + "-node instance";
      }
    }
    add("paths", ok, ok ? std::to_string(rounds) + " random digraphs" : note);
  }

  // Modularity of the reported split against exhaustive partition search.
  {
    Rng rng(seed + 3);
    bool ok = true;
    std::string note;
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 3 + int(rng.below(4));
      int m = n + int(rng.below(uint64_t(n)));
      auto edges = oracle::random_digraph(n, m, rng, true);
      auto g = graph_from_edge_list(n, edges);
      auto p = detail::project_edges(n, edges);
      auto best = oracle::brute_modularity_max(n, edges);
      auto part = louvain(g, 7 + uint64_t(t));
      double got = modularity(g, part.assignment);
      if (std::fabs(got - part.modularity) > 1e-12 || got > best.q + 1e-9) {
        ok = false;
        note = "reported split inconsistent on a " + std::to_string(n) + "-node instance";
      }
      double check = oracle::brute_modularity(n, p.a, p.k, p.m2, part.assignment);
      if (std::fabs(check - got) > 1e-9) {
        ok = false;
        note = "modularity value differs on a " + std::to_string(n) + "-node instance";
      }
    }
    add("modularity", ok, ok ? std::to_string(rounds) + " random digraphs" : note);
  }

  // Community detection should cleanly separate two cliques joined by one edge.
  {
    bool ok = true;
    std::string note;
    std::vector<oracle::Edge> edges;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (a == b) continue;
        edges.push_back({a, b, 1.0});
        edges.push_back({a + 4, b + 4, 1.0});
      }
    edges.push_back({0, 4, 1.0});
    auto g = graph_from_edge_list(8, edges);
    for (int s = 0; s < rounds && ok; ++s) {
      auto part = louvain(g, uint64_t(s));
      for (int i = 1; i < 4 && ok; ++i)
        if (part.assignment[size_t(i)] != part.assignment[0] ||
            part.assignment[size_t(i + 4)] != part.assignment[4] ||
            part.assignment[0] == part.assignment[4]) {
          ok = false;
          note = "clique pair not separated at seed " + std::to_string(s);
        }
    }
    add("communities", ok, ok ? std::to_string(rounds) + " seeds on a two-clique graph" : note);
  }

  // Flow scaling: extremes map to exactly 1 and 0.
  {
    TransitGraph g;
    int a = g.add_node("a"), b = g.add_node("b"), c = g.add_node("c");
    g.add_flow(a, b, 5.0);
    g.add_flow(b, c, 25.0);
    g.add_flow(c, a, 10.0);
    normalize_flows(g);
    auto at = [&](int u, int v) { return *g.edge(u, v)->normalized; };
    bool ok = at(b, c) == 1.0 && at(a, b) == 0.0 && std::fabs(at(c, a) - 0.25) < 1e-15;
    add("scaling", ok, ok ? "edge extremes map to 1 and 0" : "normalized extremes wrong");
  }

  // Clustering coefficient: known triangle value, and equal weights must
  // reduce to the unweighted coefficient.
  {
    TransitGraph g;
    int a = g.add_node("a"), b = g.add_node("b"), c = g.add_node("c");
    g.add_flow(a, b, 1.0);
    g.add_flow(b, c, 1.0);
    g.add_flow(a, c, 0.125);
    double got = weighted_global_clustering(g);
    bool ok = got == 0.5;
    std::string note = ok ? "triangle case exact" : "triangle case differs";
    Rng rng(seed + 4);
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 3 + int(rng.below(10));
      int m = int(std::min<int64_t>(n + int64_t(rng.below(uint64_t(2 * n))),
                                    int64_t(n) * (n - 1)));
      auto edges = oracle::random_digraph(n, m, rng, false);
      for (auto& e : edges) e.weight = 3.0;
      auto h = graph_from_edge_list(n, edges);
      double w = weighted_global_clustering(h);
      for (auto& e : edges) e.weight = 1.0;
      double u = weighted_global_clustering(graph_from_edge_list(n, edges));
      if (std::fabs(w - u) > 1e-12) {
        ok = false;
        note = "equal weights disagree with unweighted on a " + std::to_string(n) +
               "-node instance";
      }
    }
    add("clustering", ok, note);
  }

  // Rank-sum test against direct enumeration of group assignments.
  {
    bool ok = true;
    std::string note;
    Rng rng(seed + 5);
    for (int na = 1; na <= 4 && ok; ++na)
      for (int nb = 1; nb <= 4 && ok; ++nb)
        for (int rep = 0; rep < 3 && ok; ++rep) {
          std::vector<double> xs, ys;
          for (int i = 0; i < na; ++i) xs.push_back(double(rng.below(5)));
          for (int i = 0; i < nb; ++i) ys.push_back(double(rng.below(5)));
          auto got = mann_whitney_u(xs, ys);
          double want = oracle::exact_mwu_p(xs, ys);
          if (!got.exact || std::fabs(got.p_two_sided - want) > 1e-12) {
            ok = false;
            note = "exact p differs at na=" + std::to_string(na) +
                   " nb=" + std::to_string(nb);
          }
        }
    add("ranksum", ok, ok ? "all small group sizes" : note);
  }

  // Hub removal must equal filtering those nodes out of the edge list.
  {
    Rng rng(seed + 6);
    bool ok = true;
    std::string note;
    for (int t = 0; t < rounds && ok; ++t) {
      int n = 12 + int(rng.below(10));
      int m = 2 * n + int(rng.below(uint64_t(2 * n)));
      auto edges = oracle::random_digraph(n, m, rng, true);
      auto g = graph_from_edge_list(n, edges);
      MetricOptions opt;
      auto rep = robustness_test(g, 5, opt);
      std::vector<bool> gone(size_t(n), false);
      for (const auto& label : rep.removed) gone[size_t(std::stoi(label))] = true;
      TransitGraph reduced;
      std::vector<int> map(size_t(n), -1);
      for (int i = 0; i < n; ++i)
        if (!gone[size_t(i)]) map[size_t(i)] = reduced.add_node(std::to_string(i));
      for (const auto& e : edges)
        if (!gone[size_t(e.src)] && !gone[size_t(e.dst)])
          reduced.add_flow(map[size_t(e.src)], map[size_t(e.dst)], e.weight);
      auto want = compute_indicators(reduced, opt);
      if (!(want == rep.after)) {
        ok = false;
        note = "reduced-network indicators differ on a " + std::to_string(n) +
               "-node instance";
      }
    }
    add("robustness", ok, ok ? std::to_string(rounds) + " random digraphs" : note);
  }

  return out;
}

inline bool print_self_checks(std::ostream& os, uint64_t seed = 2026, int rounds = 20) {
  auto checks = run_self_checks(seed, rounds);
  bool all = true;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.note << "\n";
    all = all && c.pass;
  }
  os << (all ? "all checks passed" : "CHECKS FAILED") << "\n";
  return all;
}

}  // namespace transit
