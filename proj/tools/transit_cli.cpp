// Command-line front end. Stage commands (ingest, clean, cluster, classify,
// build-net, report) run the configured pipeline up to a cutoff; the analysis
// commands (metrics, robustness, community, rankdiff) work on any edge table
// produced by build-net, temporal works on an exported chain file, generate
// fabricates a synthetic input pair, and verify runs the built-in
// oracle cross-checks.
//
// Exit codes: 0 success, 1 usage error, 2 bad data or configuration,
// 3 internal fault or failed verification.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "transit/pipeline.hpp"
#include "transit/synth.hpp"
#include "transit/verify.hpp"

namespace {

struct StageCmd {
  std::string config_path;
  std::string out_dir;
};

void add_stage(CLI::App& app, const std::string& name, const std::string& desc, StageCmd& cmd,
               transit::PipelineStage stage, transit::PipelineStage* chosen,
               StageCmd** chosen_cmd) {
  auto* sub = app.add_subcommand(name, desc);
  sub->add_option("-c,--config", cmd.config_path, "pipeline config file")->required();
  sub->add_option("-o,--out", cmd.out_dir, "output directory (overrides config)");
  sub->callback([&cmd, stage, chosen, chosen_cmd] {
    *chosen = stage;
    *chosen_cmd = &cmd;
  });
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fputs(content.c_str(), stdout);
  } else {
    transit::csv::write_file(path, content);
  }
}

void metric_flags(CLI::App* sub, bool& unweighted_b, bool& weighted_c, bool& invert) {
  sub->add_flag("--unweighted-betweenness", unweighted_b,
                "hop-count shortest paths for betweenness");
  sub->add_flag("--weighted-closeness", weighted_c, "flow-weighted distances for closeness");
  sub->add_flag("--invert-weights", invert, "use 1/flow as edge distance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smart-card travel network toolkit"};
  app.require_subcommand(1);

  transit::PipelineStage stage_choice = transit::PipelineStage::full;
  StageCmd* stage_cmd = nullptr;
  StageCmd ingest_cmd, clean_cmd, cluster_cmd, classify_cmd, buildnet_cmd, report_cmd;
  add_stage(app, "ingest", "parse raw records and report rejects", ingest_cmd,
            transit::PipelineStage::ingest, &stage_choice, &stage_cmd);
  add_stage(app, "clean", "deduplicate, filter, and assemble travel chains", clean_cmd,
            transit::PipelineStage::clean, &stage_choice, &stage_cmd);
  add_stage(app, "cluster", "group stations into network nodes", cluster_cmd,
            transit::PipelineStage::cluster, &stage_choice, &stage_cmd);
  add_stage(app, "classify", "split passengers into high and low frequency cohorts",
            classify_cmd, transit::PipelineStage::classify, &stage_choice, &stage_cmd);
  add_stage(app, "build-net", "build station and cluster level flow networks", buildnet_cmd,
            transit::PipelineStage::build_net, &stage_choice, &stage_cmd);
  add_stage(app, "report", "run the full pipeline and write every artifact", report_cmd,
            transit::PipelineStage::full, &stage_choice, &stage_cmd);

  // metrics ------------------------------------------------------------
  auto* metrics_sub = app.add_subcommand("metrics", "node metrics and whole-graph indicators");
  std::string metrics_edges, metrics_out;
  bool m_unw_b = false, m_w_c = false, m_inv = false, m_indicators = false;
  metrics_sub->add_option("-e,--edges", metrics_edges, "edge table CSV")->required();
  metrics_sub->add_option("-o,--out", metrics_out, "output CSV ('-' for stdout)");
  metrics_sub->add_flag("--indicators", m_indicators,
                        "emit whole-graph indicators instead of per-node metrics");
  metric_flags(metrics_sub, m_unw_b, m_w_c, m_inv);

  // robustness -----------------------------------------------------------
  auto* rob_sub = app.add_subcommand("robustness", "indicator change after removing top nodes");
  std::string rob_edges, rob_out, rob_strategy = "composite", rob_ks = "10";
  uint64_t rob_seed = 0;
  bool r_unw_b = false, r_w_c = false, r_inv = false;
  rob_sub->add_option("-e,--edges", rob_edges, "edge table CSV")->required();
  rob_sub->add_option("-k,--remove", rob_ks, "comma-separated removal depths");
  rob_sub->add_option("--strategy", rob_strategy, "composite, degree, or random")
      ->check(CLI::IsMember({"composite", "degree", "random"}));
  rob_sub->add_option("--seed", rob_seed, "seed for the random strategy");
  rob_sub->add_option("-o,--out", rob_out, "output CSV ('-' for stdout)");
  metric_flags(rob_sub, r_unw_b, r_w_c, r_inv);

  // community ------------------------------------------------------------
  auto* com_sub = app.add_subcommand("community", "community detection on an edge table");
  std::string com_edges, com_out, com_summary;
  uint64_t com_seed = 1;
  double com_res = 1.0;
  com_sub->add_option("-e,--edges", com_edges, "edge table CSV")->required();
  com_sub->add_option("--seed", com_seed, "seed for the local-move order");
  com_sub->add_option("--resolution", com_res, "resolution parameter");
  com_sub->add_option("-o,--out", com_out, "node,community CSV ('-' for stdout)");
  com_sub->add_option("--summary", com_summary, "per-community summary CSV");

  // temporal -------------------------------------------------------------
  auto* tmp_sub = app.add_subcommand("temporal", "two-hour slot counts for exported chains");
  std::string tmp_chains, tmp_out, tmp_start = "2018-03-01";
  int tmp_days = 7;
  bool tmp_norm = false;
  tmp_sub->add_option("--chains", tmp_chains, "chain file from the clean stage")->required();
  tmp_sub->add_option("--window-start", tmp_start, "first day, YYYY-MM-DD");
  tmp_sub->add_option("--days", tmp_days, "window length in days");
  tmp_sub->add_flag("--normalize", tmp_norm, "also z-score the slot series");
  tmp_sub->add_option("-o,--out", tmp_out, "output CSV ('-' for stdout)");

  // rankdiff -------------------------------------------------------------
  auto* rank_sub = app.add_subcommand("rankdiff", "compare top OD pairs of two networks");
  std::string rank_high, rank_low, rank_out;
  int rank_r = 1000;
  rank_sub->add_option("--high", rank_high, "edge table of the first network")->required();
  rank_sub->add_option("--low", rank_low, "edge table of the second network")->required();
  rank_sub->add_option("-r,--depth", rank_r, "how many top pairs to rank");
  rank_sub->add_option("-o,--out", rank_out, "output CSV ('-' for stdout)");

  // generate -------------------------------------------------------------
  auto* gen_sub = app.add_subcommand("generate", "fabricate a synthetic record and station pair");
  std::string gen_dir = ".", gen_start = "2018-03-01";
  transit::SynthConfig gen_cfg;
  gen_sub->add_option("-o,--out", gen_dir, "output directory");
  gen_sub->add_option("--stations", gen_cfg.n_stations, "station count");
  gen_sub->add_option("--passengers", gen_cfg.n_passengers, "passenger count");
  gen_sub->add_option("--days", gen_cfg.days, "days of data");
  gen_sub->add_option("--start", gen_start, "first day, YYYY-MM-DD");
  gen_sub->add_option("--hf-fraction", gen_cfg.hf_fraction, "share of frequent passengers");
  gen_sub->add_option("--seed", gen_cfg.seed, "generator seed");
  gen_sub->add_option("--geo-clusters", gen_cfg.geo_clusters, "station blob count");

  // verify ---------------------------------------------------------------
  auto* verify_sub = app.add_subcommand("verify", "cross-check numerics against references");
  uint64_t verify_seed = 2026;
  int verify_rounds = 20;
  verify_sub->add_option("--seed", verify_seed, "instance seed");
  verify_sub->add_option("--rounds", verify_rounds, "random instances per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // collapse the library's assorted parse-error codes onto the documented
    // "1 = usage error" (help and version requests still exit 0)
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (stage_cmd) {
      auto cfg = transit::load_config(stage_cmd->config_path);
      if (!stage_cmd->out_dir.empty()) cfg.output_dir = stage_cmd->out_dir;
      auto result = transit::run_pipeline(cfg, stage_choice);
      std::printf("wrote %zu artifacts to %s\n", result.manifest.size() + 1,
                  cfg.output_dir.c_str());
      return 0;
    }

    if (*metrics_sub) {
      auto g = transit::load_edge_table(metrics_edges);
      transit::MetricOptions opt;
      opt.weighted_betweenness = !m_unw_b;
      opt.weighted_closeness = m_w_c;
      opt.invert_weights = m_inv;
      if (m_indicators) {
        auto ind = transit::compute_indicators(g, opt);
        transit::csv::Writer w(
            {"global_clustering", "scc_count", "avg_shortest_path", "global_efficiency"});
        w.row({transit::format_double(ind.global_clustering), std::to_string(ind.scc_count),
               ind.avg_shortest_path ? transit::format_double(*ind.avg_shortest_path) : "",
               ind.efficiency ? transit::format_double(*ind.efficiency) : ""});
        write_or_print(metrics_out, w.str());
        return 0;
      }
      auto rows = transit::compute_node_metrics(g, opt);
      transit::csv::Writer w({"node", "degree", "betweenness", "closeness", "composite_z"});
      for (int node : transit::nodes_in_label_order(g)) {
        const auto& r = rows[size_t(node)];
        w.row({g.label(node), std::to_string(r.degree), transit::format_double(r.betweenness),
               transit::format_double(r.closeness), transit::format_double(r.composite_z)});
      }
      write_or_print(metrics_out, w.str());
      return 0;
    }

    if (*rob_sub) {
      auto g = transit::load_edge_table(rob_edges);
      transit::MetricOptions opt;
      opt.weighted_betweenness = !r_unw_b;
      opt.weighted_closeness = r_w_c;
      opt.invert_weights = r_inv;
      std::vector<size_t> ks;
      for (const auto& cell : transit::csv::split(rob_ks, ',')) {
        auto v = transit::detail::parse_config_int(cell, "remove");
        if (v < 0) throw transit::Error(transit::Errc::invalid_config, "negative removal depth");
        ks.push_back(size_t(v));
      }
      transit::RemovalStrategy strat = rob_strategy == "degree"
                                           ? transit::RemovalStrategy::degree
                                           : rob_strategy == "random"
                                                 ? transit::RemovalStrategy::random
                                                 : transit::RemovalStrategy::composite;
      auto reports = transit::removal_sweep(g, ks, strat, rob_seed, opt);
      transit::csv::Writer w({"k", "strategy", "indicator", "before", "after", "delta",
                              "percent_change"});
      const char* names[4] = {"global_clustering", "scc_count", "avg_shortest_path",
                              "global_efficiency"};
      for (const auto& rep : reports) {
        auto cell = [](const transit::GraphIndicators& gi, int which) -> std::optional<double> {
          switch (which) {
            case 0: return gi.global_clustering;
            case 1: return double(gi.scc_count);
            case 2: return gi.avg_shortest_path;
            default: return gi.efficiency;
          }
        };
        const transit::IndicatorDelta* deltas[4] = {&rep.clustering_delta, &rep.scc_delta,
                                                    &rep.path_delta, &rep.efficiency_delta};
        auto opt_cell = [](const std::optional<double>& v) {
          return v ? transit::format_double(*v) : std::string();
        };
        for (int m = 0; m < 4; ++m)
          w.row({std::to_string(rep.k), transit::strategy_name(rep.strategy), names[m],
                 opt_cell(cell(rep.before, m)), opt_cell(cell(rep.after, m)),
                 opt_cell(deltas[m]->delta), opt_cell(deltas[m]->percent)});
      }
      write_or_print(rob_out, w.str());
      return 0;
    }

    if (*com_sub) {
      auto g = transit::load_edge_table(com_edges);
      auto part = transit::louvain(g, com_seed, com_res);
      transit::csv::Writer w({"node", "community"});
      for (int node : transit::nodes_in_label_order(g))
        w.row({g.label(node), std::to_string(part.assignment[size_t(node)])});
      write_or_print(com_out, w.str());
      if (!com_summary.empty()) {
        transit::csv::Writer s({"community", "size", "average_degree", "modularity"});
        for (const auto& row : transit::community_metrics(g, part))
          s.row({std::to_string(row.community), std::to_string(row.size),
                 transit::format_double(row.average_degree),
                 transit::format_double(row.modularity)});
        write_or_print(com_summary, s.str());
      }
      return 0;
    }

    if (*tmp_sub) {
      std::vector<transit::TravelChain> chains;
      for (const auto& line : transit::csv::read_lines(tmp_chains))
        chains.push_back(transit::parse_chain_row(line).unwrap());
      transit::Date start = transit::parse_date(tmp_start).unwrap();
      if (tmp_days < 1)
        throw transit::Error(transit::Errc::invalid_config, "days must be positive");
      transit::DateWindow window{start, transit::Date{start.days + tmp_days}};
      auto slots = transit::bin_time_slots(chains, window, tmp_norm);
      transit::csv::Writer w(tmp_norm
                                 ? std::vector<std::string>{"time_slot", "trips", "normalized"}
                                 : std::vector<std::string>{"time_slot", "trips"});
      for (int s = 0; s < transit::kSlotCount; ++s) {
        std::vector<std::string> row{transit::slot_label(s), std::to_string(slots.counts[s])};
        if (tmp_norm) row.push_back(transit::format_double((*slots.normalized)[s]));
        w.row(row);
      }
      write_or_print(tmp_out, w.str());
      return 0;
    }

    if (*rank_sub) {
      auto high = transit::load_edge_table(rank_high);
      auto low = transit::load_edge_table(rank_low);
      auto rows = transit::od_rank_difference(high, low, rank_r);
      write_or_print(rank_out, transit::serialize_rank_difference(rows));
      return 0;
    }

    if (*gen_sub) {
      gen_cfg.start_date = transit::parse_date(gen_start).unwrap();
      auto out = transit::generate(gen_cfg);
      std::error_code ec;
      std::filesystem::create_directories(gen_dir, ec);
      if (ec)
        throw transit::Error(transit::Errc::io_error, "cannot create directory " + gen_dir);
      auto join_rows = [](const std::vector<std::string>& rows) {
        std::string s;
        for (const auto& r : rows) {
          s += r;
          s += '\n';
        }
        return s;
      };
      namespace fs = std::filesystem;
      transit::csv::write_file((fs::path(gen_dir) / "stations.csv").string(),
                               join_rows(out.station_rows));
      transit::csv::write_file((fs::path(gen_dir) / "records.csv").string(),
                               join_rows(out.record_rows));
      transit::csv::write_file((fs::path(gen_dir) / "hf_ids.txt").string(),
                               join_rows(out.hf_ids));
      std::printf("wrote %zu stations, %zu records to %s\n", out.station_rows.size(),
                  out.record_rows.size(), gen_dir.c_str());
      return 0;
    }

    if (*verify_sub) {
      bool ok = transit::print_self_checks(std::cout, verify_seed, verify_rounds);
      return ok ? 0 : 3;
    }
  } catch (const transit::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == transit::Errc::internal ? 3 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 3;
  }

  return 0;
}
