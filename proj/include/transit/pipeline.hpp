#pragma once

// End-to-end orchestration: a flat key=value config drives ingest, cleaning,
// clustering, cohort splitting, network construction, metrics, robustness,
// communities, temporal slices and rank tables, and every artifact lands in
// one output directory together with a digest manifest.  The CLI front-end is
// a thin wrapper over run_pipeline() and the per-stage helpers here.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "transit/cluster.hpp"
#include "transit/community.hpp"
#include "transit/core.hpp"
#include "transit/csv.hpp"
#include "transit/frequency.hpp"
#include "transit/geojson.hpp"
#include "transit/graph.hpp"
#include "transit/ingest.hpp"
#include "transit/metrics.hpp"
#include "transit/preprocess.hpp"
#include "transit/robustness.hpp"

namespace transit {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class RankWindow { all, morning, evening };

inline const char* rank_window_name(RankWindow w) {
  switch (w) {
    case RankWindow::all: return "all";
    case RankWindow::morning: return "morning";
    case RankWindow::evening: return "evening";
  }
  return "all";
}

// Everything a run needs, with defaults chosen so that a config file only has
// to name its inputs.  Paths are taken as written (relative paths resolve
// against the working directory of the caller).
struct PipelineConfig {
  std::string records;               // swipe record CSV
  std::string stations;              // station catalog CSV
  std::string output_dir = ".";
  char delimiter = ',';              // "comma" or "tab" in the file

  Date window_start = make_date(2018, 3, 1);
  int week_days = 7;                 // cohort window length; cleaning keeps two windows

  double max_speed_kmh = 120.0;
  int chain_gap_min = 60;
  int chain_max_hours = 6;
  bool require_min_legs = true;

  int k = 200;                       // station clusters
  uint64_t kmeans_seed = 1;
  int kmeans_max_iter = 100;
  double kmeans_tol = 1e-7;
  bool kmeans_plusplus = false;

  double quantile = 0.25;            // high-frequency share cap

  bool od_extremes = false;          // net edges from first/last leg instead of consecutive legs
  bool weighted_betweenness = true;
  bool weighted_closeness = false;
  bool invert_weights = false;
  double min_distance = 1e-9;
  int top_k = 10;                    // hub count for robustness ranking

  uint64_t louvain_seed = 1;
  double resolution = 1.0;

  int rank_r = 1000;                 // OD pairs ranked per cohort network
  RankWindow rankdiff_window = RankWindow::all;
  int morning_start = 6 * 3600;      // seconds of day
  int morning_end = 10 * 3600;
  int evening_start = 18 * 3600;
  int evening_end = 20 * 3600;
};

namespace detail {

inline std::string config_bool(bool b) { return b ? "true" : "false"; }

inline bool parse_config_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error(Errc::invalid_config, "expected true/false for " + key + ", got '" + v + "'");
}

inline int64_t parse_config_int(const std::string& v, const std::string& key) {
  int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(Errc::invalid_config, "expected integer for " + key + ", got '" + v + "'");
  return out;
}

inline double parse_config_double(const std::string& v, const std::string& key) {
  double out = 0.0;
  if (!parse_number(v, out))
    throw Error(Errc::invalid_config, "expected number for " + key + ", got '" + v + "'");
  return out;
}

// "HH:MM" -> seconds of day
inline int parse_config_time(const std::string& v, const std::string& key) {
  if (v.size() != 5 || v[2] != ':' || !std::isdigit((unsigned char)v[0]) ||
      !std::isdigit((unsigned char)v[1]) || !std::isdigit((unsigned char)v[3]) ||
      !std::isdigit((unsigned char)v[4]))
    throw Error(Errc::invalid_config, "expected HH:MM for " + key + ", got '" + v + "'");
  int h = (v[0] - '0') * 10 + (v[1] - '0');
  int m = (v[3] - '0') * 10 + (v[4] - '0');
  if (h > 24 || m > 59 || (h == 24 && m != 0))
    throw Error(Errc::invalid_config, "time of day out of range for " + key + ": '" + v + "'");
  return h * 3600 + m * 60;
}

inline std::string format_config_time(int secs) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", secs / 3600, (secs % 3600) / 60);
  return buf;
}

}  // namespace detail

// Accepts "key = value" lines, blank lines, and '#' comments.  Unknown keys
// are rejected so typos fail loudly instead of silently using a default.
inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::invalid_config,
                  "line " + std::to_string(line_no) + ": expected key = value");
    std::string key = csv::trim(line.substr(0, eq));
    std::string val = csv::trim(line.substr(eq + 1));
    using detail::parse_config_bool;
    using detail::parse_config_double;
    using detail::parse_config_int;
    using detail::parse_config_time;
    if (key == "records") cfg.records = val;
    else if (key == "stations") cfg.stations = val;
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "delimiter") {
      if (val == "comma") cfg.delimiter = ',';
      else if (val == "tab") cfg.delimiter = '\t';
      else throw Error(Errc::invalid_config, "delimiter must be comma or tab, got '" + val + "'");
    } else if (key == "window_start") {
      auto d = parse_date(val);
      if (!d) throw Error(Errc::invalid_config, "window_start: " + d.message());
      cfg.window_start = *d;
    }
    else if (key == "week_days") cfg.week_days = (int)parse_config_int(val, key);
    else if (key == "max_speed_kmh") cfg.max_speed_kmh = parse_config_double(val, key);
    else if (key == "chain_gap_min") cfg.chain_gap_min = (int)parse_config_int(val, key);
    else if (key == "chain_max_hours") cfg.chain_max_hours = (int)parse_config_int(val, key);
    else if (key == "require_min_legs") cfg.require_min_legs = parse_config_bool(val, key);
    else if (key == "k") cfg.k = (int)parse_config_int(val, key);
    else if (key == "kmeans_seed") cfg.kmeans_seed = (uint64_t)parse_config_int(val, key);
    else if (key == "kmeans_max_iter") cfg.kmeans_max_iter = (int)parse_config_int(val, key);
    else if (key == "kmeans_tol") cfg.kmeans_tol = parse_config_double(val, key);
    else if (key == "kmeans_plusplus") cfg.kmeans_plusplus = parse_config_bool(val, key);
    else if (key == "quantile") cfg.quantile = parse_config_double(val, key);
    else if (key == "od_extremes") cfg.od_extremes = parse_config_bool(val, key);
    else if (key == "weighted_betweenness") cfg.weighted_betweenness = parse_config_bool(val, key);
    else if (key == "weighted_closeness") cfg.weighted_closeness = parse_config_bool(val, key);
    else if (key == "invert_weights") cfg.invert_weights = parse_config_bool(val, key);
    else if (key == "min_distance") cfg.min_distance = parse_config_double(val, key);
    else if (key == "top_k") cfg.top_k = (int)parse_config_int(val, key);
    else if (key == "louvain_seed") cfg.louvain_seed = (uint64_t)parse_config_int(val, key);
    else if (key == "resolution") cfg.resolution = parse_config_double(val, key);
    else if (key == "rank_r") cfg.rank_r = (int)parse_config_int(val, key);
    else if (key == "rankdiff_window") {
      if (val == "all") cfg.rankdiff_window = RankWindow::all;
      else if (val == "morning") cfg.rankdiff_window = RankWindow::morning;
      else if (val == "evening") cfg.rankdiff_window = RankWindow::evening;
      else throw Error(Errc::invalid_config, "rankdiff_window must be all, morning, or evening");
    } else if (key == "morning_start") cfg.morning_start = parse_config_time(val, key);
    else if (key == "morning_end") cfg.morning_end = parse_config_time(val, key);
    else if (key == "evening_start") cfg.evening_start = parse_config_time(val, key);
    else if (key == "evening_end") cfg.evening_end = parse_config_time(val, key);
    else throw Error(Errc::invalid_config, "unknown key '" + key + "'");
  }
  if (cfg.week_days < 1) throw Error(Errc::invalid_config, "week_days must be positive");
  if (cfg.k < 1) throw Error(Errc::invalid_config, "k must be positive");
  if (cfg.quantile <= 0.0 || cfg.quantile >= 1.0)
    throw Error(Errc::invalid_config, "quantile must lie in (0, 1)");
  if (cfg.rank_r < 1) throw Error(Errc::invalid_config, "rank_r must be positive");
  if (cfg.top_k < 0) throw Error(Errc::invalid_config, "top_k must not be negative");
  if (cfg.chain_gap_min < 0 || cfg.chain_max_hours < 1)
    throw Error(Errc::invalid_config, "chain window settings out of range");
  if (cfg.morning_start >= cfg.morning_end || cfg.evening_start >= cfg.evening_end)
    throw Error(Errc::invalid_config, "peak windows must be non-empty");
  return cfg;
}

// Full key set, sorted, every value explicit.  Two runs of the same inputs
// serialize identically because output_dir is pinned to ".".
inline std::string serialize_config(const PipelineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["records"] = cfg.records;
  kv["stations"] = cfg.stations;
  kv["output_dir"] = ".";
  kv["delimiter"] = cfg.delimiter == '\t' ? "tab" : "comma";
  kv["window_start"] = format_date(cfg.window_start);
  kv["week_days"] = std::to_string(cfg.week_days);
  kv["max_speed_kmh"] = format_double(cfg.max_speed_kmh);
  kv["chain_gap_min"] = std::to_string(cfg.chain_gap_min);
  kv["chain_max_hours"] = std::to_string(cfg.chain_max_hours);
  kv["require_min_legs"] = detail::config_bool(cfg.require_min_legs);
  kv["k"] = std::to_string(cfg.k);
  kv["kmeans_seed"] = std::to_string(cfg.kmeans_seed);
  kv["kmeans_max_iter"] = std::to_string(cfg.kmeans_max_iter);
  kv["kmeans_tol"] = format_double(cfg.kmeans_tol);
  kv["kmeans_plusplus"] = detail::config_bool(cfg.kmeans_plusplus);
  kv["quantile"] = format_double(cfg.quantile);
  kv["od_extremes"] = detail::config_bool(cfg.od_extremes);
  kv["weighted_betweenness"] = detail::config_bool(cfg.weighted_betweenness);
  kv["weighted_closeness"] = detail::config_bool(cfg.weighted_closeness);
  kv["invert_weights"] = detail::config_bool(cfg.invert_weights);
  kv["min_distance"] = format_double(cfg.min_distance);
  kv["top_k"] = std::to_string(cfg.top_k);
  kv["louvain_seed"] = std::to_string(cfg.louvain_seed);
  kv["resolution"] = format_double(cfg.resolution);
  kv["rank_r"] = std::to_string(cfg.rank_r);
  kv["rankdiff_window"] = rank_window_name(cfg.rankdiff_window);
  kv["morning_start"] = detail::format_config_time(cfg.morning_start);
  kv["morning_end"] = detail::format_config_time(cfg.morning_end);
  kv["evening_start"] = detail::format_config_time(cfg.evening_start);
  kv["evening_end"] = detail::format_config_time(cfg.evening_end);
  std::string out;
  for (const auto& [key, val] : kv) {
    out += key;
    out += " = ";
    out += val;
    out += '\n';
  }
  return out;
}

inline PipelineConfig load_config(const std::string& path) {
  return parse_config(csv::read_file(path));
}

// ---------------------------------------------------------------------------
// Edge tables (the on-disk form of a network)
// ---------------------------------------------------------------------------

// Rows come out in natural label order, not internal id order, so the bytes
// are a pure function of the labeled edge set and re-importing an exported
// table reproduces it exactly.
inline std::string serialize_edge_table(const TransitGraph& g) {
  std::vector<std::pair<std::pair<int, int>, const EdgeData*>> rows;
  rows.reserve(g.edge_count());
  for (const auto& [key, data] : g.edges()) rows.push_back({key, &data});
  std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
    const auto& ao = g.label(a.first.first);
    const auto& bo = g.label(b.first.first);
    if (natural_less(ao, bo)) return true;
    if (natural_less(bo, ao)) return false;
    return natural_less(g.label(a.first.second), g.label(b.first.second));
  });
  csv::Writer w({"origin", "destination", "flow", "normalized_flow"});
  for (const auto& [key, data] : rows) {
    w.row({g.label(key.first), g.label(key.second), format_double(data->flow),
           data->normalized ? format_double(*data->normalized) : std::string()});
  }
  return w.str();
}

inline TransitGraph parse_edge_table(const std::string& text) {
  auto lines = csv::split_lines(text);
  if (lines.empty()) throw Error(Errc::empty_input, "edge table has no header");
  TransitGraph g;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = csv::split(lines[i], ',');
    if (cells.size() != 4)
      throw Error(Errc::malformed_row,
                  "edge table line " + std::to_string(i + 1) + ": expected 4 columns");
    EdgeData data;
    if (!detail::parse_number(cells[2], data.flow) || data.flow < 0)
      throw Error(Errc::malformed_row,
                  "edge table line " + std::to_string(i + 1) + ": bad flow '" + cells[2] + "'");
    if (!cells[3].empty()) {
      double norm = 0.0;
      if (!detail::parse_number(cells[3], norm))
        throw Error(Errc::malformed_row, "edge table line " + std::to_string(i + 1) +
                                             ": bad normalized flow '" + cells[3] + "'");
      data.normalized = norm;
    }
    // sequence the node registrations so ids follow file appearance order
    // (nested calls would leave the order up to the compiler)
    int src = g.add_node(cells[0]);
    int dst = g.add_node(cells[1]);
    g.set_edge(src, dst, data);
  }
  return g;
}

inline TransitGraph load_edge_table(const std::string& path) {
  return parse_edge_table(csv::read_file(path));
}

// ---------------------------------------------------------------------------
// OD rank comparison between two networks over the same node universe
// ---------------------------------------------------------------------------

struct RankDifferenceRow {
  std::string origin;
  std::string destination;
  std::optional<int> high_rank;   // 1-based; empty when the pair is outside the top R
  std::optional<int> low_rank;
  int difference = 0;             // low_rank - high_rank, with absentees pinned to +/-R

  bool operator==(const RankDifferenceRow&) const = default;
};

namespace detail {

// Top-R OD pairs by flow, rank 1 = heaviest.  Ties break on the (origin,
// destination) label pair so ranks never depend on container order.
inline std::vector<std::pair<std::pair<std::string, std::string>, int>> top_od_ranks(
    const TransitGraph& g, int r) {
  std::vector<std::pair<std::pair<std::string, std::string>, double>> rows;
  rows.reserve(g.edge_count());
  for (const auto& [key, data] : g.edges())
    rows.push_back({{g.label(key.first), g.label(key.second)}, data.flow});
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if ((int)rows.size() > r) rows.resize(r);
  std::vector<std::pair<std::pair<std::string, std::string>, int>> out;
  out.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out.push_back({rows[i].first, (int)i + 1});
  return out;
}

}  // namespace detail

// Compares the heaviest R OD pairs of two networks.  A pair present on one
// side only gets the sentinel difference -R (missing from low) or +R
// (missing from high); rows come back ordered by |difference| descending,
// then by OD label for stability.
inline std::vector<RankDifferenceRow> od_rank_difference(const TransitGraph& high,
                                                         const TransitGraph& low, int r = 1000) {
  if (r < 1) throw Error(Errc::invalid_config, "rank depth must be positive");
  auto hi = detail::top_od_ranks(high, r);
  auto lo = detail::top_od_ranks(low, r);
  std::map<std::pair<std::string, std::string>, RankDifferenceRow> rows;
  for (const auto& [od, rank] : hi) {
    auto& row = rows[od];
    row.origin = od.first;
    row.destination = od.second;
    row.high_rank = rank;
  }
  for (const auto& [od, rank] : lo) {
    auto& row = rows[od];
    row.origin = od.first;
    row.destination = od.second;
    row.low_rank = rank;
  }
  std::vector<RankDifferenceRow> out;
  out.reserve(rows.size());
  for (auto& [od, row] : rows) {
    if (row.high_rank && row.low_rank) row.difference = *row.low_rank - *row.high_rank;
    else if (row.high_rank) row.difference = -r;
    else row.difference = r;
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end(), [](const RankDifferenceRow& a, const RankDifferenceRow& b) {
    int da = std::abs(a.difference), db = std::abs(b.difference);
    if (da != db) return da > db;
    if (a.origin != b.origin) return a.origin < b.origin;
    return a.destination < b.destination;
  });
  return out;
}

inline std::string serialize_rank_difference(const std::vector<RankDifferenceRow>& rows) {
  csv::Writer w({"origin", "destination", "hf_rank", "lf_rank", "rank_difference"});
  for (const auto& r : rows) {
    w.row({r.origin, r.destination, r.high_rank ? std::to_string(*r.high_rank) : std::string(),
           r.low_rank ? std::to_string(*r.low_rank) : std::string(),
           std::to_string(r.difference)});
  }
  return w.str();
}

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string path;    // relative to the output directory
  std::string digest;  // 64-bit FNV-1a of the file bytes, hex
};

struct PipelineResult {
  std::vector<ManifestEntry> manifest;  // sorted by path, excludes manifest.csv itself
  CleaningReport report;
};

namespace detail {

class ArtifactSink {
 public:
  explicit ArtifactSink(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create output directory " + dir_);
  }

  void emit(const std::string& name, const std::string& content) {
    csv::write_file((std::filesystem::path(dir_) / name).string(), content);
    entries_.push_back({name, hex64(fnv1a64(content))});
  }

  // manifest.csv lists every other artifact; written last, not self-listed.
  std::vector<ManifestEntry> finish() {
    std::sort(entries_.begin(), entries_.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    csv::Writer w({"path", "digest"});
    for (const auto& e : entries_) w.row({e.path, e.digest});
    csv::write_file((std::filesystem::path(dir_) / "manifest.csv").string(), w.str());
    return entries_;
  }

 private:
  std::string dir_;
  std::vector<ManifestEntry> entries_;
};

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), name + ": " + e.message());
  }
}

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Cohort labels in fixed order: week number then frequency class.
struct CohortKey {
  int week = 1;           // 1 or 2
  bool high = true;
  std::string label() const {
    return std::string(week == 1 ? "01" : "02") + (high ? "high" : "low");
  }
};

inline std::vector<CohortKey> cohort_keys() {
  return {{1, true}, {1, false}, {2, true}, {2, false}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The full run
// ---------------------------------------------------------------------------

// Cutoff for partial runs: each stage emits its artifacts and the manifest
// covers whatever was produced. `full` runs everything.
enum class PipelineStage { ingest, clean, cluster, classify, build_net, full };

inline PipelineResult run_pipeline(const PipelineConfig& cfg,
                                   PipelineStage until = PipelineStage::full) {
  using detail::run_stage;

  detail::ArtifactSink sink(cfg.output_dir);
  sink.emit("resolved_config.txt", serialize_config(cfg));

  // --- ingest -------------------------------------------------------------
  auto catalog = run_stage("ingest", [&] {
    return load_station_catalog(csv::read_lines(cfg.stations));
  });
  auto parsed = run_stage("ingest", [&] {
    return parse_records(csv::read_lines(cfg.records), cfg.delimiter);
  });
  {
    csv::Writer w({"line", "message"});
    for (const auto& [line, msg] : parsed.errors) w.row({std::to_string(line), msg});
    sink.emit("ingest_errors.csv", w.str());
  }
  if (until == PipelineStage::ingest) {
    std::string out;
    for (const auto& r : parsed.records) out += serialize_record(r) + "\n";
    sink.emit("records_parsed.csv", out);
    PipelineResult r;
    r.report.input_records = parsed.records.size() + parsed.rejected;
    r.manifest = sink.finish();
    return r;
  }

  // --- clean --------------------------------------------------------------
  DateWindow clean_window{cfg.window_start,
                          Date{cfg.window_start.days + 2 * cfg.week_days}};
  FilterOptions fopt;
  fopt.window_start = clean_window.start;
  fopt.window_end = clean_window.end;
  fopt.max_speed_kmh = cfg.max_speed_kmh;
  fopt.catalog = &catalog;
  ChainOptions copt;
  copt.max_gap_secs = (int64_t)cfg.chain_gap_min * 60;
  copt.max_duration_secs = (int64_t)cfg.chain_max_hours * 3600;
  copt.require_min_legs = cfg.require_min_legs;
  auto cleaned = run_stage("clean", [&] { return clean_records(parsed.records, fopt, copt); });
  {
    std::string out;
    const auto& rep = cleaned.report;
    out += "input_records = " + std::to_string(rep.input_records) + "\n";
    out += "duplicates_removed = " + std::to_string(rep.duplicates_removed) + "\n";
    for (int i = 0; i < 4; ++i)
      out += std::string("removed_") + flaw_name((FlawReason)i) + " = " +
             std::to_string(rep.flawed_removed[i]) + "\n";
    out += "short_chain_records = " + std::to_string(rep.short_chain_records) + "\n";
    out += "records_in_chains = " + std::to_string(rep.records_in_chains) + "\n";
    out += "chains = " + std::to_string(cleaned.chains.size()) + "\n";
    out += std::string("conserved = ") + (rep.conserved() ? "true" : "false") + "\n";
    sink.emit("cleaning_report.txt", out);
  }
  {
    csv::Writer w({"reason", "passenger_id", "mode", "line", "station_seq", "station_name",
                   "time"});
    auto record_cells = [](const SmartCardRecord& r) {
      return std::vector<std::string>{r.passenger_id, mode_code(r.mode), r.line,
                                      std::to_string(r.station_seq), r.station_name,
                                      format_timestamp14(r.time)};
    };
    for (const auto& rec : cleaned.duplicates) {
      auto cells = record_cells(rec);
      cells.insert(cells.begin(), "duplicate");
      w.row(cells);
    }
    for (const auto& [rec, reason] : cleaned.rejects) {
      auto cells = record_cells(rec);
      cells.insert(cells.begin(), flaw_name(reason));
      w.row(cells);
    }
    sink.emit("rejects.csv", w.str());
  }
  {
    std::string out;
    for (const auto& chain : cleaned.chains) out += serialize_chain_row(chain) + "\n";
    sink.emit("chains.csv", out);
  }
  if (until == PipelineStage::clean) {
    PipelineResult r;
    r.report = cleaned.report;
    r.manifest = sink.finish();
    return r;
  }

  // --- cluster ------------------------------------------------------------
  std::vector<Point> points;
  points.reserve(catalog.stations.size());
  for (const auto& st : catalog.stations) points.push_back({st.lon, st.lat});
  auto km = run_stage("cluster", [&] {
    KMeansOptions kopt;
    kopt.max_iter = cfg.kmeans_max_iter;
    kopt.tol = cfg.kmeans_tol;
    kopt.plusplus_init = cfg.kmeans_plusplus;
    return kmeans_fit(points, cfg.k, cfg.kmeans_seed, kopt);
  });
  auto node_map = node_map_from_kmeans(km, cfg.k);
  {
    csv::Writer w({"node", "latitude", "longitude"});
    for (size_t c = 0; c < km.centroids.size(); ++c)
      w.row({std::to_string(c), format_double(km.centroids[c].y),
             format_double(km.centroids[c].x)});
    sink.emit("centroids.csv", w.str());
  }
  {
    csv::Writer w({"stop_id", "stop_name", "longitude", "latitude", "node"});
    for (size_t i = 0; i < catalog.stations.size(); ++i) {
      const auto& st = catalog.stations[i];
      w.row({std::to_string(st.id), st.name, format_double(st.lon), format_double(st.lat),
             std::to_string(km.assignment[i])});
    }
    sink.emit("assignment.csv", w.str());
  }
  std::unordered_map<int, int64_t> station_flows;
  for (const auto& chain : cleaned.chains)
    for (const auto& leg : chain.legs) {
      auto* st = catalog.find(leg.station_name);
      if (st) ++station_flows[st->id];
    }
  auto cluster_nodes =
      run_stage("cluster", [&] { return aggregate_nodes(catalog, node_map, station_flows); });
  {
    csv::Writer w({"node", "longitude", "latitude", "size", "total_flow"});
    for (const auto& cn : cluster_nodes)
      w.row({std::to_string(cn.node), format_double(cn.lon), format_double(cn.lat),
             std::to_string(cn.size), std::to_string(cn.total_flow)});
    sink.emit("cluster_nodes.csv", w.str());
  }
  std::unordered_map<int, std::pair<double, double>> cluster_pos;
  for (const auto& cn : cluster_nodes) cluster_pos[cn.node] = {cn.lon, cn.lat};
  sink.emit("stations.geojson", geojson::station_points(catalog).dump(2) + "\n");
  if (until == PipelineStage::cluster) {
    PipelineResult r;
    r.report = cleaned.report;
    r.manifest = sink.finish();
    return r;
  }

  // --- classify -----------------------------------------------------------
  DateWindow week1{cfg.window_start, Date{cfg.window_start.days + cfg.week_days}};
  DateWindow week2{week1.end, Date{week1.end.days + cfg.week_days}};
  struct WeekSplit {
    DateWindow window;
    FrequencySplit split;
    std::vector<TravelChain> chains;  // chains starting inside the window
  };
  std::vector<WeekSplit> weeks;
  for (int wk = 0; wk < 2; ++wk) {
    WeekSplit ws;
    ws.window = wk == 0 ? week1 : week2;
    auto counts = count_trips(cleaned.chains, ws.window);
    ws.split = run_stage("classify", [&] { return split_hf_lf(counts, cfg.quantile); });
    ws.chains = chains_in_window(cleaned.chains, ws.window);
    {
      csv::Writer w({"passenger_id", "trips"});
      for (const auto& [id, n] : counts) w.row({id, std::to_string(n)});
      sink.emit("trip_counts_week" + std::to_string(wk + 1) + ".csv", w.str());
    }
    {
      std::map<int, int> by_trips;
      for (const auto& [id, n] : counts) ++by_trips[n];
      int64_t total = (int64_t)counts.size(), seen = 0;
      csv::Writer w({"trips", "passengers", "cumulative_share"});
      for (auto it = by_trips.rbegin(); it != by_trips.rend(); ++it) {
        seen += it->second;
        w.row({std::to_string(it->first), std::to_string(it->second),
               format_double((double)seen / (double)total)});
      }
      sink.emit("freq_distribution_week" + std::to_string(wk + 1) + ".csv", w.str());
    }
    auto id_list = [](const std::vector<std::string>& ids) {
      std::string out;
      for (const auto& id : ids) out += id + "\n";
      return out;
    };
    sink.emit("hf_week" + std::to_string(wk + 1) + ".txt", id_list(ws.split.high));
    sink.emit("lf_week" + std::to_string(wk + 1) + ".txt", id_list(ws.split.low));
    weeks.push_back(std::move(ws));
  }
  {
    csv::Writer w({"week", "threshold", "quantile", "hf_count", "lf_count", "total"});
    for (int wk = 0; wk < 2; ++wk) {
      const auto& s = weeks[wk].split;
      w.row({std::to_string(wk + 1), std::to_string(s.threshold), format_double(s.quantile),
             std::to_string(s.high.size()), std::to_string(s.low.size()),
             std::to_string(s.high.size() + s.low.size())});
    }
    sink.emit("thresholds.csv", w.str());
  }
  if (until == PipelineStage::classify) {
    PipelineResult r;
    r.report = cleaned.report;
    r.manifest = sink.finish();
    return r;
  }

  // --- build-net ----------------------------------------------------------
  struct CohortNets {
    detail::CohortKey key;
    std::vector<TravelChain> chains;
    TransitGraph station_net;  // labels are station names
    TransitGraph cluster_net;  // labels are cluster ids
  };
  std::vector<CohortNets> cohorts;
  for (const auto& key : detail::cohort_keys()) {
    CohortNets c;
    c.key = key;
    const auto& ws = weeks[key.week - 1];
    c.chains = chains_of_passengers(ws.chains, key.high ? ws.split.high : ws.split.low);
    cohorts.push_back(std::move(c));
  }
  for (auto& c : cohorts) {
    run_stage("build-net", [&] {
      BuildOptions station_opt;
      station_opt.catalog = &catalog;
      station_opt.od_extremes = cfg.od_extremes;
      c.station_net = build_network(c.chains, station_opt);
      normalize_flows(c.station_net);
      BuildOptions cluster_opt;
      cluster_opt.catalog = &catalog;
      cluster_opt.node_map = &node_map;
      cluster_opt.od_extremes = cfg.od_extremes;
      c.cluster_net = build_network(c.chains, cluster_opt);
      normalize_flows(c.cluster_net);
      return 0;
    });
    sink.emit("net_" + c.key.label() + "_station_edges.csv", serialize_edge_table(c.station_net));
    sink.emit("net_" + c.key.label() + "_cluster_edges.csv", serialize_edge_table(c.cluster_net));
    std::vector<geojson::NodePosition> pos;
    for (int i = 0; i < (int)c.cluster_net.node_count(); ++i) {
      int cl = (int)std::stol(c.cluster_net.label(i));
      auto it = cluster_pos.find(cl);
      if (it == cluster_pos.end())
        throw Error(Errc::internal, "cluster " + std::to_string(cl) + " has no coordinates");
      pos.push_back({it->second.first, it->second.second});
    }
    sink.emit("net_" + c.key.label() + "_flows.geojson",
              geojson::flow_lines(c.cluster_net, pos).dump(2) + "\n");
  }
  if (until == PipelineStage::build_net) {
    PipelineResult r;
    r.report = cleaned.report;
    r.manifest = sink.finish();
    return r;
  }

  // --- metrics ------------------------------------------------------------
  MetricOptions mopt;
  mopt.weighted_betweenness = cfg.weighted_betweenness;
  mopt.weighted_closeness = cfg.weighted_closeness;
  mopt.invert_weights = cfg.invert_weights;
  mopt.min_distance = cfg.min_distance;
  struct CohortAnalysis {
    std::vector<NodeMetricsRow> rows;
    GraphIndicators indicators;
    CommunityPartition communities;
  };
  std::vector<CohortAnalysis> analyses(cohorts.size());
  for (size_t i = 0; i < cohorts.size(); ++i) {
    const auto& c = cohorts[i];
    auto& a = analyses[i];
    run_stage("metrics", [&] {
      a.rows = compute_node_metrics(c.cluster_net, mopt);
      a.indicators = compute_indicators(c.cluster_net, mopt);
      return 0;
    });
    csv::Writer w({"node", "degree", "betweenness", "closeness", "composite_z"});
    auto order = nodes_in_label_order(c.cluster_net);
    for (int node : order) {
      const auto& r = a.rows[node];
      w.row({c.cluster_net.label(node), std::to_string(r.degree), format_double(r.betweenness),
             format_double(r.closeness), format_double(r.composite_z)});
    }
    sink.emit("metrics_" + c.key.label() + ".csv", w.str());
  }
  {
    csv::Writer w({"network", "global_clustering", "scc_count", "avg_shortest_path",
                   "global_efficiency"});
    for (size_t i = 0; i < cohorts.size(); ++i) {
      const auto& ind = analyses[i].indicators;
      w.row({cohorts[i].key.label(), format_double(ind.global_clustering),
             std::to_string(ind.scc_count), detail::opt_cell(ind.avg_shortest_path),
             detail::opt_cell(ind.efficiency)});
    }
    sink.emit("indicators.csv", w.str());
  }
  {
    // Rank-sum comparison of the high and low cohorts on each node metric.
    csv::Writer w({"week", "metric", "u", "p_two_sided", "significant"});
    for (int wk = 1; wk <= 2; ++wk) {
      const CohortAnalysis* hi = nullptr;
      const CohortAnalysis* lo = nullptr;
      for (size_t i = 0; i < cohorts.size(); ++i) {
        if (cohorts[i].key.week != wk) continue;
        (cohorts[i].key.high ? hi : lo) = &analyses[i];
      }
      auto collect = [](const CohortAnalysis& a, int which) {
        std::vector<double> v;
        v.reserve(a.rows.size());
        for (const auto& r : a.rows)
          v.push_back(which == 0 ? (double)r.degree : which == 1 ? r.betweenness : r.closeness);
        return v;
      };
      const char* names[3] = {"degree", "betweenness", "closeness"};
      for (int m = 0; m < 3; ++m) {
        auto res = run_stage("metrics", [&] {
          return mann_whitney_u(collect(*hi, m), collect(*lo, m));
        });
        w.row({std::to_string(wk), names[m], format_double(res.u),
               format_double(res.p_two_sided), res.p_two_sided < 0.05 ? "true" : "false"});
      }
    }
    sink.emit("mwu.csv", w.str());
  }

  // --- robustness ---------------------------------------------------------
  {
    csv::Writer w({"network", "k", "strategy", "indicator", "before", "after", "delta",
                   "percent_change"});
    const char* ind_names[4] = {"global_clustering", "scc_count", "avg_shortest_path",
                                "global_efficiency"};
    for (size_t i = 0; i < cohorts.size(); ++i) {
      const auto& c = cohorts[i];
      auto rep = run_stage("robustness", [&] {
        return robustness_test(c.cluster_net, (size_t)cfg.top_k, mopt);
      });
      auto cell = [](const GraphIndicators& g, int which) -> std::optional<double> {
        switch (which) {
          case 0: return g.global_clustering;
          case 1: return (double)g.scc_count;
          case 2: return g.avg_shortest_path;
          default: return g.efficiency;
        }
      };
      const IndicatorDelta* deltas[4] = {&rep.clustering_delta, &rep.scc_delta, &rep.path_delta,
                                         &rep.efficiency_delta};
      for (int m = 0; m < 4; ++m) {
        w.row({c.key.label(), std::to_string(rep.k), strategy_name(rep.strategy), ind_names[m],
               detail::opt_cell(cell(rep.before, m)), detail::opt_cell(cell(rep.after, m)),
               detail::opt_cell(deltas[m]->delta), detail::opt_cell(deltas[m]->percent)});
      }
    }
    sink.emit("robustness.csv", w.str());
  }

  // --- community ----------------------------------------------------------
  {
    csv::Writer summary({"network", "community", "size", "average_degree", "modularity"});
    for (size_t i = 0; i < cohorts.size(); ++i) {
      const auto& c = cohorts[i];
      auto& a = analyses[i];
      a.communities = run_stage("community", [&] {
        return louvain(c.cluster_net, cfg.louvain_seed, cfg.resolution);
      });
      csv::Writer w({"node", "community"});
      auto order = nodes_in_label_order(c.cluster_net);
      for (int node : order)
        w.row({c.cluster_net.label(node), std::to_string(a.communities.assignment[node])});
      sink.emit("communities_" + c.key.label() + ".csv", w.str());
      for (const auto& row : community_metrics(c.cluster_net, a.communities))
        summary.row({c.key.label(), std::to_string(row.community), std::to_string(row.size),
                     format_double(row.average_degree), format_double(row.modularity)});
      std::vector<geojson::NodePosition> pos;
      for (int n = 0; n < (int)c.cluster_net.node_count(); ++n) {
        int cl = (int)std::stol(c.cluster_net.label(n));
        pos.push_back({cluster_pos[cl].first, cluster_pos[cl].second});
      }
      sink.emit("communities_" + c.key.label() + ".geojson",
                geojson::community_hulls(c.cluster_net, a.communities, pos).dump(2) + "\n");
    }
    sink.emit("community_summary.csv", summary.str());
  }

  // --- temporal -----------------------------------------------------------
  {
    std::vector<TimeSlotFlow> slots;
    for (const auto& c : cohorts)
      slots.push_back(run_stage("temporal", [&] {
        return bin_time_slots(c.chains, weeks[c.key.week - 1].window, true);
      }));
    csv::Writer counts({"time_slot", "01high", "01low", "02high", "02low"});
    csv::Writer norm({"time_slot", "01high", "01low", "02high", "02low"});
    for (int s = 0; s < kSlotCount; ++s) {
      std::vector<std::string> crow{slot_label(s)}, nrow{slot_label(s)};
      for (const auto& t : slots) {
        crow.push_back(std::to_string(t.counts[s]));
        nrow.push_back(t.normalized ? format_double((*t.normalized)[s]) : std::string());
      }
      counts.row(crow);
      norm.row(nrow);
    }
    sink.emit("slot_counts.csv", counts.str());
    sink.emit("slot_normalized.csv", norm.str());

    // Peak-window subnetworks: same indicator set on chains that start inside
    // the morning and evening windows.  Windows too thin to form a usable
    // network get empty cells instead of aborting the run.
    csv::Writer peak({"network", "window", "global_clustering", "scc_count",
                      "avg_shortest_path", "global_efficiency"});
    struct Win {
      const char* name;
      int begin, end;
    };
    Win wins[2] = {{"morning", cfg.morning_start, cfg.morning_end},
                   {"evening", cfg.evening_start, cfg.evening_end}};
    for (const auto& c : cohorts) {
      for (const auto& win : wins) {
        auto sub = chains_in_daywindow(c.chains, win.begin, win.end);
        std::vector<std::string> row{c.key.label(), win.name};
        if (sub.empty()) {
          row.insert(row.end(), {"", "", "", ""});
          peak.row(row);
          continue;
        }
        auto g = run_stage("temporal", [&] {
          BuildOptions opt;
          opt.catalog = &catalog;
          opt.node_map = &node_map;
          opt.od_extremes = cfg.od_extremes;
          auto net = build_network(sub, opt);
          try {
            normalize_flows(net);
          } catch (const Error& e) {
            if (e.code() != Errc::degenerate_flows && e.code() != Errc::empty_graph) throw;
          }
          return net;
        });
        if (g.edge_count() == 0) {
          row.insert(row.end(), {"", "", "", ""});
          peak.row(row);
          continue;
        }
        auto ind = run_stage("temporal", [&] { return compute_indicators(g, mopt); });
        row.push_back(format_double(ind.global_clustering));
        row.push_back(std::to_string(ind.scc_count));
        row.push_back(detail::opt_cell(ind.avg_shortest_path));
        row.push_back(detail::opt_cell(ind.efficiency));
        peak.row(row);
      }
    }
    sink.emit("peak_indicators.csv", peak.str());
  }

  // --- rankdiff -----------------------------------------------------------
  for (int wk = 1; wk <= 2; ++wk) {
    const CohortNets* hi = nullptr;
    const CohortNets* lo = nullptr;
    for (const auto& c : cohorts) {
      if (c.key.week != wk) continue;
      (c.key.high ? hi : lo) = &c;
    }
    auto station_net_for = [&](const CohortNets& c) {
      if (cfg.rankdiff_window == RankWindow::all) return c.station_net;
      int begin = cfg.rankdiff_window == RankWindow::morning ? cfg.morning_start
                                                             : cfg.evening_start;
      int end = cfg.rankdiff_window == RankWindow::morning ? cfg.morning_end : cfg.evening_end;
      BuildOptions opt;
      opt.catalog = &catalog;
      opt.od_extremes = cfg.od_extremes;
      return build_network(chains_in_daywindow(c.chains, begin, end), opt);
    };
    auto rows = run_stage("rankdiff", [&] {
      return od_rank_difference(station_net_for(*hi), station_net_for(*lo), cfg.rank_r);
    });
    sink.emit("rankdiff_week" + std::to_string(wk) + ".csv", serialize_rank_difference(rows));
  }

  PipelineResult result;
  result.report = cleaned.report;
  result.manifest = sink.finish();
  return result;
}

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
  auto lines = csv::read_lines(path);
  std::vector<ManifestEntry> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = csv::split(lines[i], ',');
    if (cells.size() != 2)
      throw Error(Errc::malformed_row, "manifest line " + std::to_string(i + 1));
    out.push_back({cells[0], cells[1]});
  }
  return out;
}

}  // namespace transit
