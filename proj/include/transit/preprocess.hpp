#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "transit/core.hpp"
#include "transit/ingest.hpp"

namespace transit {

// ---------------------------------------------------------------------------
// Deduplication: exact duplicate swipes (all six fields equal) keep their
// first occurrence. Afterwards records are sorted by (passenger, time); the
// sort is stable so equal-time records keep input order for the later
// duplicate-timestamp filter.

namespace detail {
inline std::string record_key(const SmartCardRecord& r) {
  std::string k = r.passenger_id;
  k += '\x1f';
  k += mode_code(r.mode);
  k += '\x1f';
  k += r.line;
  k += '\x1f';
  k += std::to_string(r.station_seq);
  k += '\x1f';
  k += r.station_name;
  k += '\x1f';
  k += std::to_string(r.time.secs);
  return k;
}
}  // namespace detail

struct DedupResult {
  std::vector<SmartCardRecord> records;
  size_t duplicates_removed = 0;
  std::vector<SmartCardRecord> duplicates;  // the dropped copies, input order
};

inline DedupResult deduplicate(std::vector<SmartCardRecord> records) {
  DedupResult out;
  std::unordered_set<std::string> seen;
  seen.reserve(records.size() * 2);
  out.records.reserve(records.size());
  for (auto& r : records) {
    if (seen.insert(detail::record_key(r)).second) {
      out.records.push_back(std::move(r));
    } else {
      ++out.duplicates_removed;
      out.duplicates.push_back(std::move(r));
    }
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const SmartCardRecord& a, const SmartCardRecord& b) {
                     if (a.passenger_id != b.passenger_id) return a.passenger_id < b.passenger_id;
                     return a.time < b.time;
                   });
  return out;
}

// ---------------------------------------------------------------------------
// Flaw filtering. Each rejected record carries exactly one reason; checks run
// in the order below and the first hit wins.

enum class FlawReason {
  out_of_window,
  negative_seq,
  duplicate_timestamp,
  implausible_speed,
};

inline const char* flaw_name(FlawReason r) {
  switch (r) {
    case FlawReason::out_of_window: return "out_of_window";
    case FlawReason::negative_seq: return "negative_seq";
    case FlawReason::duplicate_timestamp: return "duplicate_timestamp";
    case FlawReason::implausible_speed: return "implausible_speed";
  }
  return "unknown";
}

struct FilterOptions {
  Date window_start{0};
  Date window_end{0};      // exclusive; window disabled when start == end
  double max_speed_kmh = 120.0;
  const StationCatalog* catalog = nullptr;  // needed for the speed check
};

struct FilterResult {
  std::vector<SmartCardRecord> records;
  size_t removed[4] = {0, 0, 0, 0};  // indexed by FlawReason
  std::vector<std::pair<SmartCardRecord, FlawReason>> rejects;  // input order

  size_t total_removed() const { return removed[0] + removed[1] + removed[2] + removed[3]; }
};

// Input must be deduplicated and (passenger, time)-sorted. For pairwise checks
// (duplicate timestamp, speed) the later record of the offending pair is the
// one rejected; the survivor then pairs with the next record.
inline FilterResult filter_flawed(const std::vector<SmartCardRecord>& records,
                                  const FilterOptions& opt) {
  FilterResult out;
  out.records.reserve(records.size());
  const SmartCardRecord* prev_kept = nullptr;
  std::string prev_passenger;
  bool window_active = opt.window_start < opt.window_end;
  auto reject = [&](const SmartCardRecord& r, FlawReason why) {
    ++out.removed[int(why)];
    out.rejects.emplace_back(r, why);
  };
  for (const auto& r : records) {
    if (r.passenger_id != prev_passenger) {
      prev_passenger = r.passenger_id;
      prev_kept = nullptr;
    }
    if (window_active && (r.time.date() < opt.window_start || !(r.time.date() < opt.window_end))) {
      reject(r, FlawReason::out_of_window);
      continue;
    }
    if (r.station_seq < 0) {
      reject(r, FlawReason::negative_seq);
      continue;
    }
    if (prev_kept && r.time == prev_kept->time) {
      reject(r, FlawReason::duplicate_timestamp);
      continue;
    }
    if (prev_kept && opt.catalog) {
      const Station* a = opt.catalog->find(prev_kept->station_name);
      const Station* b = opt.catalog->find(r.station_name);
      if (a && b && a->id != b->id) {
        double km = haversine_km(a->lon, a->lat, b->lon, b->lat);
        double hours = double(r.time.secs - prev_kept->time.secs) / 3600.0;
        if (hours > 0.0 && km / hours > opt.max_speed_kmh) {
          reject(r, FlawReason::implausible_speed);
          continue;
        }
      }
    }
    out.records.push_back(r);
    prev_kept = &out.records.back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Travel chains: a passenger's consecutive swipes grouped into trips.

struct TravelChain {
  std::string passenger_id;
  std::vector<ChainLeg> legs;  // strictly increasing in time

  DateTime start() const { return legs.front().time; }
  DateTime finish() const { return legs.back().time; }
};

struct ChainOptions {
  int64_t max_gap_secs = 60 * 60;       // a longer pause starts a new trip
  int64_t max_duration_secs = 6 * 3600; // a trip never spans more than this
  bool require_min_legs = true;         // drop one-swipe "trips"
};

struct ChainResult {
  std::vector<TravelChain> chains;
  size_t records_in_chains = 0;
  size_t records_dropped_short = 0;  // records inside dropped one-leg chains
};

inline ChainLeg leg_from_record(const SmartCardRecord& r) {
  ChainLeg leg;
  leg.mode = r.mode;
  leg.line = r.line;
  leg.station_seq = r.station_seq;
  leg.station_name = r.station_name;
  leg.time = r.time;
  return leg;
}

// Input must be (passenger, time)-sorted with strictly increasing times per
// passenger (filter_flawed guarantees this).
inline ChainResult assemble_chains(const std::vector<SmartCardRecord>& records,
                                   const ChainOptions& opt = {}) {
  ChainResult out;
  TravelChain cur;
  auto flush = [&] {
    if (cur.legs.empty()) return;
    if (opt.require_min_legs && cur.legs.size() < 2) {
      out.records_dropped_short += cur.legs.size();
    } else {
      out.records_in_chains += cur.legs.size();
      out.chains.push_back(std::move(cur));
    }
    cur = TravelChain{};
  };
  for (const auto& r : records) {
    bool fresh = cur.legs.empty() || cur.passenger_id != r.passenger_id ||
                 r.time.secs - cur.legs.back().time.secs > opt.max_gap_secs ||
                 r.time.secs - cur.legs.front().time.secs > opt.max_duration_secs;
    if (fresh) flush();
    if (cur.legs.empty()) cur.passenger_id = r.passenger_id;
    cur.legs.push_back(leg_from_record(r));
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end cleaning with a conservation report: every input record is
// accounted for in exactly one output bucket.

struct CleaningReport {
  size_t input_records = 0;
  size_t duplicates_removed = 0;
  size_t flawed_removed[4] = {0, 0, 0, 0};
  size_t short_chain_records = 0;
  size_t records_in_chains = 0;

  size_t accounted() const {
    size_t s = duplicates_removed + short_chain_records + records_in_chains;
    for (size_t v : flawed_removed) s += v;
    return s;
  }
  bool conserved() const { return accounted() == input_records; }
};

struct CleanOutput {
  std::vector<TravelChain> chains;
  CleaningReport report;
  std::vector<SmartCardRecord> duplicates;
  std::vector<std::pair<SmartCardRecord, FlawReason>> rejects;
};

inline CleanOutput clean_records(std::vector<SmartCardRecord> records, const FilterOptions& fopt,
                                 const ChainOptions& copt = {}) {
  CleanOutput out;
  out.report.input_records = records.size();
  auto dedup = deduplicate(std::move(records));
  out.report.duplicates_removed = dedup.duplicates_removed;
  out.duplicates = std::move(dedup.duplicates);
  auto filtered = filter_flawed(dedup.records, fopt);
  for (int i = 0; i < 4; ++i) out.report.flawed_removed[i] = filtered.removed[i];
  out.rejects = std::move(filtered.rejects);
  auto chains = assemble_chains(filtered.records, copt);
  out.report.short_chain_records = chains.records_dropped_short;
  out.report.records_in_chains = chains.records_in_chains;
  out.chains = std::move(chains.chains);
  if (!out.report.conserved()) fail(Errc::internal, "cleaning report lost records");
  return out;
}

// ---------------------------------------------------------------------------
// Chain (de)serialization: one row per chain, passenger id followed by one
// quoted cell per leg.

inline std::string serialize_chain_row(const TravelChain& c) {
  std::vector<std::string> fields;
  fields.reserve(c.legs.size() + 1);
  fields.push_back(c.passenger_id);
  for (const auto& leg : c.legs) fields.push_back(serialize_chain_leg(leg));
  return csv::join(fields);
}

inline Expected<TravelChain> parse_chain_row(std::string_view row) {
  auto f = csv::split(row, ',');
  if (f.size() < 2) return {Errc::malformed_row, "chain row needs passenger id and legs"};
  TravelChain c;
  c.passenger_id = csv::trim(f[0]);
  if (c.passenger_id.empty()) return {Errc::malformed_row, "empty passenger id in chain row"};
  for (size_t i = 1; i < f.size(); ++i) {
    auto leg = parse_chain_leg(f[i]);
    if (!leg) return {leg.error(), leg.message()};
    if (!c.legs.empty() && !(c.legs.back().time < leg->time))
      return {Errc::malformed_row, "chain legs not strictly increasing in time"};
    c.legs.push_back(std::move(*leg));
  }
  return c;
}

}  // namespace transit
