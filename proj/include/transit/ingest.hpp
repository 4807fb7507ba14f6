#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "transit/core.hpp"
#include "transit/csv.hpp"

namespace transit {

enum class Mode { subway, bus };

inline const char* mode_code(Mode m) { return m == Mode::subway ? "DT" : "GJ"; }

inline Expected<Mode> parse_mode(std::string_view s) {
  if (s == "DT") return Mode::subway;
  if (s == "GJ") return Mode::bus;
  return {Errc::unknown_mode, "unknown mode code '" + std::string(s) + "'"};
}

// One swipe of one card: who, where (mode/line/station), when.
struct SmartCardRecord {
  std::string passenger_id;
  Mode mode = Mode::subway;
  std::string line;
  int station_seq = 0;
  std::string station_name;
  DateTime time;

  friend bool operator==(const SmartCardRecord&, const SmartCardRecord&) = default;
};

namespace detail {
inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::string tmp(s);
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}
}  // namespace detail

// Record line layout: passenger_id,mode,line,station_seq,station_name,timestamp
// A trailing seventh column (operator remark in some exports) is tolerated and
// dropped.
inline Expected<SmartCardRecord> parse_record(std::string_view line, char delim = ',') {
  auto f = csv::split(line, delim);
  if (f.size() != 6 && f.size() != 7)
    return {Errc::malformed_row,
            "expected 6 columns, got " + std::to_string(f.size()) + " in '" + std::string(line) + "'"};
  SmartCardRecord r;
  r.passenger_id = csv::trim(f[0]);
  if (r.passenger_id.empty()) return {Errc::malformed_row, "empty passenger id"};
  auto mode = parse_mode(csv::trim(f[1]));
  if (!mode) return {mode.error(), mode.message()};
  r.mode = *mode;
  r.line = csv::trim(f[2]);
  if (r.line.empty()) return {Errc::malformed_row, "empty line field"};
  if (!detail::parse_int(csv::trim(f[3]), r.station_seq))
    return {Errc::malformed_row, "station sequence '" + f[3] + "' is not an integer"};
  r.station_name = csv::trim(f[4]);
  if (r.station_name.empty()) return {Errc::malformed_row, "empty station name"};
  auto t = parse_timestamp14(csv::trim(f[5]));
  if (!t) return {t.error(), t.message()};
  r.time = *t;
  return r;
}

inline std::string serialize_record(const SmartCardRecord& r, char delim = ',') {
  return csv::join({r.passenger_id, mode_code(r.mode), r.line, std::to_string(r.station_seq),
                    r.station_name, format_timestamp14(r.time)},
                   delim);
}

// Chain leg layout: mode,line,station_seq,station_name,timestamp.
// Some exports insert an extra numeric column between line and sequence
// (mode,line,extra,seq,name,time); those are accepted and flagged.
struct ChainLeg {
  Mode mode = Mode::subway;
  std::string line;
  int station_seq = 0;
  std::string station_name;
  DateTime time;
  bool had_extra_field = false;

  friend bool operator==(const ChainLeg& a, const ChainLeg& b) {
    return a.mode == b.mode && a.line == b.line && a.station_seq == b.station_seq &&
           a.station_name == b.station_name && a.time == b.time;
  }
};

inline Expected<ChainLeg> parse_chain_leg(std::string_view text) {
  auto f = csv::split(text, ',');
  if (f.size() != 5 && f.size() != 6)
    return {Errc::malformed_leg,
            "expected 5 fields, got " + std::to_string(f.size()) + " in '" + std::string(text) + "'"};
  ChainLeg leg;
  auto mode = parse_mode(csv::trim(f[0]));
  if (!mode) return {Errc::malformed_leg, mode.message()};
  leg.mode = *mode;
  leg.line = csv::trim(f[1]);
  if (leg.line.empty()) return {Errc::malformed_leg, "empty line field"};
  size_t seq_at = 2;
  if (f.size() == 6) {
    int extra = 0;
    if (!detail::parse_int(csv::trim(f[2]), extra))
      return {Errc::malformed_leg, "unexpected non-numeric extra field '" + f[2] + "'"};
    leg.had_extra_field = true;
    seq_at = 3;
  }
  if (!detail::parse_int(csv::trim(f[seq_at]), leg.station_seq))
    return {Errc::malformed_leg, "station sequence '" + f[seq_at] + "' is not an integer"};
  leg.station_name = csv::trim(f[seq_at + 1]);
  if (leg.station_name.empty()) return {Errc::malformed_leg, "empty station name"};
  auto t = parse_timestamp14(csv::trim(f[seq_at + 2]));
  if (!t) return {Errc::malformed_leg, t.message()};
  leg.time = *t;
  return leg;
}

inline std::string serialize_chain_leg(const ChainLeg& leg) {
  return csv::join({mode_code(leg.mode), leg.line, std::to_string(leg.station_seq),
                    leg.station_name, format_timestamp14(leg.time)});
}

// ---------------------------------------------------------------------------
// Station catalog: physical stop list with coordinates

struct Station {
  int id = 0;  // dense index, order of first appearance
  std::string name;
  double lon = 0.0;
  double lat = 0.0;
  std::string mode;  // optional free-form tag, may be empty

  friend bool operator==(const Station&, const Station&) = default;
};

struct StationCatalog {
  std::vector<Station> stations;
  std::unordered_map<std::string, int> by_name;  // first station with that name

  const Station* find(const std::string& name) const {
    auto it = by_name.find(name);
    return it == by_name.end() ? nullptr : &stations[size_t(it->second)];
  }
};

// Catalog line layout: name,lon,lat[,mode]. Exact duplicate rows (same name
// and coordinates) collapse to one station; same name at different
// coordinates is rejected because downstream mapping is by name.
inline StationCatalog load_station_catalog(const std::vector<std::string>& lines, char delim = ',') {
  StationCatalog cat;
  for (const auto& ln : lines) {
    auto f = csv::split(ln, delim);
    if (f.size() != 3 && f.size() != 4)
      fail(Errc::malformed_row, "station row needs name,lon,lat[,mode]: '" + ln + "'");
    Station s;
    s.name = csv::trim(f[0]);
    if (s.name.empty()) fail(Errc::malformed_row, "empty station name in '" + ln + "'");
    if (!detail::parse_number(csv::trim(f[1]), s.lon) || !detail::parse_number(csv::trim(f[2]), s.lat))
      fail(Errc::bad_coordinate, "non-numeric coordinate in '" + ln + "'");
    if (!(s.lon >= -180.0 && s.lon <= 180.0) || !(s.lat >= -90.0 && s.lat <= 90.0))
      fail(Errc::bad_coordinate, "coordinate out of range in '" + ln + "'");
    if (f.size() == 4) s.mode = csv::trim(f[3]);
    auto it = cat.by_name.find(s.name);
    if (it != cat.by_name.end()) {
      const Station& prev = cat.stations[size_t(it->second)];
      if (prev.lon == s.lon && prev.lat == s.lat) continue;  // exact duplicate row
      fail(Errc::bad_coordinate, "station '" + s.name + "' listed twice with different coordinates");
    }
    s.id = static_cast<int>(cat.stations.size());
    cat.by_name.emplace(s.name, s.id);
    cat.stations.push_back(std::move(s));
  }
  if (cat.stations.empty()) fail(Errc::empty_input, "station catalog has no rows");
  return cat;
}

// Parse outcome for a whole record file: kept rows plus rejection tallies.
struct IngestResult {
  std::vector<SmartCardRecord> records;
  size_t rejected = 0;
  std::vector<std::pair<size_t, std::string>> errors;  // line number (1-based), message
};

inline IngestResult parse_records(const std::vector<std::string>& lines, char delim = ',',
                                  size_t max_errors_kept = 100) {
  IngestResult out;
  out.records.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    auto rec = parse_record(lines[i], delim);
    if (rec) {
      out.records.push_back(std::move(*rec));
    } else {
      ++out.rejected;
      if (out.errors.size() < max_errors_kept) out.errors.emplace_back(i + 1, rec.message());
    }
  }
  return out;
}

}  // namespace transit
