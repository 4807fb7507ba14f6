#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "transit/core.hpp"
#include "transit/csv.hpp"

namespace transit {

// Synthetic smart-card data with controllable structure: clustered station
// geography, a designated high-frequency passenger share with a guaranteed
// weekly trip floor, and a bimodal time-of-day profile driven by configurable
// peak windows. Output rows use the exact file formats the ingest stage
// consumes. Generation is a pure function of the config.

struct PeakWindow {
  int begin_sec = 0;
  int end_sec = 0;  // exclusive, both within [0, 86400]
  double multiplier = 1.0;
};

struct SynthConfig {
  int n_stations = 200;
  int n_passengers = 1000;
  int days = 14;
  Date start_date = make_date(2018, 3, 1);
  double hf_fraction = 0.25;
  std::vector<PeakWindow> peaks = {{6 * 3600, 10 * 3600, 8.0}, {18 * 3600, 20 * 3600, 6.0}};
  uint64_t seed = 1;
  // spatial layout: stations drawn from a ring of Gaussian blobs
  int geo_clusters = 8;
  double geo_spread_deg = 0.03;
  // trip shape
  double third_trip_prob = 0.2;  // HF passengers sometimes add a third trip
  int lf_max_days = 5;           // LF passengers travel 1..lf_max_days days per week
  double three_leg_prob = 0.2;   // otherwise two legs
};

struct SynthOutput {
  std::vector<std::string> station_rows;  // name,lon,lat,mode
  std::vector<std::string> record_rows;   // full smart-card rows
  std::vector<std::string> hf_ids;        // designated high-frequency passengers, sorted
};

namespace detail {
inline void validate(const SynthConfig& c) {
  if (c.n_stations < 4 || c.n_passengers < 1 || c.days < 1 || c.geo_clusters < 1)
    fail(Errc::invalid_config, "need at least 4 stations, 1 passenger, 1 day, 1 cluster");
  if (!(c.hf_fraction > 0.0 && c.hf_fraction < 1.0))
    fail(Errc::invalid_config, "hf_fraction must lie strictly between 0 and 1");
  if (c.lf_max_days < 1 || c.lf_max_days > 7)
    fail(Errc::invalid_config, "lf_max_days must be in 1..7");
  for (const auto& p : c.peaks)
    if (p.begin_sec < 0 || p.end_sec > 86400 || p.begin_sec >= p.end_sec || p.multiplier <= 0.0)
      fail(Errc::invalid_config, "malformed peak window");
}

// Per-minute sampling weights across the day: a small floor at night, the
// daytime base, and the configured peak multipliers on top.
inline std::vector<double> minute_weights(const SynthConfig& c) {
  std::vector<double> w(1440, 0.05);
  for (int m = 5 * 60; m < 23 * 60; ++m) w[size_t(m)] = 1.0;
  for (const auto& p : c.peaks)
    for (int m = p.begin_sec / 60; m < (p.end_sec + 59) / 60 && m < 1440; ++m)
      w[size_t(m)] *= p.multiplier;
  // trips run up to ~80 minutes; cut starts so no trip crosses midnight
  for (int m = 1356; m < 1440; ++m) w[size_t(m)] = 0.0;
  return w;
}

inline int sample_minute(const std::vector<double>& weights, double total, Rng& rng) {
  double target = rng.uniform() * total;
  double run = 0.0;
  for (size_t m = 0; m < weights.size(); ++m) {
    run += weights[m];
    if (run >= target && weights[m] > 0.0) return int(m);
  }
  for (size_t m = weights.size(); m-- > 0;)
    if (weights[m] > 0.0) return int(m);
  return 0;
}
}  // namespace detail

inline SynthOutput generate(const SynthConfig& cfg) {
  detail::validate(cfg);
  Rng rng(cfg.seed);
  SynthOutput out;
  int n_blobs = std::min(cfg.geo_clusters, cfg.n_stations);

  // stations: Gaussian blobs on a ring around a city center
  struct Geo {
    double lon, lat;
    int blob;
  };
  std::vector<Geo> geo(static_cast<size_t>(cfg.n_stations));
  std::vector<std::vector<int>> blob_members(static_cast<size_t>(n_blobs));
  const double kPi = 3.14159265358979323846;
  auto station_name = [](int s) {
    char name[16];
    std::snprintf(name, sizeof name, "S%05d", s);
    return std::string(name);
  };
  for (int s = 0; s < cfg.n_stations; ++s) {
    int blob = s % n_blobs;  // every blob populated
    double angle = 2.0 * kPi * double(blob) / double(n_blobs);
    double cx = 116.4 + 0.2 * std::cos(angle);
    double cy = 39.9 + 0.2 * std::sin(angle);
    geo[size_t(s)] = {cx + rng.normal() * cfg.geo_spread_deg,
                      cy + rng.normal() * cfg.geo_spread_deg, blob};
    blob_members[size_t(blob)].push_back(s);
    char row[96];
    std::snprintf(row, sizeof row, "%s,%.6f,%.6f,DT", station_name(s).c_str(), geo[size_t(s)].lon,
                  geo[size_t(s)].lat);
    out.station_rows.push_back(row);
  }

  // passengers: HF head count = floor(fraction * n), so the designated share
  // never exceeds the fraction; membership drawn by shuffle
  int hf_count = int(cfg.hf_fraction * double(cfg.n_passengers));
  std::vector<int> pids(static_cast<size_t>(cfg.n_passengers));
  for (size_t i = 0; i < pids.size(); ++i) pids[i] = int(i);
  rng.shuffle(pids);
  std::vector<char> is_hf(size_t(cfg.n_passengers), 0);
  for (int i = 0; i < hf_count; ++i) is_hf[size_t(pids[size_t(i)])] = 1;
  auto passenger_id = [](int p) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "p%08x%06d",
                  unsigned(fnv1a64(std::to_string(p)) & 0xffffffffu), p);
    return std::string(buf);
  };
  for (int p = 0; p < cfg.n_passengers; ++p)
    if (is_hf[size_t(p)]) out.hf_ids.push_back(passenger_id(p));
  std::sort(out.hf_ids.begin(), out.hf_ids.end());

  auto weights = detail::minute_weights(cfg);
  double weight_total = 0.0;
  for (double w : weights) weight_total += w;

  // Trips last at most ~80 minutes (3 legs, 40 min apart), and chains split
  // at 60-minute gaps, so starts 150+ minutes apart can never merge into one
  // chain downstream.
  const int kMinSpacing = 150;
  std::vector<int> starts;
  auto schedule_starts = [&](int want) {
    starts.clear();
    for (int t = 0; t < want; ++t) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        int m = detail::sample_minute(weights, weight_total, rng);
        bool clear = true;
        for (int s : starts)
          if (std::abs(s - m) < kMinSpacing) { clear = false; break; }
        if (clear) {
          starts.push_back(m);
          break;
        }
      }
    }
    std::sort(starts.begin(), starts.end());
  };

  auto pick_station = [&](int blob) {
    const auto& members = blob_members[size_t(blob)];
    return members[size_t(rng.below(members.size()))];
  };
  auto pick_other = [&](int not_a, int not_b) {
    for (;;) {
      int s = pick_station(int(rng.below(uint64_t(n_blobs))));
      if (s != not_a && s != not_b) return s;
    }
  };

  // LF travel days per 7-day block: 1..lf_max_days distinct days, so every
  // passenger appears in every week and stays far below the HF trip floor.
  std::vector<int> week_days(7);
  char row[160];
  for (int p = 0; p < cfg.n_passengers; ++p) {
    std::string pid = passenger_id(p);
    bool hf = is_hf[size_t(p)];
    int home = pick_station(int(rng.below(uint64_t(n_blobs))));
    int work = pick_other(home, home);
    for (int block = 0; block * 7 < cfg.days; ++block) {
      int block_len = std::min(7, cfg.days - block * 7);
      std::vector<char> travels(size_t(block_len), 1);
      if (!hf) {
        for (int i = 0; i < block_len; ++i) week_days[size_t(i)] = i;
        std::vector<int> days_view(week_days.begin(), week_days.begin() + block_len);
        rng.shuffle(days_view);
        int travel_days = 1 + int(rng.below(uint64_t(std::min(cfg.lf_max_days, block_len))));
        std::fill(travels.begin(), travels.end(), 0);
        for (int i = 0; i < travel_days; ++i) travels[size_t(days_view[size_t(i)])] = 1;
      }
      for (int d = 0; d < block_len; ++d) {
        if (!travels[size_t(d)]) continue;
        int day = block * 7 + d;
        int want = hf ? 2 + (rng.uniform() < cfg.third_trip_prob ? 1 : 0) : 1;
        schedule_starts(want);
        for (size_t trip = 0; trip < starts.size(); ++trip) {
          // commutes run home->work before noon and back after; extras wander
          int origin = starts[trip] < 12 * 60 ? home : work;
          int dest = starts[trip] < 12 * 60 ? work : home;
          if (trip >= 2) {
            origin = pick_other(-1, -1);
            dest = pick_other(origin, origin);
          }
          std::vector<int> stops{origin};
          if (rng.uniform() < cfg.three_leg_prob) stops.push_back(pick_other(origin, dest));
          stops.push_back(dest);

          int64_t t = (int64_t(cfg.start_date.days) + day) * 86400 +
                      int64_t(starts[trip]) * 60 + int64_t(rng.below(60));
          for (size_t leg = 0; leg < stops.size(); ++leg) {
            if (leg > 0) {
              // onward time 5..40 min, floored by distance at ~100 km/h so the
              // implied speed stays under the cleaner's plausibility cap
              const Geo& a = geo[size_t(stops[leg - 1])];
              const Geo& b = geo[size_t(stops[leg])];
              int floor_min = std::clamp(
                  int(haversine_km(a.lon, a.lat, b.lon, b.lat) * 0.6) + 1, 5, 40);
              t += 60 * (floor_min + int64_t(rng.below(uint64_t(41 - floor_min))));
            }
            int s = stops[leg];
            std::snprintf(row, sizeof row, "%s,DT,%d,%d,%s,%s", pid.c_str(),
                          geo[size_t(s)].blob + 1, s, station_name(s).c_str(),
                          format_timestamp14(DateTime{t}).c_str());
            out.record_rows.push_back(row);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace transit
