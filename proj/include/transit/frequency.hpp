#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "transit/core.hpp"
#include "transit/preprocess.hpp"

namespace transit {

// ---------------------------------------------------------------------------
// Trip counting and the high/low frequency split

struct DateWindow {
  Date start{0};
  Date end{0};  // exclusive

  bool contains(Date d) const { return !(d < start) && d < end; }
};

// Chains are attributed to the day of their first swipe. std::map keeps the
// result ordered by passenger id for stable downstream iteration.
inline std::map<std::string, int> count_trips(const std::vector<TravelChain>& chains,
                                              const DateWindow& window) {
  std::map<std::string, int> counts;
  for (const auto& c : chains)
    if (window.contains(c.start().date())) ++counts[c.passenger_id];
  return counts;
}

struct FrequencySplit {
  std::vector<std::string> high;  // sorted passenger ids
  std::vector<std::string> low;
  int threshold = 0;      // smallest trip count that lands in the high set
  double quantile = 0.0;  // the requested share, for reporting
};

// The high set is the top tail of the trip-count distribution: the smallest
// integer threshold t such that at most `quantile` of passengers have count
// >= t. With q = 0.25 this keeps the most frequent quarter (or fewer when the
// distribution is lumpy; an all-equal distribution yields an empty high set).
inline FrequencySplit split_hf_lf(const std::map<std::string, int>& trip_counts,
                                  double quantile = 0.25) {
  if (trip_counts.empty()) fail(Errc::empty_counts, "no passengers to split");
  if (!(quantile > 0.0 && quantile < 1.0)) fail(Errc::invalid_config, "quantile must be in (0,1)");
  std::vector<int> counts;
  counts.reserve(trip_counts.size());
  for (const auto& [id, c] : trip_counts) counts.push_back(c);
  std::sort(counts.begin(), counts.end());
  size_t n = counts.size();
  int max_count = counts.back();
  int threshold = max_count + 1;  // empty high set unless a tail qualifies
  for (int t = max_count; t >= 1; --t) {
    // count of passengers with trips >= t
    size_t ge = counts.end() - std::lower_bound(counts.begin(), counts.end(), t);
    if (double(ge) / double(n) <= quantile)
      threshold = t;
    else
      break;
  }
  FrequencySplit out;
  out.threshold = threshold;
  out.quantile = quantile;
  for (const auto& [id, c] : trip_counts)
    (c >= threshold ? out.high : out.low).push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// Two-hour time slots

inline constexpr int kSlotCount = 12;

inline int slot_of(DateTime t) { return t.second_of_day() / 7200; }

inline std::string slot_label(int slot) {
  if (slot < 0 || slot >= kSlotCount) fail(Errc::invalid_config, "slot index out of range");
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d-%02d", slot * 2, slot * 2 + 2);
  return buf;
}

// One count per slot; chains contribute at the slot of their first swipe.
inline std::array<int64_t, kSlotCount> slot_counts(const std::vector<TravelChain>& chains) {
  std::array<int64_t, kSlotCount> out{};
  for (const auto& c : chains) ++out[size_t(slot_of(c.start()))];
  return out;
}

// Min-max normalization of one slot series into [0,1]. A constant series has
// no spread to normalize and is rejected.
inline std::array<double, kSlotCount> normalize_slots(const std::array<int64_t, kSlotCount>& raw) {
  int64_t lo = raw[0], hi = raw[0];
  for (int64_t v : raw) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) fail(Errc::constant_series, "slot series is constant, nothing to normalize");
  std::array<double, kSlotCount> out{};
  for (size_t i = 0; i < raw.size(); ++i)
    out[i] = double(raw[i] - lo) / double(hi - lo);
  return out;
}

// Slot counts plus (optionally) their min-max normalization, restricted to a
// date window.
struct TimeSlotFlow {
  std::array<int64_t, kSlotCount> counts{};
  std::optional<std::array<double, kSlotCount>> normalized;

  int64_t total() const {
    int64_t s = 0;
    for (int64_t v : counts) s += v;
    return s;
  }
};

inline TimeSlotFlow bin_time_slots(const std::vector<TravelChain>& chains,
                                   const DateWindow& window, bool normalize = false) {
  TimeSlotFlow out;
  for (const auto& c : chains)
    if (window.contains(c.start().date())) ++out.counts[size_t(slot_of(c.start()))];
  if (normalize) out.normalized = normalize_slots(out.counts);
  return out;
}

// Chains whose first swipe falls inside [begin_sec, end_sec) of the day.
inline std::vector<TravelChain> chains_in_daywindow(const std::vector<TravelChain>& chains,
                                                    int begin_sec, int end_sec) {
  if (begin_sec < 0 || end_sec > 86400 || begin_sec >= end_sec)
    fail(Errc::invalid_config, "day window must satisfy 0 <= begin < end <= 86400");
  std::vector<TravelChain> out;
  for (const auto& c : chains) {
    int s = c.start().second_of_day();
    if (s >= begin_sec && s < end_sec) out.push_back(c);
  }
  return out;
}

inline std::vector<TravelChain> chains_of_passengers(const std::vector<TravelChain>& chains,
                                                     const std::vector<std::string>& ids) {
  std::unordered_set<std::string> set(ids.begin(), ids.end());
  std::vector<TravelChain> out;
  for (const auto& c : chains)
    if (set.count(c.passenger_id)) out.push_back(c);
  return out;
}

inline std::vector<TravelChain> chains_in_window(const std::vector<TravelChain>& chains,
                                                 const DateWindow& window) {
  std::vector<TravelChain> out;
  for (const auto& c : chains)
    if (window.contains(c.start().date())) out.push_back(c);
  return out;
}

}  // namespace transit
