#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace transit {

// ---------------------------------------------------------------------------
// Errors

enum class Errc {
  // row-level parse errors
  malformed_row,
  malformed_leg,
  bad_timestamp,
  unknown_mode,
  bad_coordinate,
  // operation contract errors
  k_too_large,
  empty_input,
  empty_counts,
  constant_series,
  unmapped_station,
  degenerate_flows,
  too_few_nodes,
  too_few_values,
  not_enough_nodes,
  no_valid_component,
  empty_sample,
  empty_graph,
  partial_assignment,
  graph_too_small,
  instance_too_large,
  invalid_config,
  io_error,
  internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::malformed_leg: return "MalformedLeg";
    case Errc::bad_timestamp: return "BadTimestamp";
    case Errc::unknown_mode: return "UnknownMode";
    case Errc::bad_coordinate: return "BadCoordinate";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::empty_input: return "EmptyInput";
    case Errc::empty_counts: return "EmptyCounts";
    case Errc::constant_series: return "ConstantSeries";
    case Errc::unmapped_station: return "UnmappedStation";
    case Errc::degenerate_flows: return "DegenerateFlows";
    case Errc::too_few_nodes: return "TooFewNodes";
    case Errc::too_few_values: return "TooFewValues";
    case Errc::not_enough_nodes: return "NotEnoughNodes";
    case Errc::no_valid_component: return "NoValidComponent";
    case Errc::empty_sample: return "EmptySample";
    case Errc::empty_graph: return "EmptyGraph";
    case Errc::partial_assignment: return "PartialAssignment";
    case Errc::graph_too_small: return "GraphTooSmall";
    case Errc::instance_too_large: return "InstanceTooLarge";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code), msg_(msg) {}
  Errc code() const { return code_; }
  const std::string& message() const { return msg_; }  // without the code prefix

 private:
  Errc code_;
  std::string msg_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// Value-or-error result for per-row parsing, where rejection is data rather
// than control flow.
template <typename T>
class Expected {
 public:
  Expected(T value) : value_(std::move(value)), code_(Errc::internal) {}
  Expected(Errc code, std::string msg) : code_(code), msg_(std::move(msg)) {}

  explicit operator bool() const { return value_.has_value(); }
  bool ok() const { return value_.has_value(); }

  const T& operator*() const { return *value_; }
  T& operator*() { return *value_; }
  const T* operator->() const { return &*value_; }
  T* operator->() { return &*value_; }

  Errc error() const { return code_; }
  const std::string& message() const { return msg_; }

  T unwrap() const {
    if (!value_) throw Error(code_, msg_);
    return *value_;
  }

 private:
  std::optional<T> value_;
  Errc code_;
  std::string msg_;
};

// ---------------------------------------------------------------------------
// Naive local date/time, second resolution

struct Date {
  int32_t days = 0;  // days since 1970-01-01

  friend auto operator<=>(const Date&, const Date&) = default;
};

struct DateTime {
  int64_t secs = 0;  // seconds since 1970-01-01 00:00:00, no zone

  Date date() const {
    int64_t d = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
    return Date{static_cast<int32_t>(d)};
  }
  int32_t second_of_day() const {
    int64_t r = secs % 86400;
    if (r < 0) r += 86400;
    return static_cast<int32_t>(r);
  }

  friend auto operator<=>(const DateTime&, const DateTime&) = default;
};

inline Date make_date(int year, int month, int day) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                     std::chrono::day{unsigned(day)}};
  if (!ymd.ok()) fail(Errc::bad_timestamp, "invalid calendar date");
  return Date{static_cast<int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

// Parses exactly 14 digits YYYYMMDDHHMMSS with calendar and clock validation.
inline Expected<DateTime> parse_timestamp14(std::string_view s) {
  if (s.size() != 14) return {Errc::bad_timestamp, "expected 14 digits, got '" + std::string(s) + "'"};
  for (char c : s)
    if (c < '0' || c > '9') return {Errc::bad_timestamp, "non-digit in timestamp '" + std::string(s) + "'"};
  auto num = [&](int pos, int len) {
    int v = 0;
    for (int i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  int year = num(0, 4), month = num(4, 2), day = num(6, 2);
  int hour = num(8, 2), minute = num(10, 2), second = num(12, 2);
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                     std::chrono::day{unsigned(day)}};
  if (!ymd.ok()) return {Errc::bad_timestamp, "invalid calendar date in '" + std::string(s) + "'"};
  if (hour > 23 || minute > 59 || second > 59)
    return {Errc::bad_timestamp, "invalid clock field in '" + std::string(s) + "'"};
  int64_t days = sys_days{ymd}.time_since_epoch().count();
  return DateTime{days * 86400 + hour * 3600 + minute * 60 + second};
}

inline std::string format_timestamp14(DateTime t) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{std::chrono::days{t.date().days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d%02d%02d%02d", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), t.second_of_day() / 3600,
                (t.second_of_day() / 60) % 60, t.second_of_day() % 60);
  return buf;
}

inline std::string format_date(Date d) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{std::chrono::days{d.days}}};
  char buf[12];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

inline Expected<Date> parse_date(std::string_view s) {
  // YYYY-MM-DD
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    return {Errc::bad_timestamp, "expected YYYY-MM-DD, got '" + std::string(s) + "'"};
  auto num = [&](int pos, int len) {
    int v = 0;
    for (int i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  int y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (y < 0 || m < 0 || d < 0) return {Errc::bad_timestamp, "non-digit in date"};
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)}, std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return {Errc::bad_timestamp, "invalid calendar date '" + std::string(s) + "'"};
  return Date{static_cast<int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64 core). Self-contained so sequences do not
// depend on the standard library implementation.

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n), unbiased
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // uniform in [0, 1)
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  double normal() {
    // Box-Muller, one value per call
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// Node-key ordering: numeric labels compare numerically, everything else
// lexicographically (numeric keys sort before non-numeric).

inline bool is_numeric_key(std::string_view s) {
  if (s.empty() || s.size() > 18) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline bool natural_less(std::string_view a, std::string_view b) {
  bool na = is_numeric_key(a), nb = is_numeric_key(b);
  if (na && nb) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
  if (na != nb) return na;
  return a < b;
}

// ---------------------------------------------------------------------------
// Deterministic chunked parallelism. Work is split into a chunk grid that is
// independent of the thread count, and per-chunk results are merged in chunk
// order, so floating-point reductions are reproducible on any machine.

inline size_t parallel_chunk_count(size_t n) {
  const size_t kChunks = 64;
  return n == 0 ? 0 : std::min(n, kChunks);
}

template <typename Body>
void parallel_chunks(size_t n, Body&& body) {  // body(chunk_idx, begin, end)
  size_t chunks = parallel_chunk_count(n);
  if (chunks == 0) return;
  size_t threads = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), chunks);
  if (threads <= 1) {
    for (size_t c = 0; c < chunks; ++c) {
      size_t begin = n * c / chunks, end = n * (c + 1) / chunks;
      body(c, begin, end);
    }
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      size_t begin = n * c / chunks, end = n * (c + 1) / chunks;
      body(c, begin, end);
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

// Map each chunk to an accumulator, then merge accumulators in chunk order.
template <typename Acc, typename MapChunk, typename Merge>
Acc parallel_reduce(size_t n, Acc init, MapChunk&& map_chunk, Merge&& merge) {
  size_t chunks = parallel_chunk_count(n);
  std::vector<Acc> partial(chunks, init);
  parallel_chunks(n, [&](size_t c, size_t begin, size_t end) { map_chunk(partial[c], begin, end); });
  Acc out = std::move(init);
  for (size_t c = 0; c < chunks; ++c) merge(out, partial[c]);
  return out;
}

// ---------------------------------------------------------------------------
// Great-circle distance on the WGS84 mean radius; good to ~0.5% which is
// plenty for plausibility filtering and travel-time synthesis.

inline double haversine_km(double lon1, double lat1, double lon2, double lat2) {
  constexpr double kRadiusKm = 6371.0;
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  double dlat = (lat2 - lat1) * kDeg, dlon = (lon2 - lon1) * kDeg;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit content digest (manifest provenance, not security).

inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Fixed-width float formatting; round-trip exact for doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace transit
