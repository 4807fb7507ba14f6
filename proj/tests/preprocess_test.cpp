#include "transit/preprocess.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace transit;

TEST(Dedup, KeepsFirstCopyAndSorts) {
  auto r1 = ts::record("B", "S1", "20180301090000");
  auto r2 = ts::record("A", "S2", "20180301100000");
  auto r3 = ts::record("A", "S1", "20180301080000");
  auto dup = r1;
  auto out = deduplicate({r1, dup, r2, r3});
  EXPECT_EQ(out.duplicates_removed, 1u);
  ASSERT_EQ(out.duplicates.size(), 1u);
  EXPECT_EQ(out.duplicates[0], r1);
  ASSERT_EQ(out.records.size(), 3u);
  // sorted by passenger then time
  EXPECT_EQ(out.records[0], r3);
  EXPECT_EQ(out.records[1], r2);
  EXPECT_EQ(out.records[2], r1);
}

TEST(Dedup, DifferentLineIsNotADuplicate) {
  auto a = ts::record("P", "S1", "20180301090000", 1, "1");
  auto b = ts::record("P", "S1", "20180301090000", 1, "2");
  auto out = deduplicate({a, b});
  EXPECT_EQ(out.duplicates_removed, 0u);
  EXPECT_EQ(out.records.size(), 2u);
}

TEST(Dedup, EqualTimeKeepsInputOrder) {
  auto a = ts::record("P", "First", "20180301090000");
  auto b = ts::record("P", "Second", "20180301090000");
  auto out = deduplicate({a, b});
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.records[0].station_name, "First");
  EXPECT_EQ(out.records[1].station_name, "Second");
}

TEST(FilterFlawed, WindowCheckComesFirst) {
  FilterOptions opt;
  opt.window_start = make_date(2018, 3, 1);
  opt.window_end = make_date(2018, 3, 8);
  // out of window AND negative seq: window wins
  auto r = ts::record("P", "S", "20180228120000", -3);
  auto out = filter_flawed({r}, opt);
  EXPECT_EQ(out.removed[int(FlawReason::out_of_window)], 1u);
  EXPECT_EQ(out.removed[int(FlawReason::negative_seq)], 0u);
  ASSERT_EQ(out.rejects.size(), 1u);
  EXPECT_EQ(out.rejects[0].second, FlawReason::out_of_window);
}

TEST(FilterFlawed, WindowEndIsExclusive) {
  FilterOptions opt;
  opt.window_start = make_date(2018, 3, 1);
  opt.window_end = make_date(2018, 3, 8);
  auto in1 = ts::record("P", "S", "20180301000000");
  auto in2 = ts::record("P", "T", "20180307235959");
  auto out1 = ts::record("P", "S", "20180308000000");
  auto res = filter_flawed({in1, in2, out1}, opt);
  EXPECT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.removed[int(FlawReason::out_of_window)], 1u);
}

TEST(FilterFlawed, WindowDisabledWhenStartEqualsEnd) {
  FilterOptions opt;  // both default to day 0
  auto r = ts::record("P", "S", "19690501120000");
  auto out = filter_flawed({r}, opt);
  EXPECT_EQ(out.records.size(), 1u);
}

TEST(FilterFlawed, NegativeSequenceRejected) {
  auto good = ts::record("P", "S", "20180301080000", 0);
  auto bad = ts::record("P", "T", "20180301090000", -1);
  auto out = filter_flawed({good, bad}, {});
  EXPECT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.removed[int(FlawReason::negative_seq)], 1u);
}

TEST(FilterFlawed, DuplicateTimestampDropsLaterRecord) {
  auto a = ts::record("P", "Kept", "20180301080000");
  auto b = ts::record("P", "Dropped", "20180301080000");
  auto c = ts::record("P", "Next", "20180301081000");
  auto out = filter_flawed({a, b, c}, {});
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.records[0].station_name, "Kept");
  EXPECT_EQ(out.records[1].station_name, "Next");
  EXPECT_EQ(out.removed[int(FlawReason::duplicate_timestamp)], 1u);
}

TEST(FilterFlawed, SameTimeDifferentPassengersAllowed) {
  auto a = ts::record("P1", "S", "20180301080000");
  auto b = ts::record("P2", "S", "20180301080000");
  auto out = filter_flawed({a, b}, {});
  EXPECT_EQ(out.records.size(), 2u);
}

TEST(FilterFlawed, ImplausibleSpeedRejectsLaterRecord) {
  // 111 km apart, one minute gap: far above any street speed
  auto cat = ts::catalog_of({{"Near", 116.0, 39.0}, {"Far", 116.0, 40.0}});
  FilterOptions opt;
  opt.catalog = &cat;
  auto a = ts::record("P", "Near", "20180301080000");
  auto b = ts::record("P", "Far", "20180301080100");
  auto c = ts::record("P", "Far", "20180301080200");
  auto out = filter_flawed({a, b, c}, opt);
  // b rejected against a; a stays the survivor, so c is rejected against a too
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].station_name, "Near");
  EXPECT_EQ(out.removed[int(FlawReason::implausible_speed)], 2u);
}

TEST(FilterFlawed, SlowTravelPasses) {
  auto cat = ts::catalog_of({{"Near", 116.0, 39.0}, {"Far", 116.0, 40.0}});
  FilterOptions opt;
  opt.catalog = &cat;
  auto a = ts::record("P", "Near", "20180301080000");
  auto b = ts::record("P", "Far", "20180301100000");  // 2h for ~111km, ok
  auto out = filter_flawed({a, b}, opt);
  EXPECT_EQ(out.records.size(), 2u);
}

TEST(FilterFlawed, SpeedCheckSkipsSameStationAndUnknownNames) {
  auto cat = ts::catalog_of({{"Near", 116.0, 39.0}, {"Far", 116.0, 40.0}});
  FilterOptions opt;
  opt.catalog = &cat;
  // same station: no speed check even with tiny gap
  auto a = ts::record("P", "Near", "20180301080000");
  auto b = ts::record("P", "Near", "20180301080001");
  // unknown station: no coordinates, no check
  auto c = ts::record("P", "Mystery", "20180301080002");
  auto out = filter_flawed({a, b, c}, opt);
  EXPECT_EQ(out.records.size(), 3u);
  EXPECT_EQ(out.total_removed(), 0u);
}

TEST(FilterFlawed, PrevResetsPerPassenger) {
  auto cat = ts::catalog_of({{"Near", 116.0, 39.0}, {"Far", 116.0, 40.0}});
  FilterOptions opt;
  opt.catalog = &cat;
  auto a = ts::record("P1", "Near", "20180301080000");
  auto b = ts::record("P2", "Far", "20180301080100");  // new passenger, no pair check
  auto out = filter_flawed({a, b}, opt);
  EXPECT_EQ(out.records.size(), 2u);
}

TEST(Chains, GapEqualToLimitStaysTogether) {
  ChainOptions opt;
  opt.max_gap_secs = 3600;
  auto a = ts::record("P", "S1", "20180301080000");
  auto b = ts::record("P", "S2", "20180301090000");  // exactly 1h later
  auto out = assemble_chains({a, b}, opt);
  ASSERT_EQ(out.chains.size(), 1u);
  EXPECT_EQ(out.chains[0].legs.size(), 2u);
}

TEST(Chains, GapBeyondLimitSplits) {
  ChainOptions opt;
  opt.max_gap_secs = 3600;
  opt.require_min_legs = false;
  auto a = ts::record("P", "S1", "20180301080000");
  auto b = ts::record("P", "S2", "20180301090001");  // 1h + 1s
  auto out = assemble_chains({a, b}, opt);
  EXPECT_EQ(out.chains.size(), 2u);
}

TEST(Chains, DurationCapSplits) {
  ChainOptions opt;
  opt.max_gap_secs = 4 * 3600;
  opt.max_duration_secs = 6 * 3600;
  opt.require_min_legs = false;
  auto a = ts::record("P", "S1", "20180301080000");
  auto b = ts::record("P", "S2", "20180301113000");
  auto c = ts::record("P", "S3", "20180301143001");  // 6h + 1s after start
  auto out = assemble_chains({a, b, c}, opt);
  ASSERT_EQ(out.chains.size(), 2u);
  EXPECT_EQ(out.chains[0].legs.size(), 2u);
  EXPECT_EQ(out.chains[1].legs.size(), 1u);
}

TEST(Chains, PassengerChangeSplits) {
  auto a = ts::record("P1", "S1", "20180301080000");
  auto b = ts::record("P1", "S2", "20180301081000");
  auto c = ts::record("P2", "S1", "20180301081500");
  auto d = ts::record("P2", "S2", "20180301082000");
  auto out = assemble_chains({a, b, c, d}, {});
  ASSERT_EQ(out.chains.size(), 2u);
  EXPECT_EQ(out.chains[0].passenger_id, "P1");
  EXPECT_EQ(out.chains[1].passenger_id, "P2");
  EXPECT_EQ(out.records_in_chains, 4u);
}

TEST(Chains, SingleLegDroppedWhenRequired) {
  auto a = ts::record("P", "S1", "20180301080000");
  ChainOptions strict;
  auto out = assemble_chains({a}, strict);
  EXPECT_TRUE(out.chains.empty());
  EXPECT_EQ(out.records_dropped_short, 1u);

  ChainOptions loose;
  loose.require_min_legs = false;
  auto out2 = assemble_chains({a}, loose);
  ASSERT_EQ(out2.chains.size(), 1u);
  EXPECT_EQ(out2.records_dropped_short, 0u);
}

TEST(Chains, StartFinishAccessors) {
  auto c = ts::chain("P", {{"A", "20180301080000"}, {"B", "20180301083000"}});
  EXPECT_EQ(format_timestamp14(c.start()), "20180301080000");
  EXPECT_EQ(format_timestamp14(c.finish()), "20180301083000");
}

TEST(CleanRecords, ConservationAcrossMixedCorpus) {
  auto cat = ts::catalog_of({{"A", 116.00, 39.90}, {"B", 116.02, 39.90}, {"C", 116.0, 40.9}});
  FilterOptions fopt;
  fopt.window_start = make_date(2018, 3, 1);
  fopt.window_end = make_date(2018, 3, 15);
  fopt.catalog = &cat;

  std::vector<SmartCardRecord> recs;
  recs.push_back(ts::record("P1", "A", "20180301080000"));
  recs.push_back(ts::record("P1", "B", "20180301083000"));
  recs.push_back(ts::record("P1", "A", "20180301083000"));   // duplicate timestamp
  recs.push_back(ts::record("P1", "B", "20180301083000"));   // exact duplicate of #2
  recs.push_back(ts::record("P2", "A", "20180220080000"));   // out of window
  recs.push_back(ts::record("P2", "B", "20180302090000", -5));  // negative seq
  recs.push_back(ts::record("P2", "A", "20180302100000"));   // lone leg, chain too short
  recs.push_back(ts::record("P3", "A", "20180303070000"));
  recs.push_back(ts::record("P3", "C", "20180303070200"));   // ~111km in 2min

  auto out = clean_records(recs, fopt, {});
  const auto& rep = out.report;
  EXPECT_EQ(rep.input_records, 9u);
  EXPECT_EQ(rep.duplicates_removed, 1u);
  EXPECT_EQ(rep.flawed_removed[int(FlawReason::out_of_window)], 1u);
  EXPECT_EQ(rep.flawed_removed[int(FlawReason::negative_seq)], 1u);
  EXPECT_EQ(rep.flawed_removed[int(FlawReason::duplicate_timestamp)], 1u);
  EXPECT_EQ(rep.flawed_removed[int(FlawReason::implausible_speed)], 1u);
  EXPECT_EQ(rep.short_chain_records, 2u);  // P2 lone leg and P3 leftover leg
  EXPECT_EQ(rep.records_in_chains, 2u);
  EXPECT_TRUE(rep.conserved());
  ASSERT_EQ(out.chains.size(), 1u);
  EXPECT_EQ(out.chains[0].passenger_id, "P1");
  EXPECT_EQ(out.duplicates.size(), 1u);
  EXPECT_EQ(out.rejects.size(), 4u);
}

TEST(ChainRows, SerializeParseRoundTrip) {
  auto c = ts::chain("P42", {{"Alpha", "20180301080000"},
                             {"Beta", "20180301081500"},
                             {"Gamma", "20180301084500"}});
  auto row = serialize_chain_row(c);
  auto back = parse_chain_row(row).unwrap();
  EXPECT_EQ(back.passenger_id, "P42");
  ASSERT_EQ(back.legs.size(), 3u);
  for (size_t i = 0; i < 3; ++i) EXPECT_TRUE(back.legs[i] == c.legs[i]);
  EXPECT_EQ(serialize_chain_row(back), row);
}

TEST(ChainRows, RejectsNonIncreasingTimes) {
  auto r = parse_chain_row("P,DT,1,1,A,20180301090000,DT,1,2,B,20180301090000");
  EXPECT_FALSE(r.ok());
  auto r2 = parse_chain_row("P,DT,1,1,A,20180301090000,DT,1,2,B,20180301085900");
  EXPECT_FALSE(r2.ok());
  EXPECT_FALSE(parse_chain_row("P").ok());
  EXPECT_FALSE(parse_chain_row(",DT,1,1,A,20180301090000").ok());
}
