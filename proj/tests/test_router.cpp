#include "lineval/router.hpp"

#include <gtest/gtest.h>

#include <random>

#include "lineval/synth.hpp"
#include "lineval/timetable.hpp"
#include "netgen.hpp"
#include "oracle.hpp"

namespace {

using namespace lineval::gtfs;
using namespace lineval::skim;

/// One line a->b->c, hourly departures at :00 from 06:00 to 10:00,
/// 20 minutes a->b, 15 minutes b->c.
Feed hourly_feed() {
  Feed feed;
  feed.stops = {{"a", "a", 40.70, -73.99}, {"b", "b", 40.72, -73.95}, {"c", "c", 40.74, -73.91}};
  feed.routes = {{"L", "1"}};
  Service svc;
  svc.id = "daily";
  svc.weekdays.fill(true);
  feed.services = {svc};
  for (int h = 6; h <= 10; ++h) {
    Trip t;
    t.id = "t" + std::to_string(h);
    t.route_id = "L";
    t.service_id = "daily";
    feed.trips.push_back(t);
    feed.stop_times.push_back({t.id, 1, h * 3600, h * 3600, "a"});
    feed.stop_times.push_back({t.id, 2, h * 3600 + 1200, h * 3600 + 1200, "b"});
    feed.stop_times.push_back({t.id, 3, h * 3600 + 2100, h * 3600 + 2100, "c"});
  }
  feed.canonicalize();
  feed.validate();
  return feed;
}

TEST(Router, FoldsInitialWaitIntoAccess) {
  const Timetable tt = Timetable::build(hourly_feed(), Weekday::Wednesday);
  Router router(tt);
  // Leave the centroid at 08:00, walk 120 s, reach the stop 08:02 -> board 09:00.
  const AccessLink origin{tt.stop_index("a"), 120};
  const AccessLink dest{tt.stop_index("c"), 60};
  auto j = router.plan({&origin, 1}, {&dest, 1}, 8 * 3600);
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->access_s, 3600);  // 120 s walk + 3480 s wait
  EXPECT_EQ(j->ivt_s, 2100);
  EXPECT_EQ(j->egress_s, 60);
  EXPECT_EQ(j->transfers, 0);
  EXPECT_EQ(j->total_s, j->access_s + j->ivt_s + j->egress_s);
}

TEST(Router, IdentityOdViaSharedStop) {
  const Timetable tt = Timetable::build(hourly_feed(), Weekday::Wednesday);
  Router router(tt);
  const AccessLink link{tt.stop_index("a"), 0};
  auto j = router.plan({&link, 1}, {&link, 1}, 8 * 3600);
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->total_s, 0);
  EXPECT_EQ(j->transfers, 0);
  EXPECT_EQ(j->ivt_s, 0);
}

TEST(Router, UnreachableAfterLastTrip) {
  const Timetable tt = Timetable::build(hourly_feed(), Weekday::Wednesday);
  Router router(tt);
  const AccessLink origin{tt.stop_index("a"), 0};
  const AccessLink dest{tt.stop_index("c"), 0};
  EXPECT_FALSE(router.plan({&origin, 1}, {&dest, 1}, 11 * 3600).has_value());
}

TEST(Router, InactiveServiceDayHasNoTrips) {
  Feed feed = hourly_feed();
  for (auto& s : feed.services) {
    s.weekdays.fill(false);
    s.weekdays[5] = true;  // Saturday only
  }
  const Timetable tt = Timetable::build(feed, Weekday::Wednesday);
  Router router(tt);
  const AccessLink origin{tt.stop_index("a"), 0};
  const AccessLink dest{tt.stop_index("c"), 0};
  EXPECT_FALSE(router.plan({&origin, 1}, {&dest, 1}, 8 * 3600).has_value());
  const Timetable sat = Timetable::build(feed, Weekday::Saturday);
  Router sat_router(sat);
  const AccessLink so{sat.stop_index("a"), 0};
  const AccessLink sd{sat.stop_index("c"), 0};
  EXPECT_TRUE(sat_router.plan({&so, 1}, {&sd, 1}, 8 * 3600).has_value());
}

TEST(Router, TransferViaFootpath) {
  // Line 1 a->b, line 2 b2->c; b and b2 are linked by a 90 s walk.
  Feed feed;
  feed.stops = {{"a", "a", 40.70, -73.99},
                {"b", "b", 40.72, -73.95},
                {"b2", "b2", 40.7201, -73.9501},
                {"c", "c", 40.74, -73.91}};
  feed.routes = {{"L1", "1"}, {"L2", "1"}};
  Service svc;
  svc.id = "daily";
  svc.weekdays.fill(true);
  feed.services = {svc};
  feed.trips = {{"u", "L1", "daily", 0}, {"v", "L2", "daily", 0}};
  feed.stop_times = {
      {"u", 1, 8 * 3600, 8 * 3600, "a"},
      {"u", 2, 8 * 3600 + 600, 8 * 3600 + 600, "b"},
      {"v", 1, 8 * 3600 + 800, 8 * 3600 + 800, "b2"},
      {"v", 2, 8 * 3600 + 1400, 8 * 3600 + 1400, "c"},
  };
  feed.canonicalize();
  feed.validate();
  const Timetable tt = Timetable::build(feed, Weekday::Wednesday);

  FootpathTable footpaths(tt.stop_count());
  footpaths[tt.stop_index("b")].push_back({tt.stop_index("b2"), 90});
  footpaths[tt.stop_index("b2")].push_back({tt.stop_index("b"), 90});

  Router router(tt, footpaths);
  const AccessLink origin{tt.stop_index("a"), 0};
  const AccessLink dest{tt.stop_index("c"), 0};
  auto j = router.plan({&origin, 1}, {&dest, 1}, 8 * 3600);
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->transfers, 1);
  EXPECT_EQ(j->total_s, 1400);
  EXPECT_EQ(j->access_s, 0);
  EXPECT_EQ(j->ivt_s, 1400);  // transfer walk and wait fold into ivt

  // Without the footpath the destination is unreachable.
  Router bare(tt);
  EXPECT_FALSE(bare.plan({&origin, 1}, {&dest, 1}, 8 * 3600).has_value());
}

TEST(Router, PrefersFewerTransfersOnTies) {
  // Direct slow trip and a two-leg alternative arriving at the same time.
  Feed feed;
  feed.stops = {{"a", "a", 40.70, -73.99}, {"m", "m", 40.72, -73.95}, {"z", "z", 40.74, -73.91}};
  feed.routes = {{"direct", "1"}, {"hop1", "1"}, {"hop2", "1"}};
  Service svc;
  svc.id = "daily";
  svc.weekdays.fill(true);
  feed.services = {svc};
  feed.trips = {{"d", "direct", "daily", 0}, {"h1", "hop1", "daily", 0}, {"h2", "hop2", "daily", 0}};
  feed.stop_times = {
      {"d", 1, 8 * 3600, 8 * 3600, "a"},
      {"d", 2, 8 * 3600 + 1800, 8 * 3600 + 1800, "z"},
      {"h1", 1, 8 * 3600, 8 * 3600, "a"},
      {"h1", 2, 8 * 3600 + 600, 8 * 3600 + 600, "m"},
      {"h2", 1, 8 * 3600 + 700, 8 * 3600 + 700, "m"},
      {"h2", 2, 8 * 3600 + 1800, 8 * 3600 + 1800, "z"},
  };
  feed.canonicalize();
  feed.validate();
  const Timetable tt = Timetable::build(feed, Weekday::Wednesday);
  Router router(tt);
  const AccessLink origin{tt.stop_index("a"), 0};
  const AccessLink dest{tt.stop_index("z"), 0};
  auto j = router.plan({&origin, 1}, {&dest, 1}, 8 * 3600);
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->total_s, 1800);
  EXPECT_EQ(j->transfers, 0);
}

TEST(Router, HandlesOvertakingTrips) {
  // An express departs later but arrives earlier; pattern splitting must
  // keep the scan exact.
  Feed feed;
  feed.stops = {{"a", "a", 40.70, -73.99}, {"z", "z", 40.74, -73.91}};
  feed.routes = {{"L", "1"}};
  Service svc;
  svc.id = "daily";
  svc.weekdays.fill(true);
  feed.services = {svc};
  feed.trips = {{"slow", "L", "daily", 0}, {"fast", "L", "daily", 0}};
  feed.stop_times = {
      {"slow", 1, 8 * 3600, 8 * 3600, "a"},
      {"slow", 2, 8 * 3600 + 3000, 8 * 3600 + 3000, "z"},
      {"fast", 1, 8 * 3600 + 300, 8 * 3600 + 300, "a"},
      {"fast", 2, 8 * 3600 + 1500, 8 * 3600 + 1500, "z"},
  };
  feed.canonicalize();
  feed.validate();
  const Timetable tt = Timetable::build(feed, Weekday::Wednesday);
  Router router(tt);
  const AccessLink origin{tt.stop_index("a"), 0};
  const AccessLink dest{tt.stop_index("z"), 0};
  auto j = router.plan({&origin, 1}, {&dest, 1}, 8 * 3600);
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ(j->total_s, 1500);
}

TEST(RouterOracle, MatchesTimeExpandedDijkstra) {
  std::mt19937 rng(20240811);
  int checked = 0;
  for (int instance = 0; instance < 250; ++instance) {
    const Feed feed = netgen::random_feed(rng);
    const Timetable tt = Timetable::build(feed, Weekday::Wednesday);
    WalkParams walk;
    std::uniform_int_distribution<int> radius(0, 2);
    walk.transfer_radius_m = radius(rng) * 300.0;
    const FootpathTable footpaths = build_footpaths(tt, walk);
    Router router(tt, footpaths);

    std::uniform_int_distribution<int> depart(6 * 3600 - 600, 10 * 3600);
    for (int query = 0; query < 4; ++query) {
      const auto origin = netgen::random_links(rng, tt);
      const auto dest = netgen::random_links(rng, tt);
      const int t0 = depart(rng);
      const auto planned = router.plan(origin, dest, t0);
      const auto expected =
          oracle::best_total_time(tt, footpaths, origin, dest, t0, router.max_transfers());
      ASSERT_EQ(planned.has_value(), expected.has_value())
          << "instance " << instance << " query " << query;
      if (planned) {
        ASSERT_EQ(planned->total_s, *expected) << "instance " << instance << " query " << query;
        EXPECT_EQ(planned->total_s, planned->access_s + planned->ivt_s + planned->egress_s);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(RouterProperty, MergedNetworkNeverWorse) {
  std::mt19937 rng(77);
  for (int instance = 0; instance < 50; ++instance) {
    const Feed base = netgen::random_feed(rng);
    netgen::Options overlay_opt;
    overlay_opt.id_prefix = "o_";
    const Feed overlay = netgen::random_feed(rng, overlay_opt);
    const Feed merged = merge_feeds(base, overlay);

    const Timetable tt_base = Timetable::build(base, Weekday::Wednesday);
    const Timetable tt_merged = Timetable::build(merged, Weekday::Wednesday);
    WalkParams walk;
    const FootpathTable fp_base = build_footpaths(tt_base, walk);
    const FootpathTable fp_merged = build_footpaths(tt_merged, walk);
    Router base_router(tt_base, fp_base);
    Router merged_router(tt_merged, fp_merged);

    std::uniform_real_distribution<double> lat(40.000, 40.018);
    std::uniform_real_distribution<double> lon(-74.000, -73.976);
    std::uniform_int_distribution<int> depart(6 * 3600, 10 * 3600);
    for (int query = 0; query < 6; ++query) {
      Zone zo{"o", lat(rng), lon(rng), false};
      Zone zd{"d", lat(rng), lon(rng), false};
      const auto o_base = access_candidates(zo, tt_base, walk);
      const auto d_base = access_candidates(zd, tt_base, walk);
      const auto o_merged = access_candidates(zo, tt_merged, walk);
      const auto d_merged = access_candidates(zd, tt_merged, walk);
      const int t0 = depart(rng);
      const auto before = base_router.plan(o_base, d_base, t0);
      const auto after = merged_router.plan(o_merged, d_merged, t0);
      if (before.has_value()) {
        ASSERT_TRUE(after.has_value());
        EXPECT_LE(after->total_s, before->total_s);
      }
    }
  }
}

TEST(RouterProperty, DeterministicAcrossRuns) {
  std::mt19937 rng(4242);
  const Feed feed = netgen::random_feed(rng);
  const Timetable tt = Timetable::build(feed, Weekday::Wednesday);
  WalkParams walk;
  const FootpathTable footpaths = build_footpaths(tt, walk);
  Router a(tt, footpaths);
  Router b(tt, footpaths);
  const auto origin = netgen::random_links(rng, tt);
  const auto dest = netgen::random_links(rng, tt);
  for (int t0 = 6 * 3600; t0 < 7 * 3600; t0 += 300) {
    const auto ja = a.plan(origin, dest, t0);
    const auto jb = b.plan(origin, dest, t0);
    ASSERT_EQ(ja.has_value(), jb.has_value());
    if (ja) {
      EXPECT_EQ(ja->total_s, jb->total_s);
      EXPECT_EQ(ja->access_s, jb->access_s);
      EXPECT_EQ(ja->ivt_s, jb->ivt_s);
      EXPECT_EQ(ja->egress_s, jb->egress_s);
      EXPECT_EQ(ja->transfers, jb->transfers);
    }
  }
}

}  // namespace
