#include "lineval/gtfs.hpp"

#include <gtest/gtest.h>

#include "lineval/common.hpp"
#include "testutil.hpp"

namespace {

using namespace lineval::gtfs;

void write_minimal_feed(const std::filesystem::path& dir) {
  testutil::write_file(dir / "stops.txt",
                       "stop_id,stop_name,stop_lat,stop_lon\n"
                       "A,Alpha,40.7,-73.9\n"
                       "B,Beta,40.71,-73.91\n");
  testutil::write_file(dir / "routes.txt", "route_id,route_type\nr1,1\n");
  testutil::write_file(dir / "trips.txt",
                       "route_id,service_id,trip_id,direction_id\nr1,wk,t1,0\n");
  testutil::write_file(dir / "stop_times.txt",
                       "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
                       "t1,08:00:00,08:00:00,A,1\n"
                       "t1,08:10:00,08:10:00,B,2\n");
  testutil::write_file(dir / "calendar.txt",
                       "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,"
                       "start_date,end_date\n"
                       "wk,1,1,1,1,1,0,0,20240101,20341231\n");
}

TEST(GtfsTime, ParsesPastMidnight) {
  EXPECT_EQ(parse_gtfs_time("25:10:00"), 90600);
  EXPECT_EQ(parse_gtfs_time("00:00:00"), 0);
  EXPECT_EQ(parse_gtfs_time("06:39:30"), 6 * 3600 + 39 * 60 + 30);
  EXPECT_EQ(format_gtfs_time(90600), "25:10:00");
  EXPECT_THROW(parse_gtfs_time("8:61:00"), lineval::input_error);
  EXPECT_THROW(parse_gtfs_time("junk"), lineval::input_error);
}

TEST(GtfsParse, MinimalFeed) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed feed = parse_feed(tmp.path());
  EXPECT_EQ(feed.stops.size(), 2u);
  EXPECT_EQ(feed.trips.size(), 1u);
  EXPECT_EQ(feed.stop_times.size(), 2u);
  EXPECT_EQ(feed.stop_times[0].arrival_s, 8 * 3600);
}

TEST(GtfsParse, MissingFileIsAnError) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  std::filesystem::remove(tmp.path() / "calendar.txt");
  EXPECT_THROW(parse_feed(tmp.path()), lineval::input_error);
}

TEST(GtfsParse, DanglingTripReference) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  testutil::write_file(tmp.path() / "stop_times.txt",
                       "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
                       "ghost,08:00:00,08:00:00,A,1\n");
  try {
    parse_feed(tmp.path());
    FAIL() << "expected input_error";
  } catch (const lineval::input_error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(GtfsParse, DecreasingTimesRejected) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  testutil::write_file(tmp.path() / "stop_times.txt",
                       "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
                       "t1,08:00:00,08:00:00,A,1\n"
                       "t1,07:59:00,07:59:00,B,2\n");
  EXPECT_THROW(parse_feed(tmp.path()), lineval::input_error);
}

TEST(GtfsParse, DuplicateIdsRejected) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  testutil::write_file(tmp.path() / "routes.txt", "route_id,route_type\nr1,1\nr1,2\n");
  EXPECT_THROW(parse_feed(tmp.path()), lineval::input_error);
}

TEST(GtfsRoundTrip, WriteThenParseIsIdentity) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed feed = parse_feed(tmp.path());
  write_feed(feed, tmp.path() / "copy");
  Feed again = parse_feed(tmp.path() / "copy");
  EXPECT_EQ(feed, again);
}

TEST(GtfsRoundTrip, EmptyFeedWritesHeaderOnlyFiles) {
  testutil::TempDir tmp("gtfs");
  Feed empty;
  write_feed(empty, tmp.path() / "empty");
  EXPECT_EQ(testutil::read_file(tmp.path() / "empty" / "routes.txt"), "route_id,route_type\n");
  EXPECT_EQ(parse_feed(tmp.path() / "empty"), empty);
}

TEST(GtfsMerge, DisjointUnion) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed base = parse_feed(tmp.path());
  Feed overlay = base;
  for (auto& s : overlay.stops) s.id = "o_" + s.id;
  for (auto& r : overlay.routes) r.id = "o_" + r.id;
  for (auto& s : overlay.services) s.id = "o_" + s.id;
  for (auto& t : overlay.trips) {
    t.id = "o_" + t.id;
    t.route_id = "o_" + t.route_id;
    t.service_id = "o_" + t.service_id;
  }
  for (auto& st : overlay.stop_times) {
    st.trip_id = "o_" + st.trip_id;
    st.stop_id = "o_" + st.stop_id;
  }
  Feed merged = merge_feeds(base, overlay);
  EXPECT_EQ(merged.trips.size(), 2u);
  EXPECT_EQ(merged.stops.size(), 4u);
  // base entities intact
  for (const auto& s : base.stops) {
    EXPECT_NE(std::find(merged.stops.begin(), merged.stops.end(), s), merged.stops.end());
  }
}

TEST(GtfsMerge, EmptyOverlayIsIdentity) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed base = parse_feed(tmp.path());
  EXPECT_EQ(merge_feeds(base, Feed{}), base);
}

TEST(GtfsMerge, CollidingIdsArePrefixed) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed base = parse_feed(tmp.path());
  Feed merged = merge_feeds(base, base, "new_");
  EXPECT_EQ(merged.trips.size(), 2u);
  bool found = false;
  for (const auto& t : merged.trips) found |= t.id == "new_t1";
  EXPECT_TRUE(found);
  // round-trips cleanly after the merge
  write_feed(merged, tmp.path() / "merged");
  EXPECT_EQ(parse_feed(tmp.path() / "merged"), merged);
}

TEST(GtfsMerge, UnresolvableCollision) {
  testutil::TempDir tmp("gtfs");
  write_minimal_feed(tmp.path());
  Feed base = parse_feed(tmp.path());
  // The base already holds "new_t1", so prefixing the overlay's colliding
  // "t1" lands on a taken id.
  Feed target = base;
  Trip extra = base.trips[0];
  extra.id = "new_t1";
  target.trips.push_back(extra);
  target.stop_times.push_back({"new_t1", 1, 9 * 3600, 9 * 3600, "A"});
  target.stop_times.push_back({"new_t1", 2, 9 * 3600 + 60, 9 * 3600 + 60, "B"});
  target.canonicalize();
  EXPECT_THROW(merge_feeds(target, base, "new_"), lineval::input_error);
}

}  // namespace
