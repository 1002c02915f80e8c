#include "lineval/gtfs.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "lineval/common.hpp"
#include "lineval/csv.hpp"

namespace lineval::gtfs {

namespace {

const char* kWeekdayNames[7] = {"monday",   "tuesday", "wednesday", "thursday",
                                "friday",   "saturday", "sunday"};

// Emitted on write; the Feed model carries weekday flags only.
constexpr const char* kCalendarStart = "20240101";
constexpr const char* kCalendarEnd = "20341231";

template <typename T>
void check_unique_ids(const std::vector<T>& items, const char* table) {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      throw input_error(std::string(table) + ": duplicate id '" + item.id + "'");
    }
  }
}

}  // namespace

Weekday parse_weekday(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (int i = 0; i < 7; ++i) {
    if (lower == kWeekdayNames[i]) return static_cast<Weekday>(i);
  }
  throw input_error("unknown weekday '" + name + "'");
}

std::string weekday_name(Weekday day) { return kWeekdayNames[static_cast<int>(day)]; }

int parse_gtfs_time(const std::string& text) {
  int h = 0, m = 0, s = 0;
  char extra;
  if (std::sscanf(text.c_str(), "%d:%d:%d%c", &h, &m, &s, &extra) != 3 || h < 0 || m < 0 ||
      m > 59 || s < 0 || s > 59) {
    throw input_error("bad time '" + text + "' (expected HH:MM:SS)");
  }
  return h * 3600 + m * 60 + s;
}

std::string format_gtfs_time(int seconds) {
  if (seconds < 0) throw input_error("negative time value");
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", seconds / 3600, (seconds / 60) % 60,
                seconds % 60);
  return buf;
}

void Feed::canonicalize() {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(stops.begin(), stops.end(), by_id);
  std::sort(routes.begin(), routes.end(), by_id);
  std::sort(trips.begin(), trips.end(), by_id);
  std::sort(services.begin(), services.end(), by_id);
  std::sort(stop_times.begin(), stop_times.end(), [](const StopTime& a, const StopTime& b) {
    if (a.trip_id != b.trip_id) return a.trip_id < b.trip_id;
    return a.seq < b.seq;
  });
}

void Feed::validate() const {
  check_unique_ids(stops, "stops");
  check_unique_ids(routes, "routes");
  check_unique_ids(trips, "trips");
  check_unique_ids(services, "services");

  std::unordered_set<std::string> stop_ids, route_ids, trip_ids, service_ids;
  for (const auto& s : stops) stop_ids.insert(s.id);
  for (const auto& r : routes) route_ids.insert(r.id);
  for (const auto& t : trips) trip_ids.insert(t.id);
  for (const auto& s : services) service_ids.insert(s.id);

  for (const auto& t : trips) {
    if (!route_ids.count(t.route_id)) {
      throw input_error("trips: trip '" + t.id + "' references unknown route '" + t.route_id + "'");
    }
    if (!service_ids.count(t.service_id)) {
      throw input_error("trips: trip '" + t.id + "' references unknown service '" + t.service_id +
                        "'");
    }
  }

  // Per-trip sequence/time monotonicity. stop_times are grouped by trip in
  // canonical order; group manually so validation also works pre-canonicalize.
  std::unordered_map<std::string, std::vector<const StopTime*>> by_trip;
  for (const auto& st : stop_times) {
    if (!trip_ids.count(st.trip_id)) {
      throw input_error("stop_times: entry references unknown trip '" + st.trip_id + "'");
    }
    if (!stop_ids.count(st.stop_id)) {
      throw input_error("stop_times: entry references unknown stop '" + st.stop_id + "'");
    }
    if (st.arrival_s > st.departure_s) {
      throw input_error("stop_times: trip '" + st.trip_id + "' seq " + std::to_string(st.seq) +
                        " has departure before arrival");
    }
    by_trip[st.trip_id].push_back(&st);
  }
  for (auto& [trip_id, events] : by_trip) {
    std::sort(events.begin(), events.end(),
              [](const StopTime* a, const StopTime* b) { return a->seq < b->seq; });
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i]->seq == events[i - 1]->seq) {
        throw input_error("stop_times: trip '" + trip_id + "' repeats stop_sequence " +
                          std::to_string(events[i]->seq));
      }
      if (events[i]->arrival_s < events[i - 1]->departure_s) {
        throw input_error("stop_times: trip '" + trip_id + "' time decreases at seq " +
                          std::to_string(events[i]->seq));
      }
    }
  }
}

Feed parse_feed(const std::filesystem::path& dir) {
  for (const char* name : {"stops.txt", "routes.txt", "trips.txt", "stop_times.txt", "calendar.txt"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw input_error("missing required file " + (dir / name).string());
    }
  }

  Feed feed;
  {
    csv::Reader r(dir / "stops.txt");
    while (r.next()) {
      feed.stops.push_back({r.get_string("stop_id"), r.get_string("stop_name"),
                            r.get_double("stop_lat"), r.get_double("stop_lon")});
    }
  }
  {
    csv::Reader r(dir / "routes.txt");
    while (r.next()) {
      feed.routes.push_back({r.get_string("route_id"), r.get_string("route_type")});
    }
  }
  {
    csv::Reader r(dir / "trips.txt");
    bool has_direction = false;
    while (r.next()) {
      if (r.line() == 2) has_direction = r.has_column("direction_id");
      Trip t{r.get_string("trip_id"), r.get_string("route_id"), r.get_string("service_id"), 0};
      if (has_direction) t.direction = static_cast<int>(r.get_long("direction_id"));
      feed.trips.push_back(std::move(t));
    }
  }
  {
    csv::Reader r(dir / "stop_times.txt");
    while (r.next()) {
      StopTime st;
      st.trip_id = r.get_string("trip_id");
      st.seq = static_cast<int>(r.get_long("stop_sequence"));
      try {
        st.arrival_s = parse_gtfs_time(r.get_string("arrival_time"));
        st.departure_s = parse_gtfs_time(r.get_string("departure_time"));
      } catch (const input_error& e) {
        throw input_error(r.location() + ": " + e.what());
      }
      st.stop_id = r.get_string("stop_id");
      feed.stop_times.push_back(std::move(st));
    }
  }
  {
    csv::Reader r(dir / "calendar.txt");
    while (r.next()) {
      Service s;
      s.id = r.get_string("service_id");
      for (int d = 0; d < 7; ++d) s.weekdays[d] = r.get_long(kWeekdayNames[d]) != 0;
      feed.services.push_back(std::move(s));
    }
  }

  feed.canonicalize();
  feed.validate();
  return feed;
}

void write_feed(const Feed& feed, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw input_error("cannot create directory " + dir.string() + ": " + ec.message());

  Feed canon = feed;
  canon.canonicalize();

  {
    csv::Writer w(dir / "stops.txt");
    w.row({"stop_id", "stop_name", "stop_lat", "stop_lon"});
    for (const auto& s : canon.stops) {
      w.row({s.id, s.name, format_double(s.lat), format_double(s.lon)});
    }
  }
  {
    csv::Writer w(dir / "routes.txt");
    w.row({"route_id", "route_type"});
    for (const auto& r : canon.routes) w.row({r.id, r.mode});
  }
  {
    csv::Writer w(dir / "trips.txt");
    w.row({"route_id", "service_id", "trip_id", "direction_id"});
    for (const auto& t : canon.trips) {
      w.row({t.route_id, t.service_id, t.id, std::to_string(t.direction)});
    }
  }
  {
    csv::Writer w(dir / "stop_times.txt");
    w.row({"trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"});
    for (const auto& st : canon.stop_times) {
      w.row({st.trip_id, format_gtfs_time(st.arrival_s), format_gtfs_time(st.departure_s),
             st.stop_id, std::to_string(st.seq)});
    }
  }
  {
    csv::Writer w(dir / "calendar.txt");
    w.row({"service_id", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
           "sunday", "start_date", "end_date"});
    for (const auto& s : canon.services) {
      std::vector<std::string> fields{s.id};
      for (int d = 0; d < 7; ++d) fields.push_back(s.weekdays[d] ? "1" : "0");
      fields.push_back(kCalendarStart);
      fields.push_back(kCalendarEnd);
      w.row(fields);
    }
  }
}

Feed merge_feeds(const Feed& base, const Feed& overlay, const std::string& overlay_prefix) {
  std::unordered_set<std::string> base_stops, base_routes, base_trips, base_services;
  for (const auto& s : base.stops) base_stops.insert(s.id);
  for (const auto& r : base.routes) base_routes.insert(r.id);
  for (const auto& t : base.trips) base_trips.insert(t.id);
  for (const auto& s : base.services) base_services.insert(s.id);

  bool collision = false;
  for (const auto& s : overlay.stops) collision |= base_stops.count(s.id) > 0;
  for (const auto& r : overlay.routes) collision |= base_routes.count(r.id) > 0;
  for (const auto& t : overlay.trips) collision |= base_trips.count(t.id) > 0;
  for (const auto& s : overlay.services) collision |= base_services.count(s.id) > 0;

  Feed renamed = overlay;
  if (collision) {
    auto rename = [&](std::string& id) { id = overlay_prefix + id; };
    for (auto& s : renamed.stops) rename(s.id);
    for (auto& r : renamed.routes) rename(r.id);
    for (auto& s : renamed.services) rename(s.id);
    for (auto& t : renamed.trips) {
      rename(t.id);
      rename(t.route_id);
      rename(t.service_id);
    }
    for (auto& st : renamed.stop_times) {
      rename(st.trip_id);
      rename(st.stop_id);
    }
    for (const auto& s : renamed.stops) {
      if (base_stops.count(s.id)) {
        throw input_error("merge: overlay stop '" + s.id + "' still collides after prefixing");
      }
    }
    for (const auto& r : renamed.routes) {
      if (base_routes.count(r.id)) {
        throw input_error("merge: overlay route '" + r.id + "' still collides after prefixing");
      }
    }
    for (const auto& t : renamed.trips) {
      if (base_trips.count(t.id)) {
        throw input_error("merge: overlay trip '" + t.id + "' still collides after prefixing");
      }
    }
    for (const auto& s : renamed.services) {
      if (base_services.count(s.id)) {
        throw input_error("merge: overlay service '" + s.id + "' still collides after prefixing");
      }
    }
  }

  Feed merged = base;
  merged.stops.insert(merged.stops.end(), renamed.stops.begin(), renamed.stops.end());
  merged.routes.insert(merged.routes.end(), renamed.routes.begin(), renamed.routes.end());
  merged.trips.insert(merged.trips.end(), renamed.trips.begin(), renamed.trips.end());
  merged.stop_times.insert(merged.stop_times.end(), renamed.stop_times.begin(),
                           renamed.stop_times.end());
  merged.services.insert(merged.services.end(), renamed.services.begin(), renamed.services.end());
  merged.canonicalize();
  merged.validate();
  return merged;
}

}  // namespace lineval::gtfs
