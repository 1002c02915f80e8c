#ifndef LINEVAL_GTFS_HPP
#define LINEVAL_GTFS_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace lineval::gtfs {

// All times are seconds since midnight of the service day; values >= 24:00:00
// are legal and used for trips running past midnight.

struct Stop {
  std::string id;
  std::string name;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Stop&) const = default;
};

struct Route {
  std::string id;
  std::string mode;  // GTFS route_type, kept verbatim

  bool operator==(const Route&) const = default;
};

struct Trip {
  std::string id;
  std::string route_id;
  std::string service_id;
  int direction = 0;

  bool operator==(const Trip&) const = default;
};

struct StopTime {
  std::string trip_id;
  int seq = 0;
  int arrival_s = 0;
  int departure_s = 0;
  std::string stop_id;

  bool operator==(const StopTime&) const = default;
};

/// Weekday activity flags, Monday first. Calendar date ranges are not modeled;
/// the writer emits a fixed wide range.
struct Service {
  std::string id;
  std::array<bool, 7> weekdays{};

  bool operator==(const Service&) const = default;
};

enum class Weekday { Monday = 0, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

Weekday parse_weekday(const std::string& name);
std::string weekday_name(Weekday day);

/// An immutable-once-built static timetable. Canonical form sorts every table
/// by id (stop_times by trip then sequence), which makes equality and the
/// write/parse round trip exact.
struct Feed {
  std::vector<Stop> stops;
  std::vector<Route> routes;
  std::vector<Trip> trips;
  std::vector<StopTime> stop_times;
  std::vector<Service> services;

  /// Sorts all tables into canonical order.
  void canonicalize();

  /// Checks referential integrity, id uniqueness and stop_time monotonicity.
  /// Throws input_error naming the offending entity.
  void validate() const;

  bool operator==(const Feed&) const = default;
};

/// "HH:MM:SS" with HH >= 24 permitted -> seconds.
int parse_gtfs_time(const std::string& text);
std::string format_gtfs_time(int seconds);

/// Reads stops.txt, routes.txt, trips.txt, stop_times.txt and calendar.txt
/// from `dir`. The result is canonical and validated.
Feed parse_feed(const std::filesystem::path& dir);

/// Writes the five GTFS text files in canonical order. write_feed(parse_feed(d))
/// re-parses to an identical Feed.
void write_feed(const Feed& feed, const std::filesystem::path& dir);

/// Union of base and overlay. Base entities are untouched. If any overlay id
/// collides with a base id, every overlay id is renamed with `overlay_prefix`;
/// a collision that survives prefixing is an error.
Feed merge_feeds(const Feed& base, const Feed& overlay, const std::string& overlay_prefix = "new_");

}  // namespace lineval::gtfs

#endif  // LINEVAL_GTFS_HPP
