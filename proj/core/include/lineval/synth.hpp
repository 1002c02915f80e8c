#ifndef LINEVAL_SYNTH_HPP
#define LINEVAL_SYNTH_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "lineval/gtfs.hpp"

namespace lineval::gtfs {

struct RouteStop {
  std::string id;
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  double dist_mi = 0.0;  // cumulative from the first stop
};

/// Geometry and run time of a proposed line. Distances are cumulative miles,
/// strictly increasing from 0 to length_mi; at least two stops.
struct RouteSpec {
  std::string route_id;
  std::string mode = "0";  // GTFS route_type (0 = tram / light rail)
  std::vector<RouteStop> stops;
  double length_mi = 0.0;
  double run_time_min = 0.0;

  double average_speed_mph() const { return length_mi / (run_time_min / 60.0); }

  void validate() const;
};

struct ServiceInterval {
  std::string label;
  int start_s = 0;  // seconds since midnight; end may exceed 24h
  int end_s = 0;
  int headway_min = 0;
};

/// Ordered, contiguous intervals covering the service span with no overlap.
struct ServicePlan {
  std::vector<ServiceInterval> intervals;

  void validate() const;
};

/// Per-segment run times in whole seconds, derived from the line's average
/// speed. Rounding residue goes to the last segment so the end-to-end time is
/// exactly round(run_time_min * 60) in both directions.
std::vector<int> interstop_times(const RouteSpec& spec);

/// Full-day two-direction timetable: for every interval and direction,
/// departures step from the interval start by the headway, strictly before
/// the interval end. Dwell is zero; service runs Monday-Friday.
gtfs::Feed build_synthetic_schedule(const RouteSpec& spec, const ServicePlan& plan);

/// Loads {"route": {...}, "service": {...}} from a JSON file. Schema is
/// documented in the README.
struct LineConfig {
  RouteSpec route;
  ServicePlan plan;
};
LineConfig load_line_config(const std::filesystem::path& path);

}  // namespace lineval::gtfs

#endif  // LINEVAL_SYNTH_HPP
