#include "lineval/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lineval/common.hpp"

namespace lineval::gtfs {

namespace {

std::string trip_number(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", n);
  return buf;
}

}  // namespace

void RouteSpec::validate() const {
  if (stops.size() < 2) throw input_error("route spec: need at least 2 stops");
  if (run_time_min <= 0) throw input_error("route spec: run time must be positive");
  if (length_mi <= 0) throw input_error("route spec: length must be positive");
  if (stops.front().dist_mi != 0.0) {
    throw input_error("route spec: first stop must be at distance 0");
  }
  for (std::size_t i = 1; i < stops.size(); ++i) {
    if (stops[i].dist_mi <= stops[i - 1].dist_mi) {
      throw input_error("route spec: cumulative distance must be strictly increasing at stop '" +
                        stops[i].id + "'");
    }
  }
  if (std::abs(stops.back().dist_mi - length_mi) > 1e-9) {
    throw input_error("route spec: last stop distance must equal the line length");
  }
}

void ServicePlan::validate() const {
  if (intervals.empty()) throw input_error("service plan: no intervals");
  for (const auto& iv : intervals) {
    if (iv.headway_min <= 0) {
      throw input_error("service plan: interval '" + iv.label + "' needs a positive headway");
    }
    if (iv.end_s <= iv.start_s) {
      throw input_error("service plan: interval '" + iv.label + "' must end after it starts");
    }
  }
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].start_s != intervals[i - 1].end_s) {
      throw input_error("service plan: interval '" + intervals[i].label +
                        "' must start where the previous one ends");
    }
  }
  if (intervals.back().end_s - intervals.front().start_s > 24 * 3600) {
    throw input_error("service plan: total span exceeds 24 hours");
  }
}

std::vector<int> interstop_times(const RouteSpec& spec) {
  spec.validate();
  const int total_s = static_cast<int>(std::llround(spec.run_time_min * 60.0));
  const std::size_t segments = spec.stops.size() - 1;
  std::vector<int> times(segments);
  int assigned = 0;
  for (std::size_t i = 0; i + 1 < segments; ++i) {
    double seg_mi = spec.stops[i + 1].dist_mi - spec.stops[i].dist_mi;
    times[i] = static_cast<int>(std::llround(seg_mi / spec.length_mi * total_s));
    assigned += times[i];
  }
  times[segments - 1] = total_s - assigned;  // rounding residue
  for (std::size_t i = 0; i < segments; ++i) {
    if (times[i] <= 0) {
      throw input_error("route spec: segment " + std::to_string(i) +
                        " rounds to a non-positive run time");
    }
  }
  return times;
}

gtfs::Feed build_synthetic_schedule(const RouteSpec& spec, const ServicePlan& plan) {
  spec.validate();
  plan.validate();
  const std::vector<int> seg_times = interstop_times(spec);

  Feed feed;
  for (const auto& s : spec.stops) feed.stops.push_back({s.id, s.name, s.lat, s.lon});
  feed.routes.push_back({spec.route_id, spec.mode});

  Service weekday_service;
  weekday_service.id = spec.route_id + "_wk";
  for (int d = 0; d < 5; ++d) weekday_service.weekdays[d] = true;
  feed.services.push_back(weekday_service);

  for (int direction = 0; direction < 2; ++direction) {
    int trip_no = 0;
    for (const auto& iv : plan.intervals) {
      // A departure landing exactly on the interval end belongs to the next
      // interval, hence strictly-before.
      for (int dep = iv.start_s; dep < iv.end_s; dep += iv.headway_min * 60) {
        Trip trip;
        trip.id = spec.route_id + "_d" + std::to_string(direction) + "_" + trip_number(trip_no++);
        trip.route_id = spec.route_id;
        trip.service_id = weekday_service.id;
        trip.direction = direction;
        feed.trips.push_back(trip);

        int t = dep;
        const int n = static_cast<int>(spec.stops.size());
        for (int k = 0; k < n; ++k) {
          int stop_index = direction == 0 ? k : n - 1 - k;
          feed.stop_times.push_back({trip.id, k + 1, t, t, spec.stops[stop_index].id});
          if (k + 1 < n) {
            int seg = direction == 0 ? k : n - 2 - k;
            t += seg_times[seg];
          }
        }
      }
    }
  }

  feed.canonicalize();
  feed.validate();
  return feed;
}

LineConfig load_line_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open line config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path.string() + ": " + e.what());
  }

  try {
    LineConfig cfg;
    const auto& route = doc.at("route");
    cfg.route.route_id = route.at("id").get<std::string>();
    cfg.route.mode = route.value("mode", std::string("0"));
    cfg.route.run_time_min = route.at("run_time_min").get<double>();
    for (const auto& s : route.at("stops")) {
      RouteStop rs;
      rs.id = s.at("id").get<std::string>();
      rs.name = s.value("name", rs.id);
      rs.lat = s.at("lat").get<double>();
      rs.lon = s.at("lon").get<double>();
      rs.dist_mi = s.at("dist_mi").get<double>();
      cfg.route.stops.push_back(std::move(rs));
    }
    cfg.route.length_mi = route.contains("length_mi") ? route.at("length_mi").get<double>()
                                                      : cfg.route.stops.back().dist_mi;

    for (const auto& iv : doc.at("service").at("intervals")) {
      ServiceInterval si;
      si.label = iv.at("label").get<std::string>();
      si.start_s = parse_gtfs_time(iv.at("start").get<std::string>());
      si.end_s = parse_gtfs_time(iv.at("end").get<std::string>());
      si.headway_min = iv.at("headway_min").get<int>();
      cfg.plan.intervals.push_back(std::move(si));
    }

    cfg.route.validate();
    cfg.plan.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

}  // namespace lineval::gtfs
