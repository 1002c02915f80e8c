#ifndef LINEVAL_TESTS_FIXTURES_HPP
#define LINEVAL_TESTS_FIXTURES_HPP

// Toy nine-zone scenario used by the pipeline tests and the acceptance suite.
//
// Zones sit on a 3x3 grid about 2 km apart. The base network runs three
// lines over shared stops S1..S9 (S5 unserved):
//   red   S1-S4-S7 (west column), blue S7-S8-S9 (south row),
//   green S1-S2-S3-S6-S9 (slow L around the north-east).
// The proposed line cuts the diagonal Z1-Z5-Z9 with its own stops, so Z5
// becomes newly connected and Z1/Z9 trips gain a fast direct link.

#include <map>
#include <string>
#include <vector>

#include "lineval/gtfs.hpp"
#include "lineval/synth.hpp"
#include "testutil.hpp"

namespace fixtures {

inline constexpr double kLat0 = 40.736;
inline constexpr double kLon0 = -73.998;
inline constexpr double kDLat = -0.018;  // ~2.0 km per row, southward
inline constexpr double kDLon = 0.024;   // ~2.0 km per column, eastward

inline double zone_lat(int zone) { return kLat0 + kDLat * ((zone - 1) / 3); }
inline double zone_lon(int zone) { return kLon0 + kDLon * ((zone - 1) % 3); }

/// Union of feeds that deliberately share stops; routes/trips/services must
/// be disjoint, duplicated stops must agree exactly.
inline lineval::gtfs::Feed combine_feeds(const std::vector<lineval::gtfs::Feed>& feeds) {
  lineval::gtfs::Feed out;
  std::map<std::string, lineval::gtfs::Stop> stops;
  for (const auto& feed : feeds) {
    for (const auto& s : feed.stops) {
      auto [it, inserted] = stops.emplace(s.id, s);
      if (!inserted && !(it->second == s)) throw std::runtime_error("conflicting stop " + s.id);
    }
    out.routes.insert(out.routes.end(), feed.routes.begin(), feed.routes.end());
    out.trips.insert(out.trips.end(), feed.trips.begin(), feed.trips.end());
    out.stop_times.insert(out.stop_times.end(), feed.stop_times.begin(), feed.stop_times.end());
    out.services.insert(out.services.end(), feed.services.begin(), feed.services.end());
  }
  for (auto& [id, stop] : stops) out.stops.push_back(stop);
  out.canonicalize();
  out.validate();
  return out;
}

inline lineval::gtfs::RouteSpec line_spec(const std::string& route_id,
                                          const std::vector<int>& zones, double length_mi,
                                          double run_time_min) {
  lineval::gtfs::RouteSpec spec;
  spec.route_id = route_id;
  spec.mode = "1";
  spec.run_time_min = run_time_min;
  spec.length_mi = length_mi;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    lineval::gtfs::RouteStop stop;
    stop.id = "S" + std::to_string(zones[i]);
    stop.name = stop.id;
    stop.lat = zone_lat(zones[i]);
    stop.lon = zone_lon(zones[i]);
    stop.dist_mi = length_mi * static_cast<double>(i) / static_cast<double>(zones.size() - 1);
    spec.stops.push_back(stop);
  }
  return spec;
}

inline lineval::gtfs::ServicePlan flat_plan(const std::string& label, const std::string& start,
                                            const std::string& end, int headway_min) {
  lineval::gtfs::ServicePlan plan;
  plan.intervals.push_back({label, lineval::gtfs::parse_gtfs_time(start),
                            lineval::gtfs::parse_gtfs_time(end), headway_min});
  return plan;
}

inline lineval::gtfs::Feed toy_base_feed() {
  using namespace lineval::gtfs;
  const Feed red = build_synthetic_schedule(line_spec("red", {1, 4, 7}, 2.5, 10.0),
                                            flat_plan("day", "06:00:00", "22:00:00", 15));
  const Feed blue = build_synthetic_schedule(line_spec("blue", {7, 8, 9}, 3.0, 10.0),
                                             flat_plan("day", "06:00:00", "22:00:00", 15));
  const Feed green = build_synthetic_schedule(line_spec("green", {1, 2, 3, 6, 9}, 6.0, 30.0),
                                              flat_plan("day", "06:00:00", "22:00:00", 12));
  return combine_feeds({red, blue, green});
}

/// Line config JSON for the proposed diagonal line, Table-style plan:
/// 5-minute peaks, 10 off-peak, 20 overnight, service day 06:00-30:00.
inline std::string toy_line_json() {
  auto stop = [](const char* id, int zone, double dist) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  R"(      {"id": "%s", "name": "%s", "lat": %.6f, "lon": %.6f, "dist_mi": %.2f})",
                  id, id, zone_lat(zone), zone_lon(zone), dist);
    return std::string(buf);
  };
  std::string json = "{\n  \"route\": {\n    \"id\": \"xline\",\n    \"mode\": \"0\",\n"
                     "    \"run_time_min\": 8,\n    \"length_mi\": 4.0,\n    \"stops\": [\n";
  json += stop("X1", 1, 0.0) + ",\n" + stop("X5", 5, 2.0) + ",\n" + stop("X9", 9, 4.0) + "\n";
  json +=
      "    ]\n  },\n  \"service\": {\n    \"intervals\": [\n"
      "      {\"label\": \"am_peak\", \"start\": \"06:00:00\", \"end\": \"09:00:00\", \"headway_min\": 5},\n"
      "      {\"label\": \"midday\", \"start\": \"09:00:00\", \"end\": \"16:00:00\", \"headway_min\": 10},\n"
      "      {\"label\": \"pm_peak\", \"start\": \"16:00:00\", \"end\": \"20:00:00\", \"headway_min\": 5},\n"
      "      {\"label\": \"evening\", \"start\": \"20:00:00\", \"end\": \"23:00:00\", \"headway_min\": 10},\n"
      "      {\"label\": \"early_morning\", \"start\": \"23:00:00\", \"end\": \"30:00:00\", \"headway_min\": 20}\n"
      "    ]\n  }\n}\n";
  return json;
}

inline std::string toy_zones_csv() {
  std::string csv = "zone_id,lat,lon,in_corridor\n";
  for (int z = 1; z <= 9; ++z) {
    const bool corridor = z == 1 || z == 5 || z == 9;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "Z%d,%.6f,%.6f,%d\n", z, zone_lat(z), zone_lon(z),
                  corridor ? 1 : 0);
    csv += buf;
  }
  return csv;
}

/// 15 OD pairs x 2 segments = 30 groups. Mix of corridor pairs, newly
/// connected pairs (Z5), slow-green pairs and pairs the new line cannot help.
inline const std::vector<std::pair<int, int>>& toy_od_pairs() {
  static const std::vector<std::pair<int, int>> pairs = {
      {1, 9}, {9, 1}, {1, 5}, {5, 9}, {4, 9}, {7, 3}, {2, 3}, {3, 6},
      {7, 8}, {8, 9}, {4, 7}, {2, 6}, {1, 3}, {6, 9}, {5, 2},
  };
  return pairs;
}

inline std::string toy_params_csv() {
  std::string csv =
      "origin_id,destination_id,segment,theta_auto_tt,theta_cost,theta_transit_at,"
      "theta_transit_et,theta_transit_ivt,theta_transit_nt,theta_nonvehicle_tt,"
      "asc_driving,asc_transit,asc_on_demand,asc_biking,asc_walking,asc_carpool,weight\n";
  auto row = [&](const std::string& o, const std::string& d, const std::string& seg,
                 double t_ivt, double t_cost, double weight) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,-0.050,%.3f,-0.060,-0.060,%.3f,-0.300,-0.070,"
                                    "0.500,0.000,-1.000,-1.500,-0.500,-1.200,%.1f\n",
                  o.c_str(), d.c_str(), seg.c_str(), t_cost, t_ivt, weight);
    csv += buf;
  };
  for (const auto& [o, d] : toy_od_pairs()) {
    const std::string od_o = "Z" + std::to_string(o);
    const std::string od_d = "Z" + std::to_string(d);
    for (const char* seg : {"LowIncome", "NotLowIncome"}) {
      const bool low = std::string(seg) == "LowIncome";
      // Z1->Z9 rows come in at the block-group level to exercise aggregation.
      if (o == 1 && d == 9) {
        row(od_o + "001", od_d + "002", seg, low ? -0.035 : -0.042, low ? -0.300 : -0.220, 1.0);
        row(od_o + "002", od_d + "001", seg, low ? -0.045 : -0.038, low ? -0.260 : -0.180, 3.0);
      } else {
        row(od_o, od_d, seg, low ? -0.040 : -0.040, low ? -0.280 : -0.200, 1.0);
      }
    }
  }
  return csv;
}

inline std::string toy_groups_csv() {
  std::string csv =
      "origin_id,destination_id,segment,trips,share_private_vehicle,share_public_transit,"
      "share_on_demand,share_biking,share_walking,share_carpool,avg_auto_miles,fare_usd,"
      "auto_cost_usd,base_access_min,base_egress_min,base_ivt_min,base_transfers,"
      "weight_am_peak,weight_midday,weight_pm_peak,weight_evening,weight_early_morning\n";
  int k = 0;
  for (const auto& [o, d] : toy_od_pairs()) {
    for (const char* seg : {"LowIncome", "NotLowIncome"}) {
      const bool low = std::string(seg) == "LowIncome";
      ++k;
      const double trips = 40.0 + 17.0 * ((k * 7) % 11);
      // One zero-transit-share group exercises the CS exclusion path.
      const double transit = (k == 7) ? 0.0 : 0.15 + 0.02 * (k % 6);
      const double drive = low ? 0.30 : 0.45;
      const double walk = 0.18;
      const double bike = 0.04;
      const double pool = low ? 0.10 : 0.06;
      const double od = 1.0 - transit - drive - walk - bike - pool;
      char buf[320];
      std::snprintf(buf, sizeof(buf),
                    "Z%d,Z%d,%s,%.1f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.2f,2.75,%.2f,"
                    "%.1f,%.1f,%.1f,%d,0.30,0.25,0.25,0.15,0.05\n",
                    o, d, seg, trips, drive, transit, od, bike, walk, pool,
                    2.0 + 0.5 * (k % 5), 3.5 + 0.25 * (k % 4), 6.0 + (k % 4), 5.0 + (k % 3),
                    20.0 + 2.0 * (k % 9), k % 3);
      csv += buf;
    }
  }
  return csv;
}

struct ToyScenario {
  std::filesystem::path root;
  std::filesystem::path config;
};

struct ToyOptions {
  bool include_overlay = true;
  bool use_cache = true;
  unsigned workers = 1;
  std::string subdir = "toy";
  std::string output_subdir = "out";
  // Replaces the diagonal line with a copy of the base green line (same
  // stops/timing, colliding ids): the canonical null scenario.
  bool overlay_duplicates_green = false;
};

inline ToyScenario write_toy_scenario(const std::filesystem::path& dir,
                                      const ToyOptions& opt = {}) {
  namespace fs = std::filesystem;
  const fs::path root = dir / opt.subdir;
  fs::create_directories(root);

  lineval::gtfs::write_feed(toy_base_feed(), root / "base_gtfs");

  if (opt.overlay_duplicates_green) {
    // Same stops, same cadence as green; ids collide with the base on purpose.
    std::string json = "{\n  \"route\": {\n    \"id\": \"green\",\n    \"mode\": \"1\",\n"
                       "    \"run_time_min\": 30,\n    \"length_mi\": 6.0,\n    \"stops\": [\n";
    const int zones[5] = {1, 2, 3, 6, 9};
    for (int i = 0; i < 5; ++i) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    R"(      {"id": "S%d", "name": "S%d", "lat": %.6f, "lon": %.6f, "dist_mi": %.1f}%s)"
                    "\n",
                    zones[i], zones[i], zone_lat(zones[i]), zone_lon(zones[i]), 1.5 * i,
                    i + 1 < 5 ? "," : "");
      json += buf;
    }
    json += "    ]\n  },\n  \"service\": {\n    \"intervals\": [\n"
            "      {\"label\": \"am_peak\", \"start\": \"06:00:00\", \"end\": \"09:00:00\", \"headway_min\": 12},\n"
            "      {\"label\": \"midday\", \"start\": \"09:00:00\", \"end\": \"16:00:00\", \"headway_min\": 12},\n"
            "      {\"label\": \"pm_peak\", \"start\": \"16:00:00\", \"end\": \"20:00:00\", \"headway_min\": 12},\n"
            "      {\"label\": \"evening\", \"start\": \"20:00:00\", \"end\": \"22:00:00\", \"headway_min\": 12},\n"
            "      {\"label\": \"early_morning\", \"start\": \"22:00:00\", \"end\": \"22:12:00\", \"headway_min\": 12}\n"
            "    ]\n  }\n}\n";
    testutil::write_file(root / "line.json", json);
  } else {
    testutil::write_file(root / "line.json", toy_line_json());
  }
  testutil::write_file(root / "zones.csv", toy_zones_csv());
  testutil::write_file(root / "params.csv", toy_params_csv());
  testutil::write_file(root / "groups.csv", toy_groups_csv());

  char config[1024];
  std::snprintf(config, sizeof(config),
                "{\n"
                "  \"base_gtfs_dir\": \"base_gtfs\",\n"
                "  \"line_config\": \"line.json\",\n"
                "  \"zones_csv\": \"zones.csv\",\n"
                "  \"params_csv\": \"params.csv\",\n"
                "  \"groups_csv\": \"groups.csv\",\n"
                "  \"output_dir\": \"%s\",\n"
                "  \"include_overlay\": %s,\n"
                "  \"walk\": {\"speed_mps\": 1.34, \"detour_factor\": 1.3, "
                "\"max_radius_m\": 1200, \"transfer_radius_m\": 400},\n"
                "  \"sampling_step_min\": 10,\n"
                "  \"max_transfers\": 4,\n"
                "  \"newly_connected_ceiling_min\": 120,\n"
                "  \"emission_grams_per_mile\": 400,\n"
                "  \"equity_threshold_fracs\": [0.1, 0.5],\n"
                "  \"service_weekday\": \"wednesday\",\n"
                "  \"workers\": %u,\n"
                "  \"use_cache\": %s\n"
                "}\n",
                opt.output_subdir.c_str(), opt.include_overlay ? "true" : "false", opt.workers,
                opt.use_cache ? "true" : "false");
  testutil::write_file(root / "config.json", config);

  return {root, root / "config.json"};
}

}  // namespace fixtures

#endif  // LINEVAL_TESTS_FIXTURES_HPP
