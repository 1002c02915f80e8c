#include "lineval/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "lineval/common.hpp"
#include "lineval/csv.hpp"
#include "lineval/report.hpp"
#include "lineval/timetable.hpp"

namespace lineval::pipeline {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Content hash over the canonical feed tables.
std::uint64_t feed_hash(const gtfs::Feed& feed) {
  std::uint64_t h = fnv1a64("feed");
  auto mix = [&h](const std::string& s) {
    h = fnv1a64(s, h);
    h = fnv1a64("\x1f", h);
  };
  for (const auto& s : feed.stops) {
    mix(s.id);
    mix(s.name);
    mix(format_double(s.lat));
    mix(format_double(s.lon));
  }
  for (const auto& r : feed.routes) {
    mix(r.id);
    mix(r.mode);
  }
  for (const auto& t : feed.trips) {
    mix(t.id);
    mix(t.route_id);
    mix(t.service_id);
    mix(std::to_string(t.direction));
  }
  for (const auto& st : feed.stop_times) {
    mix(st.trip_id);
    mix(std::to_string(st.seq));
    mix(std::to_string(st.arrival_s));
    mix(std::to_string(st.departure_s));
    mix(st.stop_id);
  }
  for (const auto& s : feed.services) {
    mix(s.id);
    for (bool d : s.weekdays) mix(d ? "1" : "0");
  }
  return h;
}

std::uint64_t skim_key(std::uint64_t network_hash, const ScenarioConfig& config,
                       const std::vector<skim::Zone>& zones, const gtfs::ServiceInterval& period) {
  std::uint64_t h = network_hash;
  for (const auto& z : zones) {
    h = fnv1a64(z.id, h);
    h = fnv1a64(format_double(z.lat), h);
    h = fnv1a64(format_double(z.lon), h);
  }
  h = fnv1a64(format_double(config.walk.speed_mps), h);
  h = fnv1a64(format_double(config.walk.detour_factor), h);
  h = fnv1a64(format_double(config.walk.max_radius_m), h);
  h = fnv1a64(format_double(config.walk.transfer_radius_m), h);
  h = fnv1a64(std::to_string(config.sampling_step_min), h);
  h = fnv1a64(std::to_string(config.max_transfers), h);
  h = fnv1a64(gtfs::weekday_name(config.service_weekday), h);
  h = fnv1a64(period.label, h);
  h = fnv1a64(std::to_string(period.start_s), h);
  h = fnv1a64(std::to_string(period.end_s), h);
  return h;
}

}  // namespace

void stage_log(const std::string& stage, const std::string& message) {
  std::cerr << "[" << stage << "] " << message << "\n";
}

void ScenarioConfig::validate() const {
  auto require_exists = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw input_error(std::string(what) + " not set");
    if (!std::filesystem::exists(p)) {
      throw input_error(std::string(what) + " does not exist: " + p.string());
    }
  };
  require_exists(base_gtfs_dir, "base_gtfs_dir");
  require_exists(line_config, "line_config");
  require_exists(zones_csv, "zones_csv");
  require_exists(params_csv, "params_csv");
  if (groups_csv.empty() == agenda_csv.empty()) {
    throw input_error("exactly one of groups_csv or agenda_csv must be set");
  }
  require_exists(groups_csv.empty() ? agenda_csv : groups_csv,
                 groups_csv.empty() ? "agenda_csv" : "groups_csv");
  if (output_dir.empty()) throw input_error("output_dir not set");
  if (sampling_step_min <= 0) throw input_error("sampling_step_min must be positive");
  if (max_transfers < 0) throw input_error("max_transfers must be nonnegative");
  if (newly_connected_ceiling_min <= 0) throw input_error("newly_connected_ceiling_min must be positive");
  if (emission_grams_per_mile <= 0) throw input_error("emission_grams_per_mile must be positive");
  if (walk.speed_mps <= 0 || walk.detour_factor <= 0 || walk.max_radius_m <= 0) {
    throw input_error("walk parameters must be positive");
  }
  if (walk.transfer_radius_m < 0) throw input_error("transfer_radius_m must be nonnegative");
  if (equity_threshold_fracs.empty()) throw input_error("equity_threshold_fracs must be nonempty");
  for (double f : equity_threshold_fracs) {
    if (f <= 0) throw input_error("equity threshold fractions must be positive");
  }
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config " + path.string());
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw input_error(path.string() + ": " + e.what());
    }
  }

  const std::filesystem::path base_dir = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](const std::string& key) -> std::filesystem::path {
    if (!doc.contains(key)) return {};
    std::filesystem::path p = doc.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };

  try {
    ScenarioConfig cfg;
    cfg.base_gtfs_dir = resolve("base_gtfs_dir");
    cfg.line_config = resolve("line_config");
    cfg.zones_csv = resolve("zones_csv");
    cfg.params_csv = resolve("params_csv");
    cfg.groups_csv = resolve("groups_csv");
    cfg.agenda_csv = resolve("agenda_csv");
    cfg.output_dir = resolve("output_dir");
    cfg.include_overlay = doc.value("include_overlay", true);
    if (doc.contains("walk")) {
      const auto& w = doc.at("walk");
      cfg.walk.speed_mps = w.value("speed_mps", cfg.walk.speed_mps);
      cfg.walk.detour_factor = w.value("detour_factor", cfg.walk.detour_factor);
      cfg.walk.max_radius_m = w.value("max_radius_m", cfg.walk.max_radius_m);
      cfg.walk.transfer_radius_m = w.value("transfer_radius_m", cfg.walk.transfer_radius_m);
    }
    cfg.sampling_step_min = doc.value("sampling_step_min", cfg.sampling_step_min);
    cfg.max_transfers = doc.value("max_transfers", cfg.max_transfers);
    cfg.newly_connected_ceiling_min =
        doc.value("newly_connected_ceiling_min", cfg.newly_connected_ceiling_min);
    cfg.emission_grams_per_mile = doc.value("emission_grams_per_mile", cfg.emission_grams_per_mile);
    if (doc.contains("equity_threshold_fracs")) {
      cfg.equity_threshold_fracs = doc.at("equity_threshold_fracs").get<std::vector<double>>();
    }
    if (doc.contains("service_weekday")) {
      cfg.service_weekday = gtfs::parse_weekday(doc.at("service_weekday").get<std::string>());
    }
    cfg.overlay_prefix = doc.value("overlay_prefix", cfg.overlay_prefix);
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.use_cache = doc.value("use_cache", cfg.use_cache);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

ScenarioPaths scenario_paths(const ScenarioConfig& config) {
  ScenarioPaths p;
  p.root = config.output_dir;
  p.synth_gtfs = p.root / "synth_gtfs";
  p.alt_gtfs = p.root / "alt_gtfs";
  p.skims = p.root / "skims";
  p.per_group_csv = p.root / "per_group.csv";
  p.welfare_csv = p.root / "welfare.csv";
  p.equity_json = p.root / "equity.json";
  p.report_dir = p.root / "report";
  p.manifest_json = p.root / "manifest.json";
  p.lock_file = p.root / ".lock";
  return p;
}

OutputLock::OutputLock(const std::filesystem::path& lock_file) : path_(lock_file) {
  std::filesystem::create_directories(lock_file.parent_path());
  int fd = ::open(lock_file.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw input_error("output directory is locked by another run (" + lock_file.string() +
                      " exists); remove the file if that run is dead");
  }
  ::close(fd);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Parameters

ParamsTable ParamsTable::load(const std::filesystem::path& path,
                              const std::vector<skim::Zone>& zones) {
  // Longest zone id that is a prefix of `id` (the id itself when it is a zone).
  std::vector<std::string> zone_ids;
  zone_ids.reserve(zones.size());
  for (const auto& z : zones) zone_ids.push_back(z.id);
  std::sort(zone_ids.begin(), zone_ids.end());
  auto parent_zone = [&](const std::string& id) -> std::optional<std::string> {
    std::optional<std::string> best;
    for (const auto& zid : zone_ids) {
      if (zid.size() <= id.size() && id.compare(0, zid.size(), zid) == 0) {
        if (!best || zid.size() > best->size()) best = zid;
      }
    }
    return best;
  };

  struct Bucket {
    std::vector<demand::ChoiceParams> params;
    std::vector<double> weights;
  };
  std::map<GroupKey, Bucket> buckets;

  csv::Reader r(path);
  const bool has_weight = r.has_column("weight");
  while (r.next()) {
    const std::string origin_raw = r.get_string("origin_id");
    const std::string dest_raw = r.get_string("destination_id");
    auto origin = parent_zone(origin_raw);
    auto destination = parent_zone(dest_raw);
    if (!origin || !destination) {
      throw input_error(r.location() + ": no zone matches od (" + origin_raw + ", " + dest_raw +
                        ")");
    }
    GroupKey key{*origin, *destination, demand::parse_segment(r.get_string("segment"))};

    demand::ChoiceParams p;
    p.theta_auto_tt = r.get_double("theta_auto_tt");
    p.theta_cost = r.get_double("theta_cost");
    p.theta_transit_at = r.get_double("theta_transit_at");
    p.theta_transit_et = r.get_double("theta_transit_et");
    p.theta_transit_ivt = r.get_double("theta_transit_ivt");
    p.theta_transit_nt = r.get_double("theta_transit_nt");
    p.theta_nonvehicle_tt = r.get_double("theta_nonvehicle_tt");
    p.asc_driving = r.get_double("asc_driving");
    p.asc_transit = r.get_double("asc_transit");
    p.asc_on_demand = r.get_double("asc_on_demand");
    p.asc_biking = r.get_double("asc_biking");
    p.asc_walking = r.get_double("asc_walking");
    p.asc_carpool = r.get_double("asc_carpool");

    double weight = has_weight ? r.get_double("weight") : 1.0;
    if (weight <= 0) throw input_error(r.location() + ": weight must be positive");

    Bucket& b = buckets[key];
    b.params.push_back(p);
    b.weights.push_back(weight);
  }

  ParamsTable table;
  for (auto& [key, bucket] : buckets) {
    demand::ChoiceParams merged = demand::aggregate_params(bucket.params, bucket.weights);
    for (const auto& warning : merged.validate()) {
      stage_log("params", key.origin + "->" + key.destination + " " +
                              demand::segment_name(key.segment) + ": " + warning);
    }
    table.params_.emplace(key, merged);
  }
  return table;
}

const demand::ChoiceParams& ParamsTable::lookup(const GroupKey& key) const {
  auto it = params_.find(key);
  if (it == params_.end()) {
    throw input_error("no choice parameters for group (" + key.origin + ", " + key.destination +
                      ", " + demand::segment_name(key.segment) + ")");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Trip groups

namespace {

const char* kShareColumns[demand::kNumModes] = {
    "share_private_vehicle", "share_public_transit", "share_on_demand",
    "share_biking",          "share_walking",        "share_carpool"};

void sort_groups(std::vector<demand::TripGroup>& groups) {
  std::sort(groups.begin(), groups.end(),
            [](const demand::TripGroup& a, const demand::TripGroup& b) {
              return std::tie(a.origin, a.destination, a.segment) <
                     std::tie(b.origin, b.destination, b.segment);
            });
  for (std::size_t i = 1; i < groups.size(); ++i) {
    const auto& a = groups[i - 1];
    const auto& b = groups[i];
    if (a.origin == b.origin && a.destination == b.destination && a.segment == b.segment) {
      throw input_error("duplicate trip group (" + a.origin + ", " + a.destination + ", " +
                        demand::segment_name(a.segment) + ")");
    }
  }
}

}  // namespace

std::vector<demand::TripGroup> load_groups_csv(const std::filesystem::path& path,
                                               const std::vector<std::string>& period_labels) {
  std::vector<demand::TripGroup> groups;
  csv::Reader r(path);
  while (r.next()) {
    demand::TripGroup g;
    g.origin = r.get_string("origin_id");
    g.destination = r.get_string("destination_id");
    g.segment = demand::parse_segment(r.get_string("segment"));
    g.trips = r.get_double("trips");
    if (g.trips <= 0) throw input_error(r.location() + ": trips must be positive");
    for (int m = 0; m < demand::kNumModes; ++m) g.shares[m] = r.get_double(kShareColumns[m]);
    try {
      demand::validate_shares(g.shares);
    } catch (const input_error& e) {
      throw input_error(r.location() + ": " + e.what());
    }
    g.avg_auto_miles = r.get_optional_double("avg_auto_miles");
    g.fare_usd = r.get_double("fare_usd");
    g.auto_cost_usd = r.get_double("auto_cost_usd");
    g.base_access_min = r.get_double("base_access_min");
    g.base_egress_min = r.get_double("base_egress_min");
    g.base_ivt_min = r.get_double("base_ivt_min");
    g.base_transfers = r.get_double("base_transfers");
    double weight_sum = 0.0;
    for (const auto& label : period_labels) {
      double w = r.get_double("weight_" + label);
      if (w < 0) throw input_error(r.location() + ": negative period weight");
      g.period_weights.push_back(w);
      weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-6) {
      throw input_error(r.location() + ": period weights sum to " + format_double(weight_sum));
    }
    for (double& w : g.period_weights) w /= weight_sum;
    groups.push_back(std::move(g));
  }
  if (groups.empty()) stage_log("groups", "warning: " + path.string() + " contains no trip groups");
  sort_groups(groups);
  return groups;
}

std::vector<demand::TripGroup> ingest_agenda_csv(
    const std::filesystem::path& path, const std::vector<gtfs::ServiceInterval>& intervals) {
  struct Tally {
    double trips = 0.0;
    std::array<double, demand::kNumModes> mode_trips{};
    std::vector<double> period_trips;
    double auto_miles_sum = 0.0;
    double auto_miles_n = 0.0;
    double fare_sum = 0.0;
    double auto_cost_sum = 0.0;
    double at_sum = 0.0, et_sum = 0.0, ivt_sum = 0.0, nt_sum = 0.0;
  };
  std::map<GroupKey, Tally> tallies;

  auto period_of = [&](int depart_s) -> int {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      for (int t : {depart_s, depart_s + 24 * 3600}) {
        if (t >= intervals[i].start_s && t < intervals[i].end_s) return static_cast<int>(i);
      }
    }
    return -1;
  };

  csv::Reader r(path);
  while (r.next()) {
    GroupKey key{r.get_string("origin_id"), r.get_string("destination_id"),
                 demand::parse_segment(r.get_string("segment"))};
    Tally& t = tallies[key];
    if (t.period_trips.empty()) t.period_trips.assign(intervals.size(), 0.0);
    t.trips += 1.0;
    t.mode_trips[static_cast<int>(demand::parse_mode(r.get_string("mode")))] += 1.0;
    int depart_s;
    try {
      depart_s = gtfs::parse_gtfs_time(r.get_string("depart_time"));
    } catch (const input_error& e) {
      throw input_error(r.location() + ": " + e.what());
    }
    if (int p = period_of(depart_s); p >= 0) t.period_trips[p] += 1.0;
    if (r.has_column("auto_miles")) {
      if (auto miles = r.get_optional_double("auto_miles")) {
        t.auto_miles_sum += *miles;
        t.auto_miles_n += 1.0;
      }
    }
    if (r.has_column("fare_usd")) t.fare_sum += r.get_double("fare_usd");
    if (r.has_column("auto_cost_usd")) t.auto_cost_sum += r.get_double("auto_cost_usd");
    if (r.has_column("base_access_min")) t.at_sum += r.get_double("base_access_min");
    if (r.has_column("base_egress_min")) t.et_sum += r.get_double("base_egress_min");
    if (r.has_column("base_ivt_min")) t.ivt_sum += r.get_double("base_ivt_min");
    if (r.has_column("base_transfers")) t.nt_sum += r.get_double("base_transfers");
  }

  std::vector<demand::TripGroup> groups;
  for (auto& [key, t] : tallies) {
    demand::TripGroup g;
    g.origin = key.origin;
    g.destination = key.destination;
    g.segment = key.segment;
    g.trips = t.trips;
    for (int m = 0; m < demand::kNumModes; ++m) g.shares[m] = t.mode_trips[m] / t.trips;
    double mapped = 0.0;
    for (double p : t.period_trips) mapped += p;
    g.period_weights.resize(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      // Departures outside every interval carry no weight; an all-unmapped
      // group falls back to uniform weights.
      g.period_weights[i] =
          mapped > 0 ? t.period_trips[i] / mapped : 1.0 / static_cast<double>(intervals.size());
    }
    if (t.auto_miles_n > 0) g.avg_auto_miles = t.auto_miles_sum / t.auto_miles_n;
    g.fare_usd = t.fare_sum / t.trips;
    g.auto_cost_usd = t.auto_cost_sum / t.trips;
    g.base_access_min = t.at_sum / t.trips;
    g.base_egress_min = t.et_sum / t.trips;
    g.base_ivt_min = t.ivt_sum / t.trips;
    g.base_transfers = t.nt_sum / t.trips;
    groups.push_back(std::move(g));
  }
  if (groups.empty()) stage_log("groups", "warning: " + path.string() + " contains no trips");
  sort_groups(groups);
  return groups;
}

void write_groups_csv(const std::vector<demand::TripGroup>& groups,
                      const std::vector<std::string>& period_labels,
                      const std::filesystem::path& path) {
  csv::Writer w(path);
  std::vector<std::string> header{"origin_id", "destination_id", "segment", "trips"};
  for (const char* c : kShareColumns) header.push_back(c);
  header.insert(header.end(), {"avg_auto_miles", "fare_usd", "auto_cost_usd", "base_access_min",
                               "base_egress_min", "base_ivt_min", "base_transfers"});
  for (const auto& label : period_labels) header.push_back("weight_" + label);
  w.row(header);
  for (const auto& g : groups) {
    std::vector<std::string> row{g.origin, g.destination, demand::segment_name(g.segment),
                                 format_double(g.trips)};
    for (double share : g.shares) row.push_back(format_double(share));
    row.push_back(g.avg_auto_miles ? format_double(*g.avg_auto_miles) : "");
    row.push_back(format_double(g.fare_usd));
    row.push_back(format_double(g.auto_cost_usd));
    row.push_back(format_double(g.base_access_min));
    row.push_back(format_double(g.base_egress_min));
    row.push_back(format_double(g.base_ivt_min));
    row.push_back(format_double(g.base_transfers));
    for (double weight : g.period_weights) row.push_back(format_double(weight));
    w.row(row);
  }
}

// ---------------------------------------------------------------------------
// Stages

NetworkBundle stage_synth(const ScenarioConfig& config) {
  const auto paths = scenario_paths(config);
  NetworkBundle nets;
  nets.line = gtfs::load_line_config(config.line_config);
  nets.base = gtfs::parse_feed(config.base_gtfs_dir);
  nets.overlay = gtfs::build_synthetic_schedule(nets.line.route, nets.line.plan);
  gtfs::write_feed(nets.overlay, paths.synth_gtfs);
  if (config.include_overlay) {
    nets.alt = gtfs::merge_feeds(nets.base, nets.overlay, config.overlay_prefix);
  } else {
    nets.alt = nets.base;
  }
  gtfs::write_feed(nets.alt, paths.alt_gtfs);
  stage_log("synth", "base " + std::to_string(nets.base.trips.size()) + " trips, overlay " +
                         std::to_string(nets.overlay.trips.size()) + " trips, alt " +
                         std::to_string(nets.alt.trips.size()) + " trips");
  return nets;
}

std::vector<skim::DeltaMatrix> stage_skim(const ScenarioConfig& config,
                                          const NetworkBundle& networks) {
  const auto paths = scenario_paths(config);
  std::filesystem::create_directories(paths.skims);
  const auto zones = skim::load_zones(config.zones_csv);

  const skim::Timetable tt_base = skim::Timetable::build(networks.base, config.service_weekday);
  const skim::Timetable tt_alt = skim::Timetable::build(networks.alt, config.service_weekday);
  const std::uint64_t base_hash = feed_hash(networks.base);
  const std::uint64_t alt_hash = feed_hash(networks.alt);

  skim::SkimOptions options;
  options.sampling_step_min = config.sampling_step_min;
  options.max_transfers = config.max_transfers;
  options.workers = config.workers;

  auto skim_one = [&](const skim::Timetable& tt, std::uint64_t net_hash,
                      const gtfs::ServiceInterval& period,
                      const std::string& prefix) -> skim::SkimMatrix {
    const std::uint64_t key = skim_key(net_hash, config, zones, period);
    const auto cache_path = paths.skims / (prefix + "_" + period.label + ".skim");
    if (config.use_cache) {
      if (auto cached = skim::read_skim_cache(cache_path, key)) {
        stage_log("skim", prefix + " " + period.label + ": cache hit");
        return *cached;
      }
    }
    skim::SkimMatrix m =
        skim::compute_skim(tt, zones, period.label, period.start_s, period.end_s, config.walk,
                           options);
    if (config.use_cache) skim::write_skim_cache(m, key, cache_path);
    return m;
  };

  std::vector<skim::DeltaMatrix> deltas;
  for (const auto& period : networks.line.plan.intervals) {
    const auto t0 = std::chrono::steady_clock::now();
    skim::SkimMatrix base = skim_one(tt_base, base_hash, period, "base");
    skim::SkimMatrix alt = skim_one(tt_alt, alt_hash, period, "alt");
    skim::write_skim_csv(base, paths.skims / ("base_" + period.label + ".csv"));
    skim::write_skim_csv(alt, paths.skims / ("alt_" + period.label + ".csv"));
    skim::DeltaMatrix delta = skim::delta_skim(base, alt, config.newly_connected_ceiling_min);
    skim::write_delta_csv(delta, paths.skims / ("delta_" + period.label + ".csv"));
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    stage_log("skim", period.label + ": " + std::to_string(zones.size()) + "x" +
                          std::to_string(zones.size()) + " ODs, " + std::to_string(ms) + " ms");
    deltas.push_back(std::move(delta));
  }
  return deltas;
}

std::vector<skim::DeltaMatrix> load_deltas(const ScenarioConfig& config) {
  const auto paths = scenario_paths(config);
  const auto line = gtfs::load_line_config(config.line_config);
  std::vector<skim::DeltaMatrix> deltas;
  for (const auto& period : line.plan.intervals) {
    const auto path = paths.skims / ("delta_" + period.label + ".csv");
    if (!std::filesystem::exists(path)) {
      throw input_error("missing " + path.string() + "; run the skim stage first");
    }
    deltas.push_back(skim::read_delta_csv(path));
  }
  return deltas;
}

EvaluateResult stage_evaluate(const ScenarioConfig& config,
                              const std::vector<skim::DeltaMatrix>& deltas) {
  const auto paths = scenario_paths(config);
  const auto line = gtfs::load_line_config(config.line_config);
  const auto zones = skim::load_zones(config.zones_csv);
  const ParamsTable params = ParamsTable::load(config.params_csv, zones);

  std::vector<std::string> period_labels;
  for (const auto& iv : line.plan.intervals) period_labels.push_back(iv.label);

  std::vector<demand::TripGroup> groups;
  if (!config.groups_csv.empty()) {
    groups = load_groups_csv(config.groups_csv, period_labels);
  } else {
    groups = ingest_agenda_csv(config.agenda_csv, line.plan.intervals);
    write_groups_csv(groups, period_labels, paths.root / "groups_normalized.csv");
  }

  std::map<std::string, std::size_t> zone_index;
  std::map<std::string, bool> corridor;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    zone_index[zones[i].id] = i;
    corridor[zones[i].id] = zones[i].in_corridor;
  }
  for (const auto& delta : deltas) {
    if (delta.zone_ids.size() != zones.size()) {
      throw stage_error("evaluate", "delta matrix zone set does not match zones_csv");
    }
  }

  EvaluateResult result;
  result.records.reserve(groups.size());
  const int transit = static_cast<int>(demand::Mode::PublicTransit);

  for (const auto& group : groups) {
    auto oit = zone_index.find(group.origin);
    auto dit = zone_index.find(group.destination);
    if (oit == zone_index.end() || dit == zone_index.end()) {
      throw input_error("trip group (" + group.origin + ", " + group.destination +
                        ") references a zone missing from zones_csv");
    }
    const demand::ChoiceParams& p = params.lookup({group.origin, group.destination, group.segment});

    GroupRecord rec;
    rec.group = group;
    rec.origin_corridor = corridor.at(group.origin);
    rec.destination_corridor = corridor.at(group.destination);
    rec.shares_after = group.shares;

    std::vector<demand::ComponentDelta> period_deltas(deltas.size());
    std::vector<char> usable(deltas.size(), 0);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const skim::DeltaCell& cell = deltas[i].at(oit->second, dit->second);
      if (cell.status == skim::DeltaStatus::Excluded) continue;
      usable[i] = 1;
      if (cell.status == skim::DeltaStatus::NewlyConnected) rec.newly_connected = true;
      period_deltas[i] = {cell.access_min, cell.egress_min, cell.ivt_min};
    }

    const auto daily = demand::group_daily_delta(period_deltas, usable, group.period_weights);
    rec.delta_defined = daily.has_value();
    if (daily) rec.daily_delta = *daily;
    rec.benefiting = daily && daily->total() < 0.0;

    const double p_before = group.shares[transit];
    double p_after = p_before;
    if (rec.benefiting) {
      p_after = demand::transit_share_update(p, p_before, daily->access_min, daily->egress_min,
                                             daily->ivt_min);
      rec.shares_after = demand::rescale_other_modes(group.shares, p_before, p_after);
      rec.ridership = demand::attribute_ridership(group.trips, p_after, daily->total());
      rec.transit_increase = group.trips * (p_after - p_before);
      for (int m = 0; m < demand::kNumModes; ++m) {
        if (m == transit) continue;
        rec.switched_from[m] = group.trips * (group.shares[m] - rec.shares_after[m]);
      }
      const double auto_switch =
          rec.switched_from[static_cast<int>(demand::Mode::PrivateVehicle)];
      if (auto_switch != 0.0) {
        if (!group.avg_auto_miles) {
          throw stage_error("evaluate", "group (" + group.origin + ", " + group.destination +
                                            ", " + demand::segment_name(group.segment) +
                                            ") switches auto trips but has no avg_auto_miles");
        }
        rec.ghg_grams = auto_switch * *group.avg_auto_miles * config.emission_grams_per_mile;
      }
    }

    // Welfare accounting needs a usable transit share on both sides.
    if (p_before > 0.0 && p_after > 0.0) {
      rec.cs_accounted = true;
      const double v_transit = welfare::transit_utility(
          p, group.base_access_min, group.base_egress_min, group.base_ivt_min,
          group.base_transfers, group.fare_usd);
      rec.cs_pre = welfare::expected_cs(p, v_transit, p_before);
      if (rec.benefiting) {
        rec.delta_cs = welfare::delta_cs(p, p_before, p_after, daily->access_min,
                                         daily->egress_min, daily->ivt_min);
      }
      rec.cs_post = rec.cs_pre + rec.delta_cs;
      welfare::WelfareRecord w;
      w.origin = group.origin;
      w.destination = group.destination;
      w.segment = group.segment;
      w.trips = group.trips;
      w.cs_pre = rec.cs_pre;
      w.delta_cs = rec.delta_cs;
      w.cs_post = rec.cs_post;
      w.low_income = rec.low_income();
      w.corridor = rec.corridor();
      result.welfare.push_back(std::move(w));
    } else {
      stage_log("evaluate", "group (" + group.origin + ", " + group.destination + ", " +
                                demand::segment_name(group.segment) +
                                ") excluded from consumer surplus accounting (transit share " +
                                (p_before > 0.0 ? "driven to 0)" : "is 0)"));
    }

    result.records.push_back(std::move(rec));
  }

  write_per_group_csv(result.records, paths.per_group_csv);
  write_welfare_csv(result.welfare, paths.welfare_csv);
  stage_log("evaluate", std::to_string(result.records.size()) + " groups, " +
                            std::to_string(result.welfare.size()) + " in welfare scope");
  return result;
}

EvaluateResult load_evaluate(const ScenarioConfig& config) {
  const auto paths = scenario_paths(config);
  if (!std::filesystem::exists(paths.per_group_csv)) {
    throw input_error("missing " + paths.per_group_csv.string() + "; run the evaluate stage first");
  }
  EvaluateResult result;
  result.records = read_per_group_csv(paths.per_group_csv);
  result.welfare = read_welfare_csv(paths.welfare_csv);
  return result;
}

std::optional<welfare::EquityReport> stage_equity(const ScenarioConfig& config,
                                                  const EvaluateResult& evaluated) {
  const auto paths = scenario_paths(config);
  std::ofstream out(paths.equity_json, std::ios::binary);
  if (!out) throw input_error("cannot write " + paths.equity_json.string());
  if (evaluated.welfare.empty()) {
    out << "{\n  \"no_trips\": true\n}\n";
    stage_log("equity", "no welfare records; wrote placeholder report");
    return std::nullopt;
  }
  welfare::EquityReport report =
      welfare::equity_report(evaluated.welfare, config.equity_threshold_fracs);
  out << welfare::equity_report_json(report);
  stage_log("equity", "csdi " + format_double(report.csdi_pre) + " -> " +
                          format_double(report.csdi_post));
  return report;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto paths = scenario_paths(config);
  std::filesystem::create_directories(paths.root);
  OutputLock lock(paths.lock_file);

  auto timed = [](const std::string& stage, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = fn();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    stage_log(stage, "done in " + std::to_string(ms) + " ms");
    return result;
  };

  try {
    NetworkBundle nets = timed("synth", [&] { return stage_synth(config); });
    std::vector<skim::DeltaMatrix> deltas =
        timed("skim", [&] { return stage_skim(config, nets); });
    EvaluateResult evaluated =
        timed("evaluate", [&] { return stage_evaluate(config, deltas); });
    std::optional<welfare::EquityReport> equity =
        timed("equity", [&] { return stage_equity(config, evaluated); });

    const auto zones = skim::load_zones(config.zones_csv);
    timed("report", [&] {
      export_report(evaluated.records, equity, zones, paths.report_dir);
      return 0;
    });

    // Run manifest: content-addressed inputs and row counts, no wall-clock
    // data so reruns stay byte-identical.
    nlohmann::json manifest;
    manifest["tool"] = "lineval";
    manifest["format_version"] = 1;
    manifest["inputs"] = {
        {"base_gtfs", hex64(feed_hash(nets.base))},
        {"line_config", hex64(fnv1a64(read_file(config.line_config)))},
        {"zones_csv", hex64(fnv1a64(read_file(config.zones_csv)))},
        {"params_csv", hex64(fnv1a64(read_file(config.params_csv)))},
        {"demand_csv", hex64(fnv1a64(read_file(
                           config.groups_csv.empty() ? config.agenda_csv : config.groups_csv)))},
    };
    manifest["counts"] = {
        {"zones", zones.size()},
        {"groups", evaluated.records.size()},
        {"welfare_records", evaluated.welfare.size()},
        {"periods", nets.line.plan.intervals.size()},
        {"base_trips", nets.base.trips.size()},
        {"overlay_trips", nets.overlay.trips.size()},
        {"alt_trips", nets.alt.trips.size()},
    };
    manifest["settings"] = {
        {"include_overlay", config.include_overlay},
        {"sampling_step_min", config.sampling_step_min},
        {"max_transfers", config.max_transfers},
        {"newly_connected_ceiling_min", config.newly_connected_ceiling_min},
        {"emission_grams_per_mile", config.emission_grams_per_mile},
        {"equity_threshold_fracs", config.equity_threshold_fracs},
        {"service_weekday", gtfs::weekday_name(config.service_weekday)},
        {"walk",
         {{"speed_mps", config.walk.speed_mps},
          {"detour_factor", config.walk.detour_factor},
          {"max_radius_m", config.walk.max_radius_m},
          {"transfer_radius_m", config.walk.transfer_radius_m}}},
        {"workers", config.workers},
        {"use_cache", config.use_cache},
        {"seed", config.seed},
    };
    std::ofstream out(paths.manifest_json, std::ios::binary);
    out << manifest.dump(2) << "\n";

    return ScenarioResult{std::move(evaluated.records), std::move(evaluated.welfare),
                          std::move(equity)};
  } catch (const input_error&) {
    throw;
  } catch (const stage_error&) {
    throw;
  } catch (const std::exception& e) {
    throw stage_error("run", e.what());
  }
}

}  // namespace lineval::pipeline
