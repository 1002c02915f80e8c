#include "lineval/report.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "lineval/common.hpp"
#include "lineval/csv.hpp"

namespace lineval::pipeline {

namespace {

const char* kShareBefore[demand::kNumModes] = {
    "share_before_private_vehicle", "share_before_public_transit", "share_before_on_demand",
    "share_before_biking",          "share_before_walking",        "share_before_carpool"};
const char* kShareAfter[demand::kNumModes] = {
    "share_after_private_vehicle", "share_after_public_transit", "share_after_on_demand",
    "share_after_biking",          "share_after_walking",        "share_after_carpool"};
const char* kSwitchColumns[demand::kNumModes] = {
    "switch_from_private_vehicle", "", "switch_from_on_demand",
    "switch_from_biking",          "switch_from_walking", "switch_from_carpool"};

}  // namespace

void write_per_group_csv(const std::vector<GroupRecord>& records,
                         const std::filesystem::path& path) {
  csv::Writer w(path);
  std::vector<std::string> header{"origin_id",        "destination_id",
                                  "segment",          "trips",
                                  "origin_corridor",  "destination_corridor",
                                  "delta_defined",    "newly_connected",
                                  "benefiting",       "d_access_min",
                                  "d_egress_min",     "d_ivt_min",
                                  "d_total_min"};
  for (const char* c : kShareBefore) header.push_back(c);
  for (const char* c : kShareAfter) header.push_back(c);
  header.insert(header.end(), {"ridership", "transit_increase"});
  for (int m = 0; m < demand::kNumModes; ++m) {
    if (m != static_cast<int>(demand::Mode::PublicTransit)) header.push_back(kSwitchColumns[m]);
  }
  header.insert(header.end(),
                {"ghg_grams", "cs_accounted", "cs_pre_usd", "delta_cs_usd", "cs_post_usd"});
  w.row(header);

  for (const auto& r : records) {
    std::vector<std::string> row{r.group.origin,
                                 r.group.destination,
                                 demand::segment_name(r.group.segment),
                                 format_double(r.group.trips),
                                 r.origin_corridor ? "1" : "0",
                                 r.destination_corridor ? "1" : "0",
                                 r.delta_defined ? "1" : "0",
                                 r.newly_connected ? "1" : "0",
                                 r.benefiting ? "1" : "0",
                                 format_double(r.daily_delta.access_min),
                                 format_double(r.daily_delta.egress_min),
                                 format_double(r.daily_delta.ivt_min),
                                 format_double(r.daily_delta.total())};
    for (double p : r.group.shares) row.push_back(format_double(p));
    for (double p : r.shares_after) row.push_back(format_double(p));
    row.push_back(format_double(r.ridership));
    row.push_back(format_double(r.transit_increase));
    for (int m = 0; m < demand::kNumModes; ++m) {
      if (m != static_cast<int>(demand::Mode::PublicTransit)) {
        row.push_back(format_double(r.switched_from[m]));
      }
    }
    row.push_back(format_double(r.ghg_grams));
    row.push_back(r.cs_accounted ? "1" : "0");
    row.push_back(format_double(r.cs_pre));
    row.push_back(format_double(r.delta_cs));
    row.push_back(format_double(r.cs_post));
    w.row(row);
  }
}

std::vector<GroupRecord> read_per_group_csv(const std::filesystem::path& path) {
  std::vector<GroupRecord> records;
  csv::Reader r(path);
  while (r.next()) {
    GroupRecord rec;
    rec.group.origin = r.get_string("origin_id");
    rec.group.destination = r.get_string("destination_id");
    rec.group.segment = demand::parse_segment(r.get_string("segment"));
    rec.group.trips = r.get_double("trips");
    rec.origin_corridor = r.get_long("origin_corridor") != 0;
    rec.destination_corridor = r.get_long("destination_corridor") != 0;
    rec.delta_defined = r.get_long("delta_defined") != 0;
    rec.newly_connected = r.get_long("newly_connected") != 0;
    rec.benefiting = r.get_long("benefiting") != 0;
    rec.daily_delta.access_min = r.get_double("d_access_min");
    rec.daily_delta.egress_min = r.get_double("d_egress_min");
    rec.daily_delta.ivt_min = r.get_double("d_ivt_min");
    for (int m = 0; m < demand::kNumModes; ++m) {
      rec.group.shares[m] = r.get_double(kShareBefore[m]);
      rec.shares_after[m] = r.get_double(kShareAfter[m]);
    }
    rec.ridership = r.get_double("ridership");
    rec.transit_increase = r.get_double("transit_increase");
    for (int m = 0; m < demand::kNumModes; ++m) {
      if (m != static_cast<int>(demand::Mode::PublicTransit)) {
        rec.switched_from[m] = r.get_double(kSwitchColumns[m]);
      }
    }
    rec.ghg_grams = r.get_double("ghg_grams");
    rec.cs_accounted = r.get_long("cs_accounted") != 0;
    rec.cs_pre = r.get_double("cs_pre_usd");
    rec.delta_cs = r.get_double("delta_cs_usd");
    rec.cs_post = r.get_double("cs_post_usd");
    records.push_back(std::move(rec));
  }
  return records;
}

void write_welfare_csv(const std::vector<welfare::WelfareRecord>& records,
                       const std::filesystem::path& path) {
  csv::Writer w(path);
  w.row({"origin_id", "destination_id", "segment", "trips", "cs_pre_usd", "delta_cs_usd",
         "cs_post_usd", "low_income", "corridor"});
  for (const auto& r : records) {
    w.row({r.origin, r.destination, demand::segment_name(r.segment), format_double(r.trips),
           format_double(r.cs_pre), format_double(r.delta_cs), format_double(r.cs_post),
           r.low_income ? "1" : "0", r.corridor ? "1" : "0"});
  }
}

std::vector<welfare::WelfareRecord> read_welfare_csv(const std::filesystem::path& path) {
  std::vector<welfare::WelfareRecord> records;
  csv::Reader r(path);
  while (r.next()) {
    welfare::WelfareRecord rec;
    rec.origin = r.get_string("origin_id");
    rec.destination = r.get_string("destination_id");
    rec.segment = demand::parse_segment(r.get_string("segment"));
    rec.trips = r.get_double("trips");
    rec.cs_pre = r.get_double("cs_pre_usd");
    rec.delta_cs = r.get_double("delta_cs_usd");
    rec.cs_post = r.get_double("cs_post_usd");
    rec.low_income = r.get_long("low_income") != 0;
    rec.corridor = r.get_long("corridor") != 0;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ScopeAggregate> aggregate_scopes(const std::vector<GroupRecord>& records) {
  struct Scope {
    const char* name;
    bool (*member)(const GroupRecord&);
  };
  static const Scope kScopes[] = {
      {"all", [](const GroupRecord&) { return true; }},
      {"low_income", [](const GroupRecord& r) { return r.low_income(); }},
      {"corridor", [](const GroupRecord& r) { return r.corridor(); }},
  };

  std::vector<ScopeAggregate> out;
  for (const auto& scope : kScopes) {
    ScopeAggregate agg;
    agg.scope = scope.name;
    double saving_weighted = 0.0;
    for (const auto& r : records) {
      if (!scope.member(r)) continue;
      agg.trips += r.group.trips;
      if (r.benefiting) {
        agg.benefiting_trips += r.group.trips;
        saving_weighted += r.group.trips * (-r.daily_delta.total());
      }
      agg.ridership += r.ridership;
      agg.transit_increase += r.transit_increase;
      for (int m = 0; m < demand::kNumModes; ++m) agg.switched_from[m] += r.switched_from[m];
      agg.ghg_tons += demand::grams_to_metric_tons(r.ghg_grams);
      if (r.cs_accounted) {
        agg.cs_total_usd += r.group.trips * r.delta_cs;
        agg.cs_trips_accounted += r.group.trips;
        if (r.benefiting) agg.cs_benefiting_trips += r.group.trips;
      }
    }
    if (agg.benefiting_trips > 0) agg.mean_saving_min = saving_weighted / agg.benefiting_trips;
    if (agg.cs_trips_accounted > 0) agg.cs_per_trip_all_usd = agg.cs_total_usd / agg.cs_trips_accounted;
    if (agg.cs_benefiting_trips > 0) {
      agg.cs_per_trip_benefiting_usd = agg.cs_total_usd / agg.cs_benefiting_trips;
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {

nlohmann::json zone_layer(const std::vector<GroupRecord>& records,
                          const std::vector<skim::Zone>& zones, bool key_by_origin) {
  struct Cell {
    double riders = 0.0;
    double saving_weighted = 0.0;
    double benefiting_trips = 0.0;
    double delta_cs = 0.0;
  };
  std::map<std::string, Cell> cells;
  for (const auto& z : zones) cells[z.id];  // every zone appears
  for (const auto& r : records) {
    const std::string& key = key_by_origin ? r.group.origin : r.group.destination;
    Cell& c = cells[key];
    c.riders += r.ridership;
    if (r.benefiting) {
      c.benefiting_trips += r.group.trips;
      c.saving_weighted += r.group.trips * (-r.daily_delta.total());
    }
    if (r.cs_accounted) c.delta_cs += r.group.trips * r.delta_cs;
  }

  nlohmann::json features = nlohmann::json::array();
  for (const auto& z : zones) {
    const Cell& c = cells.at(z.id);
    nlohmann::json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Point"}, {"coordinates", {z.lon, z.lat}}};
    feature["properties"] = {
        {"zone_id", z.id},
        {"in_corridor", z.in_corridor},
        {"riders", c.riders},
        {"mean_time_saving_min",
         c.benefiting_trips > 0 ? c.saving_weighted / c.benefiting_trips : 0.0},
        {"delta_cs_usd", c.delta_cs},
    };
    features.push_back(std::move(feature));
  }
  nlohmann::json layer;
  layer["type"] = "FeatureCollection";
  layer["features"] = features;
  return layer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void export_report(const std::vector<GroupRecord>& records,
                   const std::optional<welfare::EquityReport>& equity,
                   const std::vector<skim::Zone>& zones, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw input_error("cannot create directory " + dir.string() + ": " + ec.message());

  const std::vector<ScopeAggregate> scopes = aggregate_scopes(records);
  const double total_riders = scopes.front().ridership;

  {
    csv::Writer w(dir / "time_savings_by_scope.csv");
    w.row({"scope", "benefiting_trips", "mean_saving_min_per_trip"});
    for (const auto& s : scopes) {
      w.row({s.scope, format_double(s.benefiting_trips), format_double(s.mean_saving_min)});
    }
  }
  {
    csv::Writer w(dir / "ridership_by_scope.csv");
    w.row({"scope", "new_line_riders", "share_of_total"});
    for (const auto& s : scopes) {
      w.row({s.scope, format_double(s.ridership),
             format_double(total_riders > 0 ? s.ridership / total_riders : 0.0)});
    }
  }
  {
    csv::Writer w(dir / "mode_shift.csv");
    w.row({"scope", "transit_increase", "from_private_vehicle", "from_on_demand", "from_biking",
           "from_walking", "from_carpool", "ghg_tons_per_day"});
    for (const auto& s : scopes) {
      w.row({s.scope, format_double(s.transit_increase),
             format_double(s.switched_from[static_cast<int>(demand::Mode::PrivateVehicle)]),
             format_double(s.switched_from[static_cast<int>(demand::Mode::OnDemand)]),
             format_double(s.switched_from[static_cast<int>(demand::Mode::Biking)]),
             format_double(s.switched_from[static_cast<int>(demand::Mode::Walking)]),
             format_double(s.switched_from[static_cast<int>(demand::Mode::Carpool)]),
             format_double(s.ghg_tons)});
    }
  }
  {
    csv::Writer w(dir / "cs_per_trip_by_scope.csv");
    w.row({"scope", "total_delta_cs_usd", "trips_accounted", "per_trip_all_usd",
           "benefiting_trips_accounted", "per_trip_benefiting_usd"});
    for (const auto& s : scopes) {
      w.row({s.scope, format_double(s.cs_total_usd), format_double(s.cs_trips_accounted),
             format_double(s.cs_per_trip_all_usd), format_double(s.cs_benefiting_trips),
             format_double(s.cs_per_trip_benefiting_usd)});
    }
  }
  {
    csv::Writer w(dir / "equity_report.csv");
    w.row({"metric", "threshold_frac", "scope", "pre", "post", "delta"});
    if (equity) {
      w.row({"csdi", "", "low_income_vs_all", format_double(equity->csdi_pre),
             format_double(equity->csdi_post),
             format_double(equity->csdi_post - equity->csdi_pre)});
      for (const auto& t : equity->thresholds) {
        const std::string frac = format_double(t.threshold_frac);
        w.row({"csii", frac, "low_income", format_double(t.csii_low_pre),
               format_double(t.csii_low_post), format_double(t.csii_low_post - t.csii_low_pre)});
        w.row({"csii", frac, "all", format_double(t.csii_all_pre), format_double(t.csii_all_post),
               format_double(t.csii_all_post - t.csii_all_pre)});
        w.row({"insufficiency_rate", frac, "low_income", format_double(t.rate_low_pre),
               format_double(t.rate_low_post), format_double(t.rate_low_post - t.rate_low_pre)});
        w.row({"insufficiency_rate", frac, "all", format_double(t.rate_all_pre),
               format_double(t.rate_all_post), format_double(t.rate_all_post - t.rate_all_pre)});
      }
    }
  }

  write_text(dir / "by_origin.geojson", zone_layer(records, zones, true).dump(2) + "\n");
  write_text(dir / "by_destination.geojson", zone_layer(records, zones, false).dump(2) + "\n");
}

}  // namespace lineval::pipeline
