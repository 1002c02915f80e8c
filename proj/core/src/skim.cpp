#include "lineval/skim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <tuple>
#include <unordered_map>

#include "lineval/common.hpp"
#include "lineval/csv.hpp"
#include "lineval/geo.hpp"

namespace lineval::skim {

std::vector<Zone> load_zones(const std::filesystem::path& path) {
  std::vector<Zone> zones;
  csv::Reader r(path);
  const bool has_corridor = r.has_column("in_corridor");
  while (r.next()) {
    Zone z;
    z.id = r.get_string("zone_id");
    z.lat = r.get_double("lat");
    z.lon = r.get_double("lon");
    if (z.lat < -90.0 || z.lat > 90.0 || z.lon < -180.0 || z.lon > 180.0) {
      throw input_error(r.location() + ": coordinates out of range for zone '" + z.id + "'");
    }
    if (has_corridor) z.in_corridor = r.get_long("in_corridor") != 0;
    zones.push_back(std::move(z));
  }
  for (std::size_t i = 1; i < zones.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (zones[i].id == zones[j].id) {
        throw input_error(path.string() + ": duplicate zone id '" + zones[i].id + "'");
      }
    }
  }
  return zones;
}

std::vector<AccessLink> access_candidates(const Zone& zone, const Timetable& tt,
                                          const WalkParams& walk) {
  if (walk.speed_mps <= 0) throw input_error("walk speed must be positive");
  if (walk.max_radius_m <= 0) throw input_error("walk radius must be positive");
  std::vector<AccessLink> links;
  for (int s = 0; s < tt.stop_count(); ++s) {
    const double walk_m =
        geo::haversine_m(zone.lat, zone.lon, tt.stop_lats()[s], tt.stop_lons()[s]) *
        walk.detour_factor;
    if (walk_m <= walk.max_radius_m) {
      links.push_back({s, static_cast<int>(std::llround(walk_m / walk.speed_mps))});
    }
  }
  return links;
}

FootpathTable build_footpaths(const Timetable& tt, const WalkParams& walk) {
  FootpathTable table(tt.stop_count());
  if (walk.transfer_radius_m <= 0) return table;
  if (walk.speed_mps <= 0) throw input_error("walk speed must be positive");
  for (int a = 0; a < tt.stop_count(); ++a) {
    for (int b = 0; b < tt.stop_count(); ++b) {
      if (a == b) continue;
      const double walk_m =
          geo::haversine_m(tt.stop_lats()[a], tt.stop_lons()[a], tt.stop_lats()[b],
                           tt.stop_lons()[b]) *
          walk.detour_factor;
      if (walk_m <= walk.transfer_radius_m) {
        table[a].push_back({b, static_cast<int>(std::llround(walk_m / walk.speed_mps))});
      }
    }
  }
  return table;
}

SkimMatrix compute_skim(const Timetable& tt, const std::vector<Zone>& zones,
                        const std::string& period_label, int period_start_s, int period_end_s,
                        const WalkParams& walk, const SkimOptions& options) {
  if (zones.empty()) throw input_error("compute_skim: empty zone set");
  if (period_end_s <= period_start_s) throw input_error("compute_skim: empty period");
  if (options.sampling_step_min <= 0) throw input_error("compute_skim: sampling step must be positive");

  const std::size_t n = zones.size();
  SkimMatrix skim;
  skim.period = period_label;
  skim.zone_ids.reserve(n);
  for (const auto& z : zones) skim.zone_ids.push_back(z.id);
  skim.cells.assign(n * n, SkimCell{});

  std::vector<std::vector<AccessLink>> links(n);
  for (std::size_t i = 0; i < n; ++i) links[i] = access_candidates(zones[i], tt, walk);
  const FootpathTable footpaths = build_footpaths(tt, walk);

  std::vector<int> samples;
  for (int t = period_start_s; t < period_end_s; t += options.sampling_step_min * 60) {
    samples.push_back(t);
  }

  parallel_for(n, options.workers, [&](std::size_t origin) {
    if (links[origin].empty()) return;  // row stays unreachable
    Router router(tt, footpaths, options.max_transfers);

    // Integer component sums keep the means independent of summation order.
    struct Accum {
      long long access = 0, egress = 0, ivt = 0, transfers = 0;
      int feasible = 0;
    };
    std::vector<Accum> acc(n);

    for (int depart : samples) {
      router.run(links[origin], depart);
      for (std::size_t dest = 0; dest < n; ++dest) {
        if (links[dest].empty()) continue;
        if (auto j = router.extract(links[dest])) {
          acc[dest].access += j->access_s;
          acc[dest].egress += j->egress_s;
          acc[dest].ivt += j->ivt_s;
          acc[dest].transfers += j->transfers;
          ++acc[dest].feasible;
        }
      }
    }

    for (std::size_t dest = 0; dest < n; ++dest) {
      if (acc[dest].feasible == 0) continue;
      SkimCell& cell = skim.at(origin, dest);
      const double k = acc[dest].feasible;
      cell.access_s = acc[dest].access / k;
      cell.egress_s = acc[dest].egress / k;
      cell.ivt_s = acc[dest].ivt / k;
      cell.transfers = acc[dest].transfers / k;
      cell.reachable = true;
    }
  });

  return skim;
}

DeltaMatrix delta_skim(const SkimMatrix& base, const SkimMatrix& alt, double ceiling_min) {
  if (base.zone_ids != alt.zone_ids) throw input_error("delta_skim: zone sets differ");
  const std::size_t n = base.zone_ids.size();
  DeltaMatrix delta;
  delta.period = alt.period;
  delta.zone_ids = base.zone_ids;
  delta.cells.assign(n * n, DeltaCell{});

  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t d = 0; d < n; ++d) {
      const SkimCell& b = base.at(o, d);
      const SkimCell& a = alt.at(o, d);
      DeltaCell& out = delta.at(o, d);
      if (!a.reachable) {
        // Losing service never happens under pure-overlay scenarios; if the
        // alt network drops the OD anyway, exclude it.
        out.status = DeltaStatus::Excluded;
        continue;
      }
      double base_at, base_et, base_ivt;
      if (b.reachable) {
        out.status = DeltaStatus::Ok;
        base_at = b.access_s / 60.0;
        base_et = b.egress_s / 60.0;
        base_ivt = b.ivt_s / 60.0;
      } else {
        out.status = DeltaStatus::NewlyConnected;
        const double alt_total = (a.access_s + a.egress_s + a.ivt_s) / 60.0;
        if (alt_total > 0) {
          const double scale = ceiling_min / alt_total;
          base_at = a.access_s / 60.0 * scale;
          base_et = a.egress_s / 60.0 * scale;
          base_ivt = a.ivt_s / 60.0 * scale;
        } else {
          base_at = 0.0;
          base_et = 0.0;
          base_ivt = ceiling_min;
        }
      }
      out.access_min = a.access_s / 60.0 - base_at;
      out.egress_min = a.egress_s / 60.0 - base_et;
      out.ivt_min = a.ivt_s / 60.0 - base_ivt;
      out.total_min = out.access_min + out.egress_min + out.ivt_min;
    }
  }
  return delta;
}

void write_skim_csv(const SkimMatrix& skim, const std::filesystem::path& path) {
  csv::Writer w(path);
  w.row({"period", "origin", "destination", "access_s", "egress_s", "ivt_s", "transfers",
         "reachable"});
  const std::size_t n = skim.zone_ids.size();
  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t d = 0; d < n; ++d) {
      const SkimCell& c = skim.at(o, d);
      w.row({skim.period, skim.zone_ids[o], skim.zone_ids[d], format_double(c.access_s),
             format_double(c.egress_s), format_double(c.ivt_s), format_double(c.transfers),
             c.reachable ? "1" : "0"});
    }
  }
}

SkimMatrix read_skim_csv(const std::filesystem::path& path) {
  SkimMatrix skim;
  std::vector<std::tuple<std::string, std::string, SkimCell>> rows;
  std::unordered_map<std::string, std::size_t> zone_index;
  csv::Reader r(path);
  while (r.next()) {
    if (skim.period.empty()) skim.period = r.get_string("period");
    SkimCell c;
    c.access_s = r.get_double("access_s");
    c.egress_s = r.get_double("egress_s");
    c.ivt_s = r.get_double("ivt_s");
    c.transfers = r.get_double("transfers");
    c.reachable = r.get_long("reachable") != 0;
    std::string origin = r.get_string("origin");
    if (!zone_index.count(origin)) {
      zone_index[origin] = skim.zone_ids.size();
      skim.zone_ids.push_back(origin);
    }
    rows.emplace_back(std::move(origin), r.get_string("destination"), c);
  }
  const std::size_t n = skim.zone_ids.size();
  if (rows.size() != n * n) throw input_error(path.string() + ": not a dense OD table");
  skim.cells.assign(n * n, SkimCell{});
  for (auto& [o, d, c] : rows) {
    auto dit = zone_index.find(d);
    if (dit == zone_index.end()) throw input_error(path.string() + ": unknown destination '" + d + "'");
    skim.at(zone_index.at(o), dit->second) = c;
  }
  return skim;
}

void write_delta_csv(const DeltaMatrix& delta, const std::filesystem::path& path) {
  csv::Writer w(path);
  w.row({"period", "origin", "destination", "d_access_min", "d_egress_min", "d_ivt_min",
         "d_total_min", "status"});
  const std::size_t n = delta.zone_ids.size();
  auto status_name = [](DeltaStatus s) -> std::string {
    switch (s) {
      case DeltaStatus::Ok: return "ok";
      case DeltaStatus::NewlyConnected: return "newly_connected";
      default: return "excluded";
    }
  };
  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t d = 0; d < n; ++d) {
      const DeltaCell& c = delta.at(o, d);
      w.row({delta.period, delta.zone_ids[o], delta.zone_ids[d], format_double(c.access_min),
             format_double(c.egress_min), format_double(c.ivt_min), format_double(c.total_min),
             status_name(c.status)});
    }
  }
}

DeltaMatrix read_delta_csv(const std::filesystem::path& path) {
  DeltaMatrix delta;
  std::vector<std::tuple<std::string, std::string, DeltaCell>> rows;
  std::unordered_map<std::string, std::size_t> zone_index;
  csv::Reader r(path);
  while (r.next()) {
    if (delta.period.empty()) delta.period = r.get_string("period");
    DeltaCell c;
    c.access_min = r.get_double("d_access_min");
    c.egress_min = r.get_double("d_egress_min");
    c.ivt_min = r.get_double("d_ivt_min");
    c.total_min = r.get_double("d_total_min");
    std::string status = r.get_string("status");
    if (status == "ok") c.status = DeltaStatus::Ok;
    else if (status == "newly_connected") c.status = DeltaStatus::NewlyConnected;
    else if (status == "excluded") c.status = DeltaStatus::Excluded;
    else throw input_error(r.location() + ": unknown status '" + status + "'");
    std::string origin = r.get_string("origin");
    if (!zone_index.count(origin)) {
      zone_index[origin] = delta.zone_ids.size();
      delta.zone_ids.push_back(origin);
    }
    rows.emplace_back(std::move(origin), r.get_string("destination"), c);
  }
  const std::size_t n = delta.zone_ids.size();
  if (rows.size() != n * n) throw input_error(path.string() + ": not a dense OD table");
  delta.cells.assign(n * n, DeltaCell{});
  for (auto& [o, d, c] : rows) {
    auto dit = zone_index.find(d);
    if (dit == zone_index.end()) throw input_error(path.string() + ": unknown destination '" + d + "'");
    delta.at(zone_index.at(o), dit->second) = c;
  }
  return delta;
}

namespace {

constexpr char kSkimMagic[8] = {'L', 'V', 'S', 'K', 'I', 'M', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}
bool get_u64(std::istream& in, std::uint64_t& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}
bool get_string(std::istream& in, std::string& s) {
  std::uint32_t len;
  if (!get_u32(in, len) || len > (1u << 24)) return false;
  s.resize(len);
  return static_cast<bool>(in.read(s.data(), len));
}

}  // namespace

void write_skim_cache(const SkimMatrix& skim, std::uint64_t key,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out.write(kSkimMagic, sizeof(kSkimMagic));
  put_u64(out, key);
  put_string(out, skim.period);
  put_u32(out, static_cast<std::uint32_t>(skim.zone_ids.size()));
  for (const auto& id : skim.zone_ids) put_string(out, id);
  for (const auto& c : skim.cells) {
    out.write(reinterpret_cast<const char*>(&c.access_s), sizeof(double));
    out.write(reinterpret_cast<const char*>(&c.egress_s), sizeof(double));
    out.write(reinterpret_cast<const char*>(&c.ivt_s), sizeof(double));
    out.write(reinterpret_cast<const char*>(&c.transfers), sizeof(double));
    char reach = c.reachable ? 1 : 0;
    out.write(&reach, 1);
  }
  if (!out) throw input_error("write failed: " + path.string());
}

std::optional<SkimMatrix> read_skim_cache(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kSkimMagic, 8) != 0) return std::nullopt;
  std::uint64_t stored_key;
  if (!get_u64(in, stored_key) || stored_key != key) return std::nullopt;
  SkimMatrix skim;
  if (!get_string(in, skim.period)) return std::nullopt;
  std::uint32_t zones;
  if (!get_u32(in, zones)) return std::nullopt;
  skim.zone_ids.resize(zones);
  for (auto& id : skim.zone_ids) {
    if (!get_string(in, id)) return std::nullopt;
  }
  skim.cells.resize(static_cast<std::size_t>(zones) * zones);
  for (auto& c : skim.cells) {
    char reach;
    if (!in.read(reinterpret_cast<char*>(&c.access_s), sizeof(double)) ||
        !in.read(reinterpret_cast<char*>(&c.egress_s), sizeof(double)) ||
        !in.read(reinterpret_cast<char*>(&c.ivt_s), sizeof(double)) ||
        !in.read(reinterpret_cast<char*>(&c.transfers), sizeof(double)) || !in.read(&reach, 1)) {
      return std::nullopt;
    }
    c.reachable = reach != 0;
  }
  return skim;
}

}  // namespace lineval::skim
