#ifndef LINEVAL_SKIM_HPP
#define LINEVAL_SKIM_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lineval/router.hpp"
#include "lineval/timetable.hpp"

namespace lineval::skim {

struct Zone {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  bool in_corridor = false;
};

/// zone_id,lat,lon[,in_corridor]
std::vector<Zone> load_zones(const std::filesystem::path& path);

struct WalkParams {
  double speed_mps = 1.34;
  double detour_factor = 1.3;
  double max_radius_m = 1200.0;
  double transfer_radius_m = 400.0;  // stop-to-stop transfer walks; 0 disables
};

/// Links the zone centroid to every stop within the walk radius
/// (great-circle distance times detour factor). Walk time rounds to whole
/// seconds. An empty result marks the zone transit-inaccessible.
std::vector<AccessLink> access_candidates(const Zone& zone, const Timetable& tt,
                                          const WalkParams& walk);

/// Transfer walks between distinct stops within the transfer radius, same
/// distance and speed conventions as access links.
FootpathTable build_footpaths(const Timetable& tt, const WalkParams& walk);

struct SkimCell {
  double access_s = 0.0;
  double egress_s = 0.0;
  double ivt_s = 0.0;
  double transfers = 0.0;
  bool reachable = false;
};

/// Period-mean OD matrix of journey components, dense over zones.
struct SkimMatrix {
  std::string period;
  std::vector<std::string> zone_ids;
  std::vector<SkimCell> cells;  // row-major, origin x destination

  const SkimCell& at(std::size_t origin, std::size_t destination) const {
    return cells[origin * zone_ids.size() + destination];
  }
  SkimCell& at(std::size_t origin, std::size_t destination) {
    return cells[origin * zone_ids.size() + destination];
  }
};

struct SkimOptions {
  int sampling_step_min = 10;
  int max_transfers = 4;
  unsigned workers = 0;  // 0 = hardware default
};

/// Journeys are planned at departure times on the sampling grid from the
/// period start (strictly before the period end); each component is the
/// arithmetic mean over feasible samples. Rows are computed in parallel over
/// origin zones; output is deterministic.
SkimMatrix compute_skim(const Timetable& tt, const std::vector<Zone>& zones,
                        const std::string& period_label, int period_start_s, int period_end_s,
                        const WalkParams& walk, const SkimOptions& options);

enum class DeltaStatus : std::uint8_t {
  Excluded = 0,        // unreachable in both networks
  Ok = 1,              // reachable in both
  NewlyConnected = 2,  // reachable only with the overlay
};

struct DeltaCell {
  double access_min = 0.0;
  double egress_min = 0.0;
  double ivt_min = 0.0;
  double total_min = 0.0;
  DeltaStatus status = DeltaStatus::Excluded;
};

struct DeltaMatrix {
  std::string period;
  std::vector<std::string> zone_ids;
  std::vector<DeltaCell> cells;

  const DeltaCell& at(std::size_t origin, std::size_t destination) const {
    return cells[origin * zone_ids.size() + destination];
  }
  DeltaCell& at(std::size_t origin, std::size_t destination) {
    return cells[origin * zone_ids.size() + destination];
  }
};

/// Componentwise alt minus base, in minutes. ODs reachable only in alt are
/// flagged NewlyConnected and measured against a virtual baseline whose total
/// equals `ceiling_min`, split across components in proportion to the alt
/// journey (all on in-vehicle time when the alt journey is instantaneous).
DeltaMatrix delta_skim(const SkimMatrix& base, const SkimMatrix& alt, double ceiling_min);

void write_skim_csv(const SkimMatrix& skim, const std::filesystem::path& path);
SkimMatrix read_skim_csv(const std::filesystem::path& path);

void write_delta_csv(const DeltaMatrix& delta, const std::filesystem::path& path);
DeltaMatrix read_delta_csv(const std::filesystem::path& path);

/// Compact binary skim cache. Layout (little-endian):
///   8-byte magic "LVSKIM01", u64 content key,
///   u32 period-label length + bytes, u32 zone count,
///   per zone: u32 id length + bytes,
///   per OD cell: 4 doubles (access, egress, ivt, transfers) + u8 reachable.
void write_skim_cache(const SkimMatrix& skim, std::uint64_t key,
                      const std::filesystem::path& path);

/// Returns nullopt when the file is absent, malformed, or keyed differently.
std::optional<SkimMatrix> read_skim_cache(const std::filesystem::path& path, std::uint64_t key);

}  // namespace lineval::skim

#endif  // LINEVAL_SKIM_HPP
