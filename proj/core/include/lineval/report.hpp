#ifndef LINEVAL_REPORT_HPP
#define LINEVAL_REPORT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lineval/pipeline.hpp"

namespace lineval::pipeline {

/// Scoped roll-up of the per-group records. Scopes: everyone, low-income
/// travelers, and trips touching the corridor.
struct ScopeAggregate {
  std::string scope;
  double trips = 0.0;             // all trips in scope
  double benefiting_trips = 0.0;  // trips in groups with a strict saving
  double mean_saving_min = 0.0;   // trip-weighted, over benefiting groups
  double ridership = 0.0;
  double transit_increase = 0.0;
  std::array<double, demand::kNumModes> switched_from{};
  double ghg_tons = 0.0;
  double cs_total_usd = 0.0;       // sum of d_i * delta CS
  double cs_trips_accounted = 0.0; // trips of CS-accounted groups
  double cs_benefiting_trips = 0.0;
  double cs_per_trip_all_usd = 0.0;
  double cs_per_trip_benefiting_usd = 0.0;
};

std::vector<ScopeAggregate> aggregate_scopes(const std::vector<GroupRecord>& records);

/// Writes the five report tables plus the two GeoJSON choropleth layers
/// (per-zone ridership, mean time saving, surplus change, keyed by origin and
/// by destination).
void export_report(const std::vector<GroupRecord>& records,
                   const std::optional<welfare::EquityReport>& equity,
                   const std::vector<skim::Zone>& zones, const std::filesystem::path& dir);

void write_per_group_csv(const std::vector<GroupRecord>& records,
                         const std::filesystem::path& path);
std::vector<GroupRecord> read_per_group_csv(const std::filesystem::path& path);

void write_welfare_csv(const std::vector<welfare::WelfareRecord>& records,
                       const std::filesystem::path& path);
std::vector<welfare::WelfareRecord> read_welfare_csv(const std::filesystem::path& path);

}  // namespace lineval::pipeline

#endif  // LINEVAL_REPORT_HPP
