#ifndef LINEVAL_PIPELINE_HPP
#define LINEVAL_PIPELINE_HPP

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lineval/demand.hpp"
#include "lineval/gtfs.hpp"
#include "lineval/skim.hpp"
#include "lineval/synth.hpp"
#include "lineval/welfare.hpp"

namespace lineval::pipeline {

/// Scenario settings; the JSON config file is the source of truth, CLI flags
/// may override individual fields. Relative paths resolve against the config
/// file's directory.
struct ScenarioConfig {
  std::filesystem::path base_gtfs_dir;
  std::filesystem::path line_config;  // route spec + service plan JSON
  std::filesystem::path zones_csv;
  std::filesystem::path params_csv;
  std::filesystem::path groups_csv;   // canonical trip groups, or
  std::filesystem::path agenda_csv;   // trip-level agenda (exactly one of the two)
  std::filesystem::path output_dir;

  bool include_overlay = true;  // false = null scenario, alt network == base

  skim::WalkParams walk;
  int sampling_step_min = 10;
  int max_transfers = 4;
  double newly_connected_ceiling_min = 120.0;
  double emission_grams_per_mile = 400.0;
  std::vector<double> equity_threshold_fracs{0.1, 0.5};
  gtfs::Weekday service_weekday = gtfs::Weekday::Wednesday;
  std::string overlay_prefix = "new_";
  unsigned workers = 0;  // 0 = hardware default; LINEVAL_MAX_WORKERS caps it
  bool use_cache = true;
  std::uint64_t seed = 0;  // reserved for sampled fixtures

  void validate() const;
};

ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Output-directory layout shared by all stages.
struct ScenarioPaths {
  std::filesystem::path root;
  std::filesystem::path synth_gtfs;
  std::filesystem::path alt_gtfs;
  std::filesystem::path skims;
  std::filesystem::path per_group_csv;
  std::filesystem::path welfare_csv;
  std::filesystem::path equity_json;
  std::filesystem::path report_dir;
  std::filesystem::path manifest_json;
  std::filesystem::path lock_file;
};
ScenarioPaths scenario_paths(const ScenarioConfig& config);

/// Exclusive lock on an output directory; concurrent invocations are
/// rejected rather than queued.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& lock_file);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct GroupKey {
  std::string origin;
  std::string destination;
  demand::Segment segment;

  auto operator<=>(const GroupKey&) const = default;
};

/// Choice parameters per trip group, rolled up from block-group rows when the
/// file is keyed below the zone level (parent zone = longest zone id that is
/// a prefix of the row id).
class ParamsTable {
 public:
  static ParamsTable load(const std::filesystem::path& path, const std::vector<skim::Zone>& zones);

  const demand::ChoiceParams& lookup(const GroupKey& key) const;
  bool contains(const GroupKey& key) const { return params_.count(key) > 0; }
  std::size_t size() const { return params_.size(); }

 private:
  std::map<GroupKey, demand::ChoiceParams> params_;
};

/// Loads canonical trip groups; period weight columns are weight_<label> in
/// service-plan order. Groups come back sorted by (origin, destination,
/// segment).
std::vector<demand::TripGroup> load_groups_csv(const std::filesystem::path& path,
                                               const std::vector<std::string>& period_labels);

/// Tallies a trip-level agenda into trip groups: shares from mode counts,
/// period weights from departure times, attributes trip-averaged.
std::vector<demand::TripGroup> ingest_agenda_csv(const std::filesystem::path& path,
                                                 const std::vector<gtfs::ServiceInterval>& intervals);

void write_groups_csv(const std::vector<demand::TripGroup>& groups,
                      const std::vector<std::string>& period_labels,
                      const std::filesystem::path& path);

/// Everything the demand stage produces for one trip group.
struct GroupRecord {
  demand::TripGroup group;
  bool delta_defined = false;    // usable delta in at least one period
  bool newly_connected = false;  // some usable period was newly connected
  bool benefiting = false;       // strict daily total saving
  demand::ComponentDelta daily_delta{};
  demand::ModeShares shares_after{};
  double ridership = 0.0;         // new-line rider-trips
  double transit_increase = 0.0;  // trips shifted into transit
  std::array<double, demand::kNumModes> switched_from{};
  double ghg_grams = 0.0;
  bool cs_accounted = false;  // false when the transit share hits 0
  double cs_pre = 0.0;
  double delta_cs = 0.0;
  double cs_post = 0.0;
  bool origin_corridor = false;
  bool destination_corridor = false;

  bool corridor() const { return origin_corridor || destination_corridor; }
  bool low_income() const { return group.segment == demand::Segment::LowIncome; }
};

struct EvaluateResult {
  std::vector<GroupRecord> records;
  std::vector<welfare::WelfareRecord> welfare;  // cs_accounted groups only
};

struct NetworkBundle {
  gtfs::LineConfig line;
  gtfs::Feed base;
  gtfs::Feed overlay;
  gtfs::Feed alt;
};

// Pipeline stages. Each persists its outputs under the config's output
// directory; the load_* counterparts let later stages resume from disk.
NetworkBundle stage_synth(const ScenarioConfig& config);
std::vector<skim::DeltaMatrix> stage_skim(const ScenarioConfig& config,
                                          const NetworkBundle& networks);
std::vector<skim::DeltaMatrix> load_deltas(const ScenarioConfig& config);
EvaluateResult stage_evaluate(const ScenarioConfig& config,
                              const std::vector<skim::DeltaMatrix>& deltas);
EvaluateResult load_evaluate(const ScenarioConfig& config);
std::optional<welfare::EquityReport> stage_equity(const ScenarioConfig& config,
                                                  const EvaluateResult& evaluated);

struct ScenarioResult {
  std::vector<GroupRecord> records;
  std::vector<welfare::WelfareRecord> welfare;
  std::optional<welfare::EquityReport> equity;  // nullopt for an empty group set
};

/// Full pipeline: synth -> skims -> evaluate -> equity -> report -> manifest.
/// Deterministic for a fixed config; reruns are byte-identical.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Per-stage diagnostics on stderr.
void stage_log(const std::string& stage, const std::string& message);

}  // namespace lineval::pipeline

#endif  // LINEVAL_PIPELINE_HPP
