// lineval: evaluate the ridership, mode-shift, emissions, welfare and equity
// impacts of adding a transit line to an existing network.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lineval/common.hpp"
#include "lineval/pipeline.hpp"
#include "lineval/report.hpp"
#include "lineval/synth.hpp"

namespace {

using lineval::pipeline::ScenarioConfig;

struct ConfigOverrides {
  std::string output_dir;
  int step_min = -1;
  int max_transfers = -1;
  double ceiling_min = -1;
  double grams_per_mile = -1;
  double walk_speed = -1;
  double walk_detour = -1;
  double walk_radius = -1;
  double transfer_radius = -1;
  std::string weekday;
  std::string overlay_prefix;
  unsigned workers = 0;
  bool workers_set = false;
  bool no_cache = false;
  bool no_overlay = false;
};

void add_override_flags(CLI::App* cmd, ConfigOverrides& ov) {
  cmd->add_option("--output-dir", ov.output_dir, "Override the output directory");
  cmd->add_option("--step-min", ov.step_min, "Skim sampling step in minutes");
  cmd->add_option("--max-transfers", ov.max_transfers, "Router transfer limit");
  cmd->add_option("--ceiling-min", ov.ceiling_min,
                  "Virtual baseline total for newly connected ODs (minutes)");
  cmd->add_option("--grams-per-mile", ov.grams_per_mile, "GHG emission factor");
  cmd->add_option("--walk-speed", ov.walk_speed, "Walk speed in m/s");
  cmd->add_option("--walk-detour", ov.walk_detour, "Walk detour factor");
  cmd->add_option("--walk-radius", ov.walk_radius, "Maximum access walk in meters");
  cmd->add_option("--transfer-radius", ov.transfer_radius,
                  "Maximum stop-to-stop transfer walk in meters (0 disables)");
  cmd->add_option("--weekday", ov.weekday, "Service day (monday..sunday)");
  cmd->add_option("--overlay-prefix", ov.overlay_prefix, "Prefix for colliding overlay ids");
  cmd->add_option("--workers", ov.workers, "Worker threads (0 = hardware)")
      ->each([&ov](const std::string&) { ov.workers_set = true; });
  cmd->add_flag("--no-cache", ov.no_cache, "Skip the binary skim cache");
  cmd->add_flag("--no-overlay", ov.no_overlay, "Null scenario: alt network equals the base");
}

ScenarioConfig load_with_overrides(const std::string& config_path, const ConfigOverrides& ov) {
  ScenarioConfig cfg = lineval::pipeline::load_scenario_config(config_path);
  if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
  if (ov.step_min > 0) cfg.sampling_step_min = ov.step_min;
  if (ov.max_transfers >= 0) cfg.max_transfers = ov.max_transfers;
  if (ov.ceiling_min > 0) cfg.newly_connected_ceiling_min = ov.ceiling_min;
  if (ov.grams_per_mile > 0) cfg.emission_grams_per_mile = ov.grams_per_mile;
  if (ov.walk_speed > 0) cfg.walk.speed_mps = ov.walk_speed;
  if (ov.walk_detour > 0) cfg.walk.detour_factor = ov.walk_detour;
  if (ov.walk_radius > 0) cfg.walk.max_radius_m = ov.walk_radius;
  if (ov.transfer_radius >= 0) cfg.walk.transfer_radius_m = ov.transfer_radius;
  if (!ov.weekday.empty()) cfg.service_weekday = lineval::gtfs::parse_weekday(ov.weekday);
  if (!ov.overlay_prefix.empty()) cfg.overlay_prefix = ov.overlay_prefix;
  if (ov.workers_set) cfg.workers = ov.workers;
  if (ov.no_cache) cfg.use_cache = false;
  if (ov.no_overlay) cfg.include_overlay = false;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lineval - transit line scenario evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lineval 0.1.0");

  std::string config_path;
  ConfigOverrides ov;

  // synth-gtfs works standalone so schedules can be built outside a scenario.
  auto* synth = app.add_subcommand("synth-gtfs", "Build a synthetic full-day GTFS feed");
  std::string synth_line, synth_out, synth_base, synth_prefix = "new_";
  synth->add_option("--line", synth_line, "Line config JSON (route + service plan)")->required();
  synth->add_option("--out", synth_out, "Output GTFS directory")->required();
  synth->add_option("--base", synth_base, "Merge into this base GTFS directory");
  synth->add_option("--prefix", synth_prefix, "Prefix for colliding overlay ids");

  auto* run = app.add_subcommand("run", "Full pipeline: synth, skims, evaluate, equity, report");
  run->add_option("--config", config_path, "Scenario config JSON")->required();
  add_override_flags(run, ov);

  auto* skim = app.add_subcommand("skim", "Build networks and compute per-period skims + deltas");
  skim->add_option("--config", config_path, "Scenario config JSON")->required();
  add_override_flags(skim, ov);

  auto* evaluate = app.add_subcommand("evaluate", "Demand stage from persisted deltas");
  evaluate->add_option("--config", config_path, "Scenario config JSON")->required();
  add_override_flags(evaluate, ov);

  auto* equity = app.add_subcommand("equity", "Equity indices from persisted welfare records");
  equity->add_option("--config", config_path, "Scenario config JSON")->required();
  add_override_flags(equity, ov);

  auto* report = app.add_subcommand("report", "Report tables and GeoJSON from persisted records");
  report->add_option("--config", config_path, "Scenario config JSON")->required();
  add_override_flags(report, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      auto line = lineval::gtfs::load_line_config(synth_line);
      auto feed = lineval::gtfs::build_synthetic_schedule(line.route, line.plan);
      if (!synth_base.empty()) {
        auto base = lineval::gtfs::parse_feed(synth_base);
        feed = lineval::gtfs::merge_feeds(base, feed, synth_prefix);
      }
      lineval::gtfs::write_feed(feed, synth_out);
      lineval::pipeline::stage_log("synth-gtfs",
                                   "wrote " + std::to_string(feed.trips.size()) + " trips, " +
                                       std::to_string(feed.stops.size()) + " stops to " + synth_out);
      return 0;
    }

    const ScenarioConfig cfg = load_with_overrides(config_path, ov);
    const auto paths = lineval::pipeline::scenario_paths(cfg);

    if (run->parsed()) {
      lineval::pipeline::run_scenario(cfg);
      return 0;
    }

    std::filesystem::create_directories(paths.root);
    lineval::pipeline::OutputLock lock(paths.lock_file);

    if (skim->parsed()) {
      auto nets = lineval::pipeline::stage_synth(cfg);
      lineval::pipeline::stage_skim(cfg, nets);
    } else if (evaluate->parsed()) {
      auto deltas = lineval::pipeline::load_deltas(cfg);
      lineval::pipeline::stage_evaluate(cfg, deltas);
    } else if (equity->parsed()) {
      auto evaluated = lineval::pipeline::load_evaluate(cfg);
      lineval::pipeline::stage_equity(cfg, evaluated);
    } else if (report->parsed()) {
      auto evaluated = lineval::pipeline::load_evaluate(cfg);
      std::optional<lineval::welfare::EquityReport> eq;
      if (!evaluated.welfare.empty()) {
        eq = lineval::welfare::equity_report(evaluated.welfare, cfg.equity_threshold_fracs);
      }
      auto zones = lineval::skim::load_zones(cfg.zones_csv);
      lineval::pipeline::export_report(evaluated.records, eq, zones, paths.report_dir);
      lineval::pipeline::stage_log("report", "wrote " + paths.report_dir.string());
    }
    return 0;
  } catch (const lineval::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const lineval::stage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
