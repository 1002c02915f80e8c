#include "lineval/demand.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lineval/common.hpp"

namespace lineval::demand {

namespace {

const char* kSegmentNames[kNumSegments] = {"LowIncome", "NotLowIncome", "Senior", "Student"};
const char* kModeNames[kNumModes] = {"private_vehicle", "public_transit", "on_demand",
                                     "biking",          "walking",        "carpool"};

std::string lower(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

Segment parse_segment(const std::string& name) {
  const std::string l = lower(name);
  for (int i = 0; i < kNumSegments; ++i) {
    if (l == lower(kSegmentNames[i])) return static_cast<Segment>(i);
  }
  throw input_error("unknown segment '" + name + "'");
}

std::string segment_name(Segment segment) { return kSegmentNames[static_cast<int>(segment)]; }

std::string mode_name(Mode mode) { return kModeNames[static_cast<int>(mode)]; }

Mode parse_mode(const std::string& name) {
  const std::string l = lower(name);
  for (int i = 0; i < kNumModes; ++i) {
    if (l == kModeNames[i]) return static_cast<Mode>(i);
  }
  throw input_error("unknown mode '" + name + "'");
}

void validate_shares(const ModeShares& shares) {
  double sum = 0.0;
  for (double p : shares) {
    if (p < 0.0 || p > 1.0) throw input_error("mode share outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw input_error("mode shares sum to " + format_double(sum) + ", expected 1");
  }
}

std::vector<std::string> ChoiceParams::validate() const {
  if (theta_cost == 0.0) throw input_error("theta_cost must be nonzero");
  std::vector<std::string> warnings;
  auto warn_positive = [&](double v, const char* name) {
    if (v > 0.0) warnings.push_back(std::string(name) + " is positive (expected a disutility)");
  };
  warn_positive(theta_auto_tt, "theta_auto_tt");
  warn_positive(theta_cost, "theta_cost");
  warn_positive(theta_transit_at, "theta_transit_at");
  warn_positive(theta_transit_et, "theta_transit_et");
  warn_positive(theta_transit_ivt, "theta_transit_ivt");
  warn_positive(theta_transit_nt, "theta_transit_nt");
  warn_positive(theta_nonvehicle_tt, "theta_nonvehicle_tt");
  return warnings;
}

ChoiceParams aggregate_params(std::span<const ChoiceParams> params,
                              std::span<const double> weights) {
  if (params.empty()) throw input_error("aggregate_params: empty input set");
  if (params.size() != weights.size()) throw input_error("aggregate_params: size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw input_error("aggregate_params: weights must be positive");
    total += w;
  }
  ChoiceParams out{};
  auto accumulate = [&](double ChoiceParams::*field) {
    double sum = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) sum += weights[i] * (params[i].*field);
    out.*field = sum / total;
  };
  accumulate(&ChoiceParams::theta_auto_tt);
  accumulate(&ChoiceParams::theta_cost);
  accumulate(&ChoiceParams::theta_transit_at);
  accumulate(&ChoiceParams::theta_transit_et);
  accumulate(&ChoiceParams::theta_transit_ivt);
  accumulate(&ChoiceParams::theta_transit_nt);
  accumulate(&ChoiceParams::theta_nonvehicle_tt);
  accumulate(&ChoiceParams::asc_driving);
  accumulate(&ChoiceParams::asc_transit);
  accumulate(&ChoiceParams::asc_on_demand);
  accumulate(&ChoiceParams::asc_biking);
  accumulate(&ChoiceParams::asc_walking);
  accumulate(&ChoiceParams::asc_carpool);
  return out;
}

double point_elasticity(double theta_time, double share, double time) {
  if (share <= 0.0 || share >= 1.0) throw input_error("point_elasticity: share must be in (0,1)");
  if (time <= 0.0) throw input_error("point_elasticity: time must be positive");
  return theta_time * (1.0 - share) * time;
}

double elasticity_share(double elasticity, double share, double relative_change) {
  return std::clamp(share * (1.0 + elasticity * relative_change), 0.0, 1.0);
}

double transit_share_update(const ChoiceParams& params, double transit_share, double delta_at_min,
                            double delta_et_min, double delta_ivt_min) {
  const double weighted = params.theta_transit_at * delta_at_min +
                          params.theta_transit_et * delta_et_min +
                          params.theta_transit_ivt * delta_ivt_min;
  const double updated = transit_share * (1.0 + (1.0 - transit_share) * weighted);
  return std::clamp(updated, 0.0, 1.0);
}

ModeShares rescale_other_modes(const ModeShares& shares, double transit_share,
                               double new_transit_share) {
  ModeShares out = shares;
  out[static_cast<int>(Mode::PublicTransit)] = new_transit_share;
  if (transit_share >= 1.0) return out;  // all other shares are 0 and stay 0
  const double scale = (1.0 - new_transit_share) / (1.0 - transit_share);
  for (int m = 0; m < kNumModes; ++m) {
    if (m != static_cast<int>(Mode::PublicTransit)) out[m] = shares[m] * scale;
  }
  return out;
}

std::optional<ComponentDelta> group_daily_delta(std::span<const ComponentDelta> period_deltas,
                                                std::span<const char> usable,
                                                std::span<const double> weights) {
  if (period_deltas.size() != usable.size() || period_deltas.size() != weights.size()) {
    throw input_error("group_daily_delta: size mismatch");
  }
  double mass = 0.0;
  ComponentDelta sum{};
  for (std::size_t i = 0; i < period_deltas.size(); ++i) {
    if (!usable[i] || weights[i] <= 0.0) continue;
    mass += weights[i];
    sum.access_min += weights[i] * period_deltas[i].access_min;
    sum.egress_min += weights[i] * period_deltas[i].egress_min;
    sum.ivt_min += weights[i] * period_deltas[i].ivt_min;
  }
  if (mass <= 0.0) return std::nullopt;
  return ComponentDelta{sum.access_min / mass, sum.egress_min / mass, sum.ivt_min / mass};
}

double attribute_ridership(double trips, double new_transit_share, double daily_delta_total_min) {
  if (daily_delta_total_min < 0.0) return trips * new_transit_share;
  return 0.0;
}

ModeShiftSummary mode_shift_summary(std::span<const GroupShift> groups) {
  ModeShiftSummary summary;
  const int transit = static_cast<int>(Mode::PublicTransit);
  for (const auto& g : groups) {
    summary.transit_increase += g.trips * (g.after[transit] - g.before[transit]);
    for (int m = 0; m < kNumModes; ++m) {
      if (m == transit) continue;
      summary.switched_from[m] += g.trips * (g.before[m] - g.after[m]);
    }
  }
  return summary;
}

double ghg_savings_grams(std::span<const GroupShift> groups,
                         std::span<const std::optional<double>> auto_miles,
                         double grams_per_mile) {
  if (groups.size() != auto_miles.size()) throw input_error("ghg_savings: size mismatch");
  const int auto_mode = static_cast<int>(Mode::PrivateVehicle);
  double grams = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const double switched = g.trips * (g.before[auto_mode] - g.after[auto_mode]);
    if (switched == 0.0) continue;
    if (!auto_miles[i]) {
      throw input_error("ghg_savings: group " + std::to_string(i) +
                        " switches auto trips but has no average auto distance");
    }
    if (*auto_miles[i] < 0.0) throw input_error("ghg_savings: negative distance");
    grams += switched * *auto_miles[i] * grams_per_mile;
  }
  return grams;
}

double value_of_time_per_hour(double theta_time, double theta_cost) {
  if (theta_cost == 0.0) throw input_error("value_of_time: zero cost coefficient");
  return std::abs(theta_time / theta_cost) * 60.0;
}

}  // namespace lineval::demand
