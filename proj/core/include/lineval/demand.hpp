#ifndef LINEVAL_DEMAND_HPP
#define LINEVAL_DEMAND_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lineval::demand {

// Time coefficients are utility per minute, cost per dollar. Skim components
// arrive in seconds and must be converted to minutes before entering the
// share update.

enum class Segment : int { LowIncome = 0, NotLowIncome, Senior, Student };
inline constexpr int kNumSegments = 4;

Segment parse_segment(const std::string& name);
std::string segment_name(Segment segment);

enum class Mode : int {
  PrivateVehicle = 0,
  PublicTransit,
  OnDemand,
  Biking,
  Walking,
  Carpool,
};
inline constexpr int kNumModes = 6;

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

using ModeShares = std::array<double, kNumModes>;

/// Throws unless every share is in [0,1] and the vector sums to 1 (1e-9).
void validate_shares(const ModeShares& shares);

/// Taste coefficients and mode constants for one trip group.
struct ChoiceParams {
  double theta_auto_tt = 0.0;
  double theta_cost = 0.0;
  double theta_transit_at = 0.0;
  double theta_transit_et = 0.0;
  double theta_transit_ivt = 0.0;
  double theta_transit_nt = 0.0;
  double theta_nonvehicle_tt = 0.0;
  double asc_driving = 0.0;
  double asc_transit = 0.0;
  double asc_on_demand = 0.0;
  double asc_biking = 0.0;
  double asc_walking = 0.0;
  double asc_carpool = 0.0;

  /// Positive time or cost coefficients are suspicious; returns warnings,
  /// throws only on theta_cost == 0 (VOT and surplus need it).
  std::vector<std::string> validate() const;
};

/// Demand unit: all trips sharing an OD pair and a population segment.
struct TripGroup {
  std::string origin;
  std::string destination;
  Segment segment = Segment::NotLowIncome;
  double trips = 0.0;  // d_i, trips per day
  ModeShares shares{};
  std::vector<double> period_weights;  // aligned with the service plan intervals
  std::optional<double> avg_auto_miles;
  double fare_usd = 0.0;
  double auto_cost_usd = 0.0;
  double base_access_min = 0.0;
  double base_egress_min = 0.0;
  double base_ivt_min = 0.0;
  double base_transfers = 0.0;
};

/// Trip-count-weighted mean of each coefficient; used to roll block-group
/// parameters up to the zone level. Output lies in the componentwise convex
/// hull of the inputs.
ChoiceParams aggregate_params(std::span<const ChoiceParams> params, std::span<const double> weights);

/// Point elasticity of a logit share with respect to a time attribute:
/// e = theta * (1 - p) * t.
double point_elasticity(double theta_time, double share, double time);

/// First-order share response p' = p * (1 + e * rel_change), clamped to [0,1].
double elasticity_share(double elasticity, double share, double relative_change);

/// Transit share update from component time deltas (minutes):
/// p' = p * [1 + (1-p) * (theta_at*d_at + theta_et*d_et + theta_ivt*d_ivt)],
/// clamped to [0,1]. p = 0 and p = 1 are fixed points.
double transit_share_update(const ChoiceParams& params, double transit_share, double delta_at_min,
                            double delta_et_min, double delta_ivt_min);

/// Scales every non-transit share by (1-p')/(1-p) so the vector stays closed.
ModeShares rescale_other_modes(const ModeShares& shares, double transit_share,
                               double new_transit_share);

struct ComponentDelta {
  double access_min = 0.0;
  double egress_min = 0.0;
  double ivt_min = 0.0;

  double total() const { return access_min + egress_min + ivt_min; }
};

/// Weighted mean of per-period deltas over the periods marked usable;
/// weights renormalize over that subset. nullopt when no period is usable.
std::optional<ComponentDelta> group_daily_delta(std::span<const ComponentDelta> period_deltas,
                                                std::span<const char> usable,
                                                std::span<const double> weights);

/// A group contributes ridership only under a strict daily time saving; the
/// contribution is then the full updated transit volume.
double attribute_ridership(double trips, double new_transit_share, double daily_delta_total_min);

struct ModeShiftSummary {
  double transit_increase = 0.0;
  std::array<double, kNumModes> switched_from{};  // transit entry stays 0

  double switched_total() const {
    double sum = 0.0;
    for (int m = 0; m < kNumModes; ++m) {
      if (m != static_cast<int>(Mode::PublicTransit)) sum += switched_from[m];
    }
    return sum;
  }
};

struct GroupShift {
  double trips = 0.0;
  ModeShares before{};
  ModeShares after{};
};

/// Trip-weighted switch counts; switched_total equals transit_increase by
/// construction of the proportional rescaling.
ModeShiftSummary mode_shift_summary(std::span<const GroupShift> groups);

/// Grams of avoided emissions for auto trips switched to transit.
/// Throws when a group switches auto trips but carries no distance.
double ghg_savings_grams(std::span<const GroupShift> groups,
                         std::span<const std::optional<double>> auto_miles,
                         double grams_per_mile);

inline double grams_to_metric_tons(double grams) { return grams / 1e6; }

/// Dollars per hour implied by a time coefficient; reported positive.
double value_of_time_per_hour(double theta_time, double theta_cost);

}  // namespace lineval::demand

#endif  // LINEVAL_DEMAND_HPP
