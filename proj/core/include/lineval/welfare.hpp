#ifndef LINEVAL_WELFARE_HPP
#define LINEVAL_WELFARE_HPP

#include <span>
#include <string>
#include <vector>

#include "lineval/demand.hpp"

namespace lineval::welfare {

// Consumer surplus uses the disutility convention: theta_cost < 0, so the
// marginal utility of income is -theta_cost and surplus is logsum / |theta_cost|.
// A logsum increase then reads as a positive dollar benefit.

/// Systematic transit utility from baseline level-of-service attributes.
double transit_utility(const demand::ChoiceParams& params, double access_min, double egress_min,
                       double ivt_min, double transfers, double fare_usd);

/// Expected consumer surplus per trip via the transit shortcut:
/// E(CS) = (1/|theta_cost|) * ln(exp(V_transit) / p_transit).
/// Matches the direct logsum when p_transit is MNL-consistent.
/// p_transit must be in (0,1]; groups with zero transit share are excluded
/// upstream.
double expected_cs(const demand::ChoiceParams& params, double transit_utility,
                   double transit_share);

/// Surplus change per trip from the transit share movement and time deltas:
/// dE(CS) = (1/|theta_cost|) * [ln(p/p') + theta_at*d_at + theta_et*d_et
///          + theta_ivt*d_ivt].
double delta_cs(const demand::ChoiceParams& params, double transit_share,
                double new_transit_share, double delta_at_min, double delta_et_min,
                double delta_ivt_min);

struct WelfareRecord {
  std::string origin;
  std::string destination;
  demand::Segment segment = demand::Segment::NotLowIncome;
  double trips = 0.0;
  double cs_pre = 0.0;
  double delta_cs = 0.0;
  double cs_post = 0.0;
  bool low_income = false;
  bool corridor = false;
};

/// Consumer surplus disparity index: trip-weighted mean CS of the scope over
/// the trip-weighted mean CS of everyone. Uses a caller-supplied selector so
/// the same routine serves pre and post values.
double csdi(std::span<const WelfareRecord> records, double WelfareRecord::*value);

struct InsufficiencyResult {
  double index = 0.0;  // trip-weighted mean squared relative shortfall
  double rate = 0.0;   // trip-weighted share with CS strictly below z
};

/// CS insufficiency over the records given (already scoped); z > 0.
InsufficiencyResult csii(std::span<const WelfareRecord> records, double z,
                         double WelfareRecord::*value);

struct EquityThresholdReport {
  double threshold_frac = 0.0;  // share of the pre-scenario average CS
  double z = 0.0;
  // [scope][pre/post]; scope 0 = low income, 1 = everyone
  double csii_low_pre = 0.0, csii_low_post = 0.0;
  double csii_all_pre = 0.0, csii_all_post = 0.0;
  double rate_low_pre = 0.0, rate_low_post = 0.0;
  double rate_all_pre = 0.0, rate_all_post = 0.0;
};

struct EquityReport {
  double average_cs_pre = 0.0;  // trip-weighted, basis for thresholds
  double csdi_pre = 0.0;
  double csdi_post = 0.0;
  std::vector<EquityThresholdReport> thresholds;
};

/// Thresholds are fractions of the pre-scenario all-trip average CS and stay
/// fixed across the before/after comparison.
EquityReport equity_report(std::span<const WelfareRecord> records,
                           std::span<const double> threshold_fracs);

std::string equity_report_json(const EquityReport& report);

}  // namespace lineval::welfare

#endif  // LINEVAL_WELFARE_HPP
