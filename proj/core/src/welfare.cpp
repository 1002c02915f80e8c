#include "lineval/welfare.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "lineval/common.hpp"

namespace lineval::welfare {

double transit_utility(const demand::ChoiceParams& params, double access_min, double egress_min,
                       double ivt_min, double transfers, double fare_usd) {
  return params.theta_transit_at * access_min + params.theta_transit_et * egress_min +
         params.theta_transit_ivt * ivt_min + params.theta_transit_nt * transfers +
         params.theta_cost * fare_usd + params.asc_transit;
}

double expected_cs(const demand::ChoiceParams& params, double transit_utility,
                   double transit_share) {
  if (params.theta_cost == 0.0) throw input_error("expected_cs: zero cost coefficient");
  if (transit_share <= 0.0 || transit_share > 1.0) {
    throw input_error("expected_cs: transit share must be in (0,1]");
  }
  return (transit_utility - std::log(transit_share)) / std::abs(params.theta_cost);
}

double delta_cs(const demand::ChoiceParams& params, double transit_share,
                double new_transit_share, double delta_at_min, double delta_et_min,
                double delta_ivt_min) {
  if (params.theta_cost == 0.0) throw input_error("delta_cs: zero cost coefficient");
  if (transit_share <= 0.0 || new_transit_share <= 0.0) {
    throw input_error("delta_cs: transit shares must be positive");
  }
  const double utility_shift = params.theta_transit_at * delta_at_min +
                               params.theta_transit_et * delta_et_min +
                               params.theta_transit_ivt * delta_ivt_min;
  return (std::log(transit_share / new_transit_share) + utility_shift) /
         std::abs(params.theta_cost);
}

double csdi(std::span<const WelfareRecord> records, double WelfareRecord::*value) {
  double low_num = 0.0, low_den = 0.0, all_num = 0.0, all_den = 0.0;
  for (const auto& r : records) {
    all_num += (r.*value) * r.trips;
    all_den += r.trips;
    if (r.low_income) {
      low_num += (r.*value) * r.trips;
      low_den += r.trips;
    }
  }
  if (low_den <= 0.0) throw input_error("csdi: empty low-income scope");
  if (all_den <= 0.0) throw input_error("csdi: no trips");
  const double all_mean = all_num / all_den;
  if (all_mean == 0.0) throw input_error("csdi: zero population-average consumer surplus");
  return (low_num / low_den) / all_mean;
}

InsufficiencyResult csii(std::span<const WelfareRecord> records, double z,
                         double WelfareRecord::*value) {
  if (z <= 0.0) throw input_error("csii: threshold must be positive");
  if (records.empty()) throw input_error("csii: empty scope");
  double num = 0.0, below = 0.0, den = 0.0;
  for (const auto& r : records) {
    const double cs = r.*value;
    const double shortfall = std::max(0.0, (z - cs) / z);
    num += shortfall * shortfall * r.trips;
    if (cs < z) below += r.trips;
    den += r.trips;
  }
  if (den <= 0.0) throw input_error("csii: no trips in scope");
  return {num / den, below / den};
}

EquityReport equity_report(std::span<const WelfareRecord> records,
                           std::span<const double> threshold_fracs) {
  EquityReport report;
  double num = 0.0, den = 0.0;
  for (const auto& r : records) {
    num += r.cs_pre * r.trips;
    den += r.trips;
  }
  if (den <= 0.0) throw input_error("equity_report: no trips");
  report.average_cs_pre = num / den;

  report.csdi_pre = csdi(records, &WelfareRecord::cs_pre);
  report.csdi_post = csdi(records, &WelfareRecord::cs_post);

  std::vector<WelfareRecord> low;
  for (const auto& r : records) {
    if (r.low_income) low.push_back(r);
  }

  for (double frac : threshold_fracs) {
    EquityThresholdReport t;
    t.threshold_frac = frac;
    t.z = frac * report.average_cs_pre;
    if (t.z <= 0.0) {
      throw input_error("equity_report: nonpositive threshold from average CS " +
                        format_double(report.average_cs_pre));
    }
    auto low_pre = csii(low, t.z, &WelfareRecord::cs_pre);
    auto low_post = csii(low, t.z, &WelfareRecord::cs_post);
    auto all_pre = csii(records, t.z, &WelfareRecord::cs_pre);
    auto all_post = csii(records, t.z, &WelfareRecord::cs_post);
    t.csii_low_pre = low_pre.index;
    t.csii_low_post = low_post.index;
    t.csii_all_pre = all_pre.index;
    t.csii_all_post = all_post.index;
    t.rate_low_pre = low_pre.rate;
    t.rate_low_post = low_post.rate;
    t.rate_all_pre = all_pre.rate;
    t.rate_all_post = all_post.rate;
    report.thresholds.push_back(t);
  }
  return report;
}

std::string equity_report_json(const EquityReport& report) {
  nlohmann::json doc;
  doc["average_cs_pre_usd"] = report.average_cs_pre;
  doc["csdi"] = {{"pre", report.csdi_pre},
                 {"post", report.csdi_post},
                 {"delta", report.csdi_post - report.csdi_pre}};
  nlohmann::json thresholds = nlohmann::json::array();
  for (const auto& t : report.thresholds) {
    thresholds.push_back({
        {"threshold_frac", t.threshold_frac},
        {"z_usd", t.z},
        {"csii",
         {{"low_income", {{"pre", t.csii_low_pre}, {"post", t.csii_low_post}}},
          {"all", {{"pre", t.csii_all_pre}, {"post", t.csii_all_post}}}}},
        {"insufficiency_rate",
         {{"low_income", {{"pre", t.rate_low_pre}, {"post", t.rate_low_post}}},
          {"all", {{"pre", t.rate_all_pre}, {"post", t.rate_all_post}}}}},
    });
  }
  doc["thresholds"] = thresholds;
  return doc.dump(2) + "\n";
}

}  // namespace lineval::welfare
