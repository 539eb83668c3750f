#pragma once

#include <string>
#include <vector>

#include "peakshaver/metrics.hpp"
#include "peakshaver/model.hpp"
#include "peakshaver/scheduler.hpp"

namespace peakshaver {

struct BaselineOptions {
  bool reconsider = true; ///< keep the exchange phase in the comparison engine
};

struct BaselineResult {
  Schedule schedule;
  MetricsReport metrics;
  std::vector<TraceRecord> trace;
  double phase1_revenue = 0.0;
  double revenue = 0.0;
};

/// Comparison engine: each station is scheduled independently with pure
/// right-to-left allocation (no valley filling) and feasibility checked
/// against the local cap only. Requires sum_j C_j <= C_total, otherwise the
/// union of the per-station schedules could breach the global cap.
inline BaselineResult run_greedy_rtl(const Instance& in, const BaselineOptions& opt = {}) {
  const ValidationReport report = validate_instance(in);
  if (!report.ok()) {
    throw InvalidInstanceError("invalid instance: " + report.violations.front().subject + ": " +
                               report.violations.front().condition);
  }
  double caps_sum = 0.0;
  for (const auto& s : in.stations) caps_sum += s.cap;
  if (caps_sum > in.global_cap + kEnergyTol) {
    throw InvalidInstanceError(
        "greedy-rtl requires the summed local caps (" + std::to_string(caps_sum) +
        ") to stay within the global cap (" + std::to_string(in.global_cap) + ")");
  }

  BaselineResult result;
  for (int j = 1; j <= in.num_stations(); ++j) {
    Instance sub;
    sub.horizon = in.horizon;
    sub.global_cap = in.station_cap(j);
    sub.slackness = in.slackness;
    sub.stations = {Station{in.station_cap(j)}};
    for (const auto& r : in.requests) {
      if (r.station != j) continue;
      ChargingRequest local = r;
      local.station = 1;
      sub.requests.push_back(local);
    }
    if (sub.requests.empty()) continue;

    EngineOptions engine_opt;
    engine_opt.ranking = RankingPolicy::kRightToLeftOnly;
    engine_opt.reconsider = opt.reconsider;
    engine_opt.track_certificate = false;
    const RunResult sub_result = detail::run_engine(sub, engine_opt, "greedy-rtl");

    for (const auto& [id, slots] : sub_result.schedule.allocation)
      result.schedule.allocation[id] = slots;
    result.schedule.selected.insert(sub_result.schedule.selected.begin(),
                                    sub_result.schedule.selected.end());
    result.trace.insert(result.trace.end(), sub_result.trace.begin(), sub_result.trace.end());
    result.phase1_revenue += sub_result.phase1_revenue;
    result.revenue += sub_result.revenue;
  }
  result.metrics = compute_metrics(in, result.schedule);
  return result;
}

} // namespace peakshaver
