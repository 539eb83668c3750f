#pragma once

#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "peakshaver/model.hpp"

namespace peakshaver {

struct MetricsReport {
  double revenue = 0.0;            ///< summed value of the selected requests
  double normalized_revenue = 0.0; ///< revenue / summed value of all requests
  double utilization = 0.0;        ///< delivered energy / (T * C_total)
  double acceptance_rate = 0.0;    ///< |selected| / n
  double actual_peak = 0.0;        ///< max over slots of the delivered energy
  std::vector<double> per_station_peaks; ///< size m
};

inline MetricsReport compute_metrics(const Instance& in, const Schedule& schedule) {
  MetricsReport report;
  report.per_station_peaks.assign(static_cast<std::size_t>(in.num_stations()), 0.0);

  // sums run in id order so the report is invariant under request reordering
  const auto index = request_index(in);
  double total_value = 0.0;
  for (const auto& [id, r] : index) total_value += r->value;

  double selected_value = 0.0;
  double selected_demand = 0.0;
  for (int id : schedule.selected) {
    const auto it = index.find(id);
    if (it == index.end())
      throw InvalidInstanceError("schedule references unknown request " + std::to_string(id));
    selected_value += it->second->value;
    selected_demand += it->second->demand;
  }

  std::vector<double> slot_total(static_cast<std::size_t>(in.horizon) + 1, 0.0);
  std::vector<std::vector<double>> slot_station(
      static_cast<std::size_t>(in.horizon) + 1,
      std::vector<double>(static_cast<std::size_t>(in.num_stations()) + 1, 0.0));
  for (const auto& [id, slots] : schedule.allocation) {
    const auto it = index.find(id);
    if (it == index.end())
      throw InvalidInstanceError("schedule references unknown request " + std::to_string(id));
    const int station = it->second->station;
    for (const auto& [t, energy] : slots) {
      if (t < 1 || t > in.horizon) continue;
      slot_total[static_cast<std::size_t>(t)] += energy;
      slot_station[static_cast<std::size_t>(t)][static_cast<std::size_t>(station)] += energy;
    }
  }

  report.revenue = selected_value;
  report.normalized_revenue = total_value > 0.0 ? selected_value / total_value : 0.0;
  report.utilization = (in.horizon > 0 && in.global_cap > 0.0)
                           ? selected_demand / (in.horizon * in.global_cap)
                           : 0.0;
  report.acceptance_rate =
      in.num_requests() > 0
          ? static_cast<double>(schedule.selected.size()) / in.num_requests()
          : 0.0;
  for (int t = 1; t <= in.horizon; ++t) {
    report.actual_peak = std::max(report.actual_peak, slot_total[static_cast<std::size_t>(t)]);
    for (int j = 1; j <= in.num_stations(); ++j) {
      report.per_station_peaks[static_cast<std::size_t>(j) - 1] =
          std::max(report.per_station_peaks[static_cast<std::size_t>(j) - 1],
                   slot_station[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]);
    }
  }
  return report;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

} // namespace detail

/// Checks every schedule invariant at the 1e-9 kWh tolerance: energy only in
/// [1, deadline], per-slot rate caps, all-or-nothing totals, per-station and
/// global per-slot caps, non-negativity. Empty result means feasible.
inline std::vector<Violation> verify_primal_feasibility(const Instance& in,
                                                        const Schedule& schedule) {
  std::vector<Violation> violations;
  const auto index = request_index(in);

  std::vector<double> slot_total(static_cast<std::size_t>(in.horizon) + 1, 0.0);
  std::vector<std::vector<double>> slot_station(
      static_cast<std::size_t>(in.horizon) + 1,
      std::vector<double>(static_cast<std::size_t>(in.num_stations()) + 1, 0.0));

  for (const auto& [id, slots] : schedule.allocation) {
    const std::string who = "request " + std::to_string(id);
    const auto it = index.find(id);
    if (it == index.end()) {
      violations.push_back({who, "not part of the instance"});
      continue;
    }
    const ChargingRequest& r = *it->second;
    for (const auto& [t, energy] : slots) {
      if (energy < -kEnergyTol)
        violations.push_back({who, "negative energy " + detail::fmt(energy) + " in slot " +
                                       std::to_string(t)});
      if (t < 1 || t > in.horizon) {
        violations.push_back({who, "allocation in slot " + std::to_string(t) +
                                       " outside the horizon"});
        continue;
      }
      if (t > r.deadline && energy > kEnergyTol)
        violations.push_back({who, "energy " + detail::fmt(energy) + " after deadline in slot " +
                                       std::to_string(t)});
      if (energy > r.max_rate + kEnergyTol)
        violations.push_back({who, "slot " + std::to_string(t) + " rate " + detail::fmt(energy) +
                                       " exceeds max rate by " +
                                       detail::fmt(energy - r.max_rate)});
      slot_total[static_cast<std::size_t>(t)] += energy;
      slot_station[static_cast<std::size_t>(t)][static_cast<std::size_t>(r.station)] += energy;
    }
  }

  for (const auto& r : in.requests) {
    const double received = schedule.total_energy(r.id);
    const bool is_selected = schedule.selected.count(r.id) != 0;
    const double target = is_selected ? r.demand : 0.0;
    if (std::fabs(received - target) > kEnergyTol) {
      violations.push_back({"request " + std::to_string(r.id),
                            std::string(is_selected ? "selected" : "unselected") + " but received " +
                                detail::fmt(received) + " of " + detail::fmt(target)});
    }
  }
  for (int id : schedule.selected) {
    if (index.find(id) == index.end())
      violations.push_back({"request " + std::to_string(id), "selected but not part of the instance"});
  }

  for (int t = 1; t <= in.horizon; ++t) {
    const double total = slot_total[static_cast<std::size_t>(t)];
    if (total > in.global_cap + kEnergyTol)
      violations.push_back({"slot " + std::to_string(t),
                            "global load " + detail::fmt(total) + " exceeds cap by " +
                                detail::fmt(total - in.global_cap)});
    for (int j = 1; j <= in.num_stations(); ++j) {
      const double local = slot_station[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      if (local > in.station_cap(j) + kEnergyTol)
        violations.push_back({"station " + std::to_string(j) + ", slot " + std::to_string(t),
                              "load " + detail::fmt(local) + " exceeds cap by " +
                                  detail::fmt(local - in.station_cap(j))});
    }
  }
  return violations;
}

/// Checks the dual constraint for every (request, slot <= deadline) pair at
/// tolerance 1e-9, with the certificate's actual gamma and pi values:
///   alpha_i + beta(t) + gamma(t) + pi_i(t) - (k_i/D_i) sum_{t'<=d_i} pi_i(t')
///     >= v_i / D_i.
/// Also flags negative entries and an inconsistent stored objective.
inline std::vector<Violation> verify_dual_feasibility(const Instance& in,
                                                      const DualCertificate& cert) {
  std::vector<Violation> violations;

  for (const auto& [id, a] : cert.alpha)
    if (a < 0.0)
      violations.push_back({"request " + std::to_string(id), "negative alpha"});
  for (int t = 1; t < static_cast<int>(cert.beta.size()); ++t)
    if (cert.beta[static_cast<std::size_t>(t)] < 0.0)
      violations.push_back({"slot " + std::to_string(t), "negative beta"});
  for (int t = 1; t < static_cast<int>(cert.gamma.size()); ++t)
    if (cert.gamma[static_cast<std::size_t>(t)] < 0.0)
      violations.push_back({"slot " + std::to_string(t), "negative gamma"});
  for (const auto& [id, slots] : cert.pi)
    for (const auto& [t, v] : slots)
      if (v < 0.0)
        violations.push_back(
            {"request " + std::to_string(id) + ", slot " + std::to_string(t), "negative pi"});

  const double recomputed = dual_objective_value(in, cert);
  if (std::fabs(recomputed - cert.dual_objective) >
      1e-9 * std::max(1.0, std::fabs(recomputed)))
    violations.push_back({"certificate", "stored objective " + detail::fmt(cert.dual_objective) +
                                             " does not match its fields (" +
                                             detail::fmt(recomputed) + ")"});

  for (const auto& r : in.requests) {
    const double required = marginal_value(r);
    double pi_sum = 0.0;
    for (int t = 1; t <= std::min(r.deadline, in.horizon); ++t) pi_sum += cert.pi_of(r.id, t);
    for (int t = 1; t <= std::min(r.deadline, in.horizon); ++t) {
      const double lhs = cert.alpha_of(r.id) + cert.beta_at(t) + cert.gamma_at(t) +
                         cert.pi_of(r.id, t) - (r.max_rate / r.demand) * pi_sum;
      if (lhs < required - 1e-9) {
        violations.push_back({"request " + std::to_string(r.id) + ", slot " + std::to_string(t),
                              "dual cover " + detail::fmt(lhs) + " below " +
                                  detail::fmt(required)});
      }
    }
  }
  return violations;
}

struct StationCoverCheck {
  int station = 0;
  double beta_cost = 0.0; ///< C_j * sum_t beta(t)
  double phi_mass = 0.0;  ///< summed phi of the selected requests in j
  bool ok = false;
};

struct BoundReport {
  double dual_objective = 0.0;
  double alpha_bound = 0.0;
  double revenue = 0.0;
  double alpha_times_revenue = 0.0;
  bool dual_bounded = false; ///< dual objective <= alpha_bound * revenue

  bool phi_available = false;
  std::vector<StationCoverCheck> station_cover_checks;

  std::optional<double> opt_revenue;
  bool weak_duality_ok = true; ///< dual objective >= opt (when opt provided)
  double ratio_to_opt = 0.0;   ///< revenue / opt (when opt provided)
};

using PhiTable = std::map<int, std::map<int, double>>;

/// Numeric certificate of the approximation guarantee for one run. Reports
/// the dual objective against alpha * revenue, the per-station cover charge
/// when phi bookkeeping is supplied, and weak duality against an exact
/// optimum when one is supplied. Requires slackness > 1.
inline BoundReport verify_bound(const Instance& in, const Schedule& schedule,
                                const DualCertificate& cert, const PhiTable* phi = nullptr,
                                std::optional<double> opt_revenue = std::nullopt) {
  if (!(in.slackness > 1.0))
    throw BoundUndefinedError("bound verification requires slackness > 1");

  BoundReport report;
  report.dual_objective = dual_objective_value(in, cert);
  report.alpha_bound = approximation_bound(in);
  report.revenue = schedule_revenue(in, schedule);
  report.alpha_times_revenue = report.alpha_bound * report.revenue;
  report.dual_bounded =
      report.dual_objective <=
      report.alpha_times_revenue + 1e-9 * std::max(1.0, std::fabs(report.alpha_times_revenue));

  if (phi != nullptr) {
    report.phi_available = true;
    const auto index = request_index(in);
    double beta_sum = 0.0;
    for (int t = 1; t <= in.horizon; ++t) beta_sum += cert.beta_at(t);
    for (int j = 1; j <= in.num_stations(); ++j) {
      StationCoverCheck check;
      check.station = j;
      check.beta_cost = in.station_cap(j) * beta_sum;
      for (int id : schedule.selected) {
        const auto it = index.find(id);
        if (it == index.end() || it->second->station != j) continue;
        const auto pit = phi->find(id);
        if (pit == phi->end()) continue;
        for (const auto& [t, mass] : pit->second)
          if (t <= it->second->deadline) check.phi_mass += mass;
      }
      check.ok = check.beta_cost <= check.phi_mass + 1e-9 * std::max(1.0, check.phi_mass);
      report.station_cover_checks.push_back(check);
    }
  }

  if (opt_revenue) {
    report.opt_revenue = opt_revenue;
    report.weak_duality_ok =
        report.dual_objective >= *opt_revenue - 1e-9 * std::max(1.0, std::fabs(*opt_revenue));
    report.ratio_to_opt = *opt_revenue > 0.0 ? report.revenue / *opt_revenue : 1.0;
  }
  return report;
}

/// Fixed CSV layout shared by the run and sweep commands.
inline std::string metrics_csv_header(int num_stations) {
  std::ostringstream out;
  out << "instance_id,engine,revenue,normalized_revenue,utilization,acceptance_rate,actual_peak";
  for (int j = 1; j <= num_stations; ++j) out << ",peak_station_" << j;
  out << ",alpha_bound,dual_objective,opt_revenue,ratio_to_opt";
  return out.str();
}

inline std::string metrics_csv_row(const std::string& instance_id, const std::string& engine,
                                   const MetricsReport& report, int num_stations,
                                   std::optional<double> alpha_bound,
                                   std::optional<double> dual_objective,
                                   std::optional<double> opt_revenue,
                                   std::optional<double> ratio_to_opt) {
  std::ostringstream out;
  out << instance_id << ',' << engine << ',' << detail::fmt(report.revenue) << ','
      << detail::fmt(report.normalized_revenue) << ',' << detail::fmt(report.utilization) << ','
      << detail::fmt(report.acceptance_rate) << ',' << detail::fmt(report.actual_peak);
  for (int j = 1; j <= num_stations; ++j) {
    out << ',';
    if (j <= static_cast<int>(report.per_station_peaks.size()))
      out << detail::fmt(report.per_station_peaks[static_cast<std::size_t>(j) - 1]);
  }
  out << ',' << (alpha_bound ? detail::fmt(*alpha_bound) : "");
  out << ',' << (dual_objective ? detail::fmt(*dual_objective) : "");
  out << ',' << (opt_revenue ? detail::fmt(*opt_revenue) : "");
  out << ',' << (ratio_to_opt ? detail::fmt(*ratio_to_opt) : "");
  return out.str();
}

} // namespace peakshaver
