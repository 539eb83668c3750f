#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace peakshaver {

/// Absolute tolerance (kWh) for comparisons against caps and demands.
/// Energy is real-valued; accumulated floating-point error is absorbed here.
inline constexpr double kEnergyTol = 1e-9;

class InvalidInstanceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the approximation bound diverges (s == 1, or a station's
/// maximum charging rate reaches its cap).
class BoundUndefinedError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class InstanceTooLargeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One EV's charging request. An EV is either charged to its full demand
/// within [1, deadline] (earning `value`) or not charged at all.
struct ChargingRequest {
  int id = 0;            ///< unique within an instance, 1-based
  int station = 0;       ///< assigned station, 1-based
  double demand = 0.0;   ///< total energy requested (kWh)
  int deadline = 0;      ///< last slot usable for charging, 1-based
  double max_rate = 0.0; ///< per-slot charging limit (kWh/slot)
  double value = 0.0;    ///< revenue if fully charged by the deadline
};

struct Station {
  double cap = 0.0; ///< per-slot energy limit (kWh/slot)
};

/// A scheduling problem: a slotted horizon, stations with local per-slot
/// caps, one global per-slot cap across all stations, and the request set.
/// `slackness` is the guaranteed minimum ratio between any EV's deadline and
/// its minimum charging time; every request must satisfy
/// demand <= max_rate * deadline / slackness.
struct Instance {
  int horizon = 0;         ///< T, number of slots (1-based indexing)
  double global_cap = 0.0; ///< per-slot cap on the summed draw of all stations
  double slackness = 1.0;  ///< s >= 1
  std::vector<Station> stations;
  std::vector<ChargingRequest> requests;

  int num_stations() const { return static_cast<int>(stations.size()); }
  int num_requests() const { return static_cast<int>(requests.size()); }
  double station_cap(int j) const { return stations.at(static_cast<std::size_t>(j) - 1).cap; }
};

/// Largest per-slot rate among requests assigned to each station, indexed
/// 1..m ([0] unused). Stations with no requests report 0.
inline std::vector<double> station_max_rates(const Instance& in) {
  std::vector<double> rates(static_cast<std::size_t>(in.num_stations()) + 1, 0.0);
  for (const auto& r : in.requests) {
    if (r.station >= 1 && r.station <= in.num_stations()) {
      rates[static_cast<std::size_t>(r.station)] =
          std::max(rates[static_cast<std::size_t>(r.station)], r.max_rate);
    }
  }
  return rates;
}

struct Violation {
  std::string subject;   ///< offending request/station/instance
  std::string condition; ///< which condition failed and by how much
};

struct ValidationReport {
  std::vector<Violation> violations; ///< instance must be rejected
  std::vector<Violation> warnings;   ///< flagged but tolerated
  bool ok() const { return violations.empty(); }
};

/// Checks every instance and request invariant. Violations are data, not
/// failures; an empty `violations` list means the instance is usable.
/// A station whose maximum rate reaches its cap is only warned about: such
/// instances schedule fine but have no finite approximation bound.
inline ValidationReport validate_instance(const Instance& in) {
  ValidationReport report;
  auto fail = [&report](std::string subject, std::string condition) {
    report.violations.push_back({std::move(subject), std::move(condition)});
  };

  if (in.horizon < 1) fail("instance", "horizon must be at least 1");
  if (!(in.global_cap > 0.0)) fail("instance", "global cap must be positive");
  if (!(in.slackness >= 1.0)) fail("instance", "slackness must be at least 1");
  for (int j = 1; j <= in.num_stations(); ++j) {
    if (!(in.station_cap(j) > 0.0))
      fail("station " + std::to_string(j), "cap must be positive");
  }

  std::set<int> seen_ids;
  for (const auto& r : in.requests) {
    const std::string who = "request " + std::to_string(r.id);
    if (!seen_ids.insert(r.id).second) fail(who, "duplicate id");
    if (r.station < 1 || r.station > in.num_stations())
      fail(who, "invalid station " + std::to_string(r.station));
    if (r.deadline < 1 || r.deadline > in.horizon)
      fail(who, "deadline " + std::to_string(r.deadline) + " outside [1," +
                    std::to_string(in.horizon) + "]");
    if (!(r.demand > 0.0)) fail(who, "demand must be positive");
    if (!(r.max_rate > 0.0)) fail(who, "max rate must be positive");
    if (!(r.value > 0.0)) fail(who, "value must be positive");
    if (r.demand > 0.0 && r.max_rate > 0.0 && r.deadline >= 1 && in.slackness >= 1.0) {
      const double limit = r.max_rate * r.deadline / in.slackness;
      if (r.demand > limit + kEnergyTol)
        fail(who, "demand " + std::to_string(r.demand) +
                      " exceeds max_rate*deadline/slackness = " + std::to_string(limit));
    }
  }

  const auto rates = station_max_rates(in);
  for (int j = 1; j <= in.num_stations(); ++j) {
    const double k = rates[static_cast<std::size_t>(j)];
    if (k > 0.0 && k >= in.station_cap(j)) {
      report.warnings.push_back(
          {"station " + std::to_string(j),
           "max charging rate reaches the local cap; approximation bound is unbounded"});
    }
  }
  return report;
}

/// Revenue per unit of demanded energy, v_i / D_i — the greedy's sort key.
inline double marginal_value(const ChargingRequest& r) {
  if (r.demand == 0.0)
    throw std::domain_error("marginal value undefined: request " + std::to_string(r.id) +
                            " has zero demand");
  return r.value / r.demand;
}

/// Processing order used by every engine: non-increasing marginal value,
/// ties broken by smaller id so runs are reproducible.
inline bool marginal_value_before(const ChargingRequest& a, const ChargingRequest& b) {
  const double ma = marginal_value(a);
  const double mb = marginal_value(b);
  if (ma != mb) return ma > mb;
  return a.id < b.id;
}

/// Worst-case revenue ratio guarantee for the scheduler,
///   1 + sum_j [C_j / (C_j - K_j)] * [s / (s - 1)],
/// summed over stations that have at least one request (an empty station
/// has no K_j and contributes nothing). Diverges when s == 1 or when some
/// populated station's K_j reaches its cap.
inline double approximation_bound(const Instance& in) {
  if (!(in.slackness > 1.0))
    throw BoundUndefinedError("approximation bound diverges for slackness <= 1");
  const double stretch = in.slackness / (in.slackness - 1.0);
  const auto rates = station_max_rates(in);
  double sum = 0.0;
  for (int j = 1; j <= in.num_stations(); ++j) {
    const double k = rates[static_cast<std::size_t>(j)];
    if (k == 0.0) continue; // no requests in this station
    const double cap = in.station_cap(j);
    if (k >= cap)
      throw BoundUndefinedError("approximation bound diverges: station " + std::to_string(j) +
                                " max rate reaches its cap");
    sum += cap / (cap - k) * stretch;
  }
  return 1.0 + sum;
}

/// Per-EV per-slot energy assignment plus the set of fully served requests.
/// Only positive entries are stored; everything absent is zero.
struct Schedule {
  std::map<int, std::map<int, double>> allocation; ///< id -> slot -> kWh
  std::set<int> selected;

  double energy(int id, int slot) const {
    const auto it = allocation.find(id);
    if (it == allocation.end()) return 0.0;
    const auto jt = it->second.find(slot);
    return jt == it->second.end() ? 0.0 : jt->second;
  }

  double total_energy(int id) const {
    const auto it = allocation.find(id);
    if (it == allocation.end()) return 0.0;
    double sum = 0.0;
    for (const auto& [slot, e] : it->second) sum += e;
    return sum;
  }
};

/// Dual assignment produced by a run: alpha per request, beta/gamma per
/// slot (index 1..T, [0] unused), pi per (request, slot). gamma and pi are
/// carried for completeness; the engines never assign them.
struct DualCertificate {
  std::map<int, double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::map<int, std::map<int, double>> pi;
  double dual_objective = 0.0;

  double alpha_of(int id) const {
    const auto it = alpha.find(id);
    return it == alpha.end() ? 0.0 : it->second;
  }
  double beta_at(int t) const {
    return (t >= 1 && t < static_cast<int>(beta.size())) ? beta[static_cast<std::size_t>(t)]
                                                         : 0.0;
  }
  double gamma_at(int t) const {
    return (t >= 1 && t < static_cast<int>(gamma.size())) ? gamma[static_cast<std::size_t>(t)]
                                                          : 0.0;
  }
  double pi_of(int id, int t) const {
    const auto it = pi.find(id);
    if (it == pi.end()) return 0.0;
    const auto jt = it->second.find(t);
    return jt == it->second.end() ? 0.0 : jt->second;
  }
};

inline const ChargingRequest* find_request(const Instance& in, int id) {
  for (const auto& r : in.requests)
    if (r.id == id) return &r;
  return nullptr;
}

inline std::map<int, const ChargingRequest*> request_index(const Instance& in) {
  std::map<int, const ChargingRequest*> index;
  for (const auto& r : in.requests) index.emplace(r.id, &r);
  return index;
}

/// Dual objective recomputed from the certificate's fields:
///   sum_i D_i alpha_i + sum_t (sum_j C_j) beta(t) + sum_t C_total gamma(t).
/// beta carries no station index; it enters with the summed local caps.
inline double dual_objective_value(const Instance& in, const DualCertificate& cert) {
  const auto index = request_index(in);
  double lambda = 0.0;
  for (const auto& [id, a] : cert.alpha) {
    const auto it = index.find(id);
    if (it == index.end())
      throw InvalidInstanceError("certificate references unknown request " + std::to_string(id));
    lambda += it->second->demand * a;
  }
  double caps_sum = 0.0;
  for (const auto& s : in.stations) caps_sum += s.cap;
  for (int t = 1; t <= in.horizon; ++t) {
    lambda += caps_sum * cert.beta_at(t);
    lambda += in.global_cap * cert.gamma_at(t);
  }
  return lambda;
}

inline double schedule_revenue(const Instance& in, const Schedule& s) {
  const auto index = request_index(in);
  double revenue = 0.0;
  for (int id : s.selected) {
    const auto it = index.find(id);
    if (it == index.end())
      throw InvalidInstanceError("schedule references unknown request " + std::to_string(id));
    revenue += it->second->value;
  }
  return revenue;
}

} // namespace peakshaver
