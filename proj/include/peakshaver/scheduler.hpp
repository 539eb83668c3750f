#pragma once

#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakshaver/model.hpp"

namespace peakshaver {

/// Slot preference while allocating one request.
enum class RankingPolicy {
  /// Prefer the slot with the most effective remaining capacity; break ties
  /// toward later slots. This is the valley-filling rule.
  kValleyFillRightToLeft,
  /// Later slot always wins, remaining capacity is ignored. Used by the
  /// per-station comparison engine.
  kRightToLeftOnly,
};

struct EngineOptions {
  RankingPolicy ranking = RankingPolicy::kValleyFillRightToLeft;
  bool reconsider = true;        ///< run the phase-2 exchange pass
  bool track_certificate = true; ///< maintain beta covers and the dual bookkeeping
  /// Experimental: re-pick the best-ranked slot after every slot's
  /// allocation instead of ranking once up front. Allocating to a slot never
  /// changes another slot's remaining capacity, so this produces identical
  /// schedules; the switch exists to make that claim testable.
  bool rerank_each_step = false;
};

struct TraceRecord {
  std::string engine;
  int phase = 1;
  int request_id = 0;
  std::string decision; ///< allocated | rejected | covered | swapped
  std::vector<int> slots_touched;
  double revenue_so_far = 0.0;
  std::optional<double> delta; ///< phase-2 pre-removal capacity estimate
};

/// Mutable state of one engine run. Caps and derived station data are copied
/// from the instance up front, so the state is self-contained. Per-slot
/// vectors are 1-based; index 0 is unused.
struct SchedulerState {
  int horizon = 0;
  double global_cap = 0.0;
  double slackness = 1.0;
  std::vector<double> station_caps;    ///< [1..m]
  std::vector<double> station_max_rate; ///< K_j, [1..m]

  std::vector<std::vector<double>> local_load; ///< [t][j]
  std::vector<double> global_load;             ///< [t]
  std::vector<double> beta;                    ///< [t]
  Schedule schedule;
  std::map<int, double> alpha;
  std::map<int, std::map<int, double>> phi; ///< analysis bookkeeping only

  explicit SchedulerState(const Instance& in)
      : horizon(in.horizon),
        global_cap(in.global_cap),
        slackness(in.slackness),
        station_caps(static_cast<std::size_t>(in.num_stations()) + 1, 0.0),
        station_max_rate(station_max_rates(in)),
        local_load(static_cast<std::size_t>(in.horizon) + 1,
                   std::vector<double>(static_cast<std::size_t>(in.num_stations()) + 1, 0.0)),
        global_load(static_cast<std::size_t>(in.horizon) + 1, 0.0),
        beta(static_cast<std::size_t>(in.horizon) + 1, 0.0) {
    for (int j = 1; j <= in.num_stations(); ++j)
      station_caps[static_cast<std::size_t>(j)] = in.station_cap(j);
  }

  double phi_of(int id, int t) const {
    const auto it = phi.find(id);
    if (it == phi.end()) return 0.0;
    const auto jt = it->second.find(t);
    return jt == it->second.end() ? 0.0 : jt->second;
  }
};

/// Capacity still assignable at (t, j): the local headroom capped by the
/// global headroom. The written algorithm tracks only the local term; taking
/// the min is what keeps multi-station output inside the global cap.
inline double effective_remaining(const SchedulerState& st, int t, int j) {
  const double local =
      st.station_caps[static_cast<std::size_t>(j)] - st.local_load[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
  const double global = st.global_cap - st.global_load[static_cast<std::size_t>(t)];
  return std::min(local, global);
}

/// True iff the request's full demand fits before its deadline:
/// sum_{t<=d} min(effective_remaining(t, station), max_rate) >= demand.
inline bool feasibility_check(const SchedulerState& st, const ChargingRequest& r) {
  double available = 0.0;
  const int last = std::min(r.deadline, st.horizon);
  for (int t = 1; t <= last; ++t)
    available += std::min(effective_remaining(st, t, r.station), r.max_rate);
  return available >= r.demand - kEnergyTol;
}

/// Writes the request's full demand into slots [1, deadline] and sets its
/// dual variable to v/D. Slots are ranked once (highest effective remaining
/// first under valley filling, ties to the later slot; pure slot order under
/// right-to-left) and drained in rank order, each receiving
/// min(max_rate, effective remaining, unplaced demand).
/// Caller must have passed feasibility_check. Returns the slots written.
inline std::vector<int> smart_allocate(SchedulerState& st, const ChargingRequest& r,
                                       RankingPolicy policy, bool rerank_each_step = false) {
  const int last = std::min(r.deadline, st.horizon);
  std::vector<int> slots(static_cast<std::size_t>(last));
  std::iota(slots.begin(), slots.end(), 1);

  const auto ranks_before = [&](int t1, int t2) {
    if (policy == RankingPolicy::kValleyFillRightToLeft) {
      const double r1 = effective_remaining(st, t1, r.station);
      const double r2 = effective_remaining(st, t2, r.station);
      if (r1 != r2) return r1 > r2;
    }
    return t1 > t2;
  };
  if (!rerank_each_step) std::sort(slots.begin(), slots.end(), ranks_before);

  std::vector<int> written;
  double unplaced = r.demand;
  std::size_t next = 0;
  while (unplaced > 0.0 && next < slots.size()) {
    std::size_t pick = next;
    if (rerank_each_step) {
      for (std::size_t c = next + 1; c < slots.size(); ++c)
        if (ranks_before(slots[c], slots[pick])) pick = c;
      std::swap(slots[next], slots[pick]);
    }
    const int t = slots[next];
    ++next;
    const double amount =
        std::min({r.max_rate, effective_remaining(st, t, r.station), unplaced});
    if (amount <= 0.0) continue;
    st.schedule.allocation[r.id][t] += amount;
    st.local_load[static_cast<std::size_t>(t)][static_cast<std::size_t>(r.station)] += amount;
    st.global_load[static_cast<std::size_t>(t)] += amount;
    unplaced -= amount;
    written.push_back(t);
  }
  if (unplaced > kEnergyTol)
    throw std::logic_error("allocation left " + std::to_string(unplaced) +
                           " kWh unplaced for request " + std::to_string(r.id) +
                           "; feasibility precondition violated");

  st.schedule.selected.insert(r.id);
  st.alpha[r.id] = marginal_value(r);
  std::sort(written.begin(), written.end());
  return written;
}

/// Dual cover for a rejected request. beta is raised to v/D on
/// [t_cov, R(d)], where t_cov is the first uncovered slot and R(d) extends
/// past the deadline across every consecutive slot whose effective remaining
/// capacity is below the station's maximum rate. Phi bookkeeping charges the
/// cover against already-scheduled energy; it never alters the schedule and
/// is skipped where its factor is undefined (s == 1 or max_rate >= cap).
/// Precondition: beta(d) == 0. Returns the covered range {t_cov, R(d)}.
inline std::pair<int, int> beta_cover(SchedulerState& st, const ChargingRequest& r) {
  const double mv = marginal_value(r);
  int t_cov = 1;
  while (t_cov <= st.horizon && st.beta[static_cast<std::size_t>(t_cov)] != 0.0) ++t_cov;

  int cover_end = std::min(r.deadline, st.horizon);
  const double station_rate = st.station_max_rate[static_cast<std::size_t>(r.station)];
  while (cover_end + 1 <= st.horizon &&
         effective_remaining(st, cover_end + 1, r.station) < station_rate)
    ++cover_end;

  for (int t = t_cov; t <= cover_end; ++t) st.beta[static_cast<std::size_t>(t)] = mv;

  const double cap = st.station_caps[static_cast<std::size_t>(r.station)];
  if (st.slackness > 1.0 && cap > r.max_rate) {
    const double factor =
        (cap / (cap - r.max_rate)) * (st.slackness / (st.slackness - 1.0)) * mv;
    for (const auto& [id, slots] : st.schedule.allocation) {
      for (const auto& [t, energy] : slots) {
        if (t <= cover_end && energy > 0.0 && st.phi_of(id, t) == 0.0)
          st.phi[id][t] = factor * energy;
      }
    }
  }
  return {t_cov, cover_end};
}

/// Removes one request's energy from the schedule and the load counters.
/// Its dual variable alpha is deliberately retained: the certificate keeps
/// covering the request after it loses its slots.
inline void deallocate(SchedulerState& st, const ChargingRequest& r) {
  const auto it = st.schedule.allocation.find(r.id);
  if (it != st.schedule.allocation.end()) {
    for (const auto& [t, energy] : it->second) {
      st.local_load[static_cast<std::size_t>(t)][static_cast<std::size_t>(r.station)] -= energy;
      st.global_load[static_cast<std::size_t>(t)] -= energy;
    }
    st.schedule.allocation.erase(it);
  }
  st.schedule.selected.erase(r.id);
}

struct ReconsiderOutcome {
  bool swapped = false;
  std::vector<int> removed_ids;
  std::vector<int> slots_written;
  double capacity_estimate = 0.0; ///< feasible energy before any removal
};

/// Exchange step for a request that is currently unselected. Walks the
/// already-processed requests nearest-first (`earlier` must be in reverse
/// processing order) and collects selected same-station candidates whose
/// removal still leaves a strict value gain. If the freed capacity covers
/// the demand, the candidates are removed and the request is allocated;
/// otherwise nothing changes. Any performed swap strictly increases the
/// selected value.
inline ReconsiderOutcome reconsider(SchedulerState& st, const ChargingRequest& r,
                                    std::span<const ChargingRequest* const> earlier,
                                    RankingPolicy policy, bool rerank_each_step = false) {
  ReconsiderOutcome out;
  const int last = std::min(r.deadline, st.horizon);

  std::vector<double> gain(static_cast<std::size_t>(last) + 1, 0.0);
  for (int t = 1; t <= last; ++t) {
    gain[static_cast<std::size_t>(t)] =
        std::min(r.max_rate, effective_remaining(st, t, r.station));
    out.capacity_estimate += gain[static_cast<std::size_t>(t)];
  }

  double value_margin = r.value;
  std::vector<const ChargingRequest*> removal_list;
  for (const ChargingRequest* prev : earlier) {
    if (st.schedule.selected.count(prev->id) == 0) continue;
    if (prev->station != r.station) continue;
    if (!(value_margin - prev->value > 0.0)) continue;
    removal_list.push_back(prev);
    value_margin -= prev->value;
    for (int t = 1; t <= last; ++t) {
      gain[static_cast<std::size_t>(t)] = std::min(
          r.max_rate, gain[static_cast<std::size_t>(t)] + st.schedule.energy(prev->id, t));
    }
  }

  double reachable = 0.0;
  for (int t = 1; t <= last; ++t) reachable += gain[static_cast<std::size_t>(t)];
  if (reachable < r.demand - kEnergyTol) return out;

  for (const ChargingRequest* prev : removal_list) {
    deallocate(st, *prev);
    out.removed_ids.push_back(prev->id);
  }
  out.slots_written = smart_allocate(st, r, policy, rerank_each_step);
  out.swapped = true;
  return out;
}

struct RunResult {
  Schedule schedule;
  DualCertificate certificate;
  std::vector<TraceRecord> trace;
  std::map<int, std::map<int, double>> phi;
  double phase1_revenue = 0.0;
  double revenue = 0.0;
};

namespace detail {

/// Shared two-phase engine. Phase 1 processes requests in marginal-value
/// order: allocate when feasible, otherwise lay a beta cover when the
/// deadline slot is still uncovered. Phase 2 revisits each still-unselected
/// request once, in the same order, attempting an exchange.
inline RunResult run_engine(const Instance& in, const EngineOptions& opt,
                            const std::string& engine_tag) {
  RunResult result;
  SchedulerState st(in);

  std::vector<const ChargingRequest*> order;
  order.reserve(in.requests.size());
  for (const auto& r : in.requests) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const ChargingRequest* a, const ChargingRequest* b) {
              return marginal_value_before(*a, *b);
            });

  double revenue = 0.0;
  const auto index = request_index(in);

  for (const ChargingRequest* r : order) {
    TraceRecord rec;
    rec.engine = engine_tag;
    rec.phase = 1;
    rec.request_id = r->id;
    if (feasibility_check(st, *r)) {
      rec.slots_touched = smart_allocate(st, *r, opt.ranking, opt.rerank_each_step);
      revenue += r->value;
      rec.decision = "allocated";
    } else if (opt.track_certificate &&
               st.beta[static_cast<std::size_t>(std::min(r->deadline, st.horizon))] == 0.0) {
      const auto [from, to] = beta_cover(st, *r);
      for (int t = from; t <= to; ++t) rec.slots_touched.push_back(t);
      rec.decision = "covered";
    } else {
      rec.decision = "rejected";
    }
    rec.revenue_so_far = revenue;
    result.trace.push_back(std::move(rec));
  }
  result.phase1_revenue = revenue;

  if (opt.reconsider) {
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const ChargingRequest* r = order[pos];
      if (st.schedule.selected.count(r->id) != 0) continue;
      std::vector<const ChargingRequest*> earlier;
      earlier.reserve(pos);
      for (std::size_t q = pos; q-- > 0;) earlier.push_back(order[q]);

      const ReconsiderOutcome outcome =
          reconsider(st, *r, earlier, opt.ranking, opt.rerank_each_step);

      TraceRecord rec;
      rec.engine = engine_tag;
      rec.phase = 2;
      rec.request_id = r->id;
      rec.delta = outcome.capacity_estimate;
      if (outcome.swapped) {
        rec.decision = "swapped";
        rec.slots_touched = outcome.slots_written;
        revenue += r->value;
        for (int removed : outcome.removed_ids) revenue -= index.at(removed)->value;
      } else {
        rec.decision = "rejected";
      }
      rec.revenue_so_far = revenue;
      result.trace.push_back(std::move(rec));
    }
  }

  result.revenue = revenue;
  result.schedule = std::move(st.schedule);
  if (opt.track_certificate) {
    result.certificate.alpha = std::move(st.alpha);
    result.certificate.beta = std::move(st.beta);
    result.certificate.gamma.assign(static_cast<std::size_t>(in.horizon) + 1, 0.0);
    result.certificate.dual_objective = dual_objective_value(in, result.certificate);
    result.phi = std::move(st.phi);
  }
  return result;
}

} // namespace detail

/// Full scheduling run: validates the instance, then executes both phases
/// with valley-filling allocation and certificate tracking. The result is
/// deterministic given the instance.
inline RunResult run_scs(const Instance& in, const EngineOptions& opt = {}) {
  const ValidationReport report = validate_instance(in);
  if (!report.ok()) {
    throw InvalidInstanceError("invalid instance: " + report.violations.front().subject + ": " +
                               report.violations.front().condition);
  }
  return detail::run_engine(in, opt, "scs");
}

} // namespace peakshaver
