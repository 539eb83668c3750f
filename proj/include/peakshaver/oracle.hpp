#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "peakshaver/model.hpp"

namespace peakshaver {

namespace detail {

// Capacities are scaled to integer units of 1e-9 kWh so the max-flow
// terminates exactly and witness schedules stay within the 1e-9 kWh
// tolerance used by the feasibility checkers.
inline constexpr double kFlowScale = 1e9;

inline std::int64_t to_flow_units(double kwh) {
  return static_cast<std::int64_t>(std::llround(kwh * kFlowScale));
}

inline double from_flow_units(std::int64_t units) {
  return static_cast<double>(units) / kFlowScale;
}

/// Dinic max-flow on integer capacities.
class FlowGraph {
public:
  explicit FlowGraph(int nodes) : adjacency_(static_cast<std::size_t>(nodes)) {}

  int add_edge(int from, int to, std::int64_t cap) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({to, cap});
    edges_.push_back({from, 0});
    adjacency_[static_cast<std::size_t>(from)].push_back(id);
    adjacency_[static_cast<std::size_t>(to)].push_back(id + 1);
    return id;
  }

  std::int64_t flow_on(int edge_id) const {
    return edges_[static_cast<std::size_t>(edge_id) + 1].cap;
  }

  std::int64_t max_flow(int source, int sink) {
    std::int64_t total = 0;
    while (build_levels(source, sink)) {
      iter_.assign(adjacency_.size(), 0);
      while (std::int64_t pushed =
                 augment(source, sink, std::numeric_limits<std::int64_t>::max()))
        total += pushed;
    }
    return total;
  }

private:
  struct Edge {
    int to;
    std::int64_t cap;
  };

  bool build_levels(int source, int sink) {
    level_.assign(adjacency_.size(), -1);
    std::queue<int> queue;
    level_[static_cast<std::size_t>(source)] = 0;
    queue.push(source);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int id : adjacency_[static_cast<std::size_t>(u)]) {
        const Edge& e = edges_[static_cast<std::size_t>(id)];
        if (e.cap > 0 && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          queue.push(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(sink)] >= 0;
  }

  std::int64_t augment(int u, int sink, std::int64_t limit) {
    if (u == sink) return limit;
    auto& cursor = iter_[static_cast<std::size_t>(u)];
    for (; cursor < adjacency_[static_cast<std::size_t>(u)].size(); ++cursor) {
      const int id = adjacency_[static_cast<std::size_t>(u)][cursor];
      Edge& e = edges_[static_cast<std::size_t>(id)];
      if (e.cap <= 0 || level_[static_cast<std::size_t>(e.to)] !=
                            level_[static_cast<std::size_t>(u)] + 1)
        continue;
      const std::int64_t pushed = augment(e.to, sink, std::min(limit, e.cap));
      if (pushed > 0) {
        e.cap -= pushed;
        edges_[static_cast<std::size_t>(id ^ 1)].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> level_;
  std::vector<std::size_t> iter_;
};

} // namespace detail

struct FeasibilityResult {
  bool feasible = false;
  Schedule witness; ///< a valid schedule for the subset when feasible
};

namespace detail {

/// Feasibility of serving exactly `members` in full, optionally with the
/// per-slot global cap tightened to `peak_cap`. The network routes
/// source -> request -> (station, slot) -> slot -> sink with capacities
/// D_i, k_i, C_j and min(C_total, peak_cap).
inline FeasibilityResult subset_feasible(const Instance& in,
                                         const std::vector<const ChargingRequest*>& members,
                                         std::optional<double> peak_cap = std::nullopt) {
  const int n = static_cast<int>(members.size());
  const int m = in.num_stations();
  const int horizon = in.horizon;

  const int source = 0;
  const auto request_node = [](int idx) { return 1 + idx; };
  const auto cell_node = [&](int j, int t) { return 1 + n + (j - 1) * horizon + (t - 1); };
  const auto slot_node = [&](int t) { return 1 + n + m * horizon + (t - 1); };
  const int sink = 1 + n + m * horizon + horizon;

  detail::FlowGraph graph(sink + 1);

  double slot_cap = in.global_cap;
  if (peak_cap) slot_cap = std::min(slot_cap, *peak_cap);

  std::int64_t total_demand = 0;
  std::vector<std::vector<int>> request_edges(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    const ChargingRequest& r = *members[static_cast<std::size_t>(idx)];
    const std::int64_t demand_units = detail::to_flow_units(r.demand);
    total_demand += demand_units;
    graph.add_edge(source, request_node(idx), demand_units);
    const std::int64_t rate_units = detail::to_flow_units(r.max_rate);
    for (int t = 1; t <= std::min(r.deadline, horizon); ++t) {
      request_edges[static_cast<std::size_t>(idx)].push_back(
          graph.add_edge(request_node(idx), cell_node(r.station, t), rate_units));
    }
  }
  for (int j = 1; j <= m; ++j) {
    const std::int64_t cap_units = detail::to_flow_units(in.station_cap(j));
    for (int t = 1; t <= horizon; ++t) graph.add_edge(cell_node(j, t), slot_node(t), cap_units);
  }
  const std::int64_t slot_units = detail::to_flow_units(slot_cap);
  for (int t = 1; t <= horizon; ++t) graph.add_edge(slot_node(t), sink, slot_units);

  FeasibilityResult result;
  result.feasible = graph.max_flow(source, sink) == total_demand;
  if (!result.feasible) return result;

  for (int idx = 0; idx < n; ++idx) {
    const ChargingRequest& r = *members[static_cast<std::size_t>(idx)];
    result.witness.selected.insert(r.id);
    int t = 1;
    for (int edge_id : request_edges[static_cast<std::size_t>(idx)]) {
      const std::int64_t units = graph.flow_on(edge_id);
      if (units > 0) result.witness.allocation[r.id][t] = detail::from_flow_units(units);
      ++t;
    }
  }
  return result;
}

inline std::vector<const ChargingRequest*> subset_members(const Instance& in,
                                                          const std::set<int>& subset) {
  const auto index = request_index(in);
  std::vector<const ChargingRequest*> members;
  members.reserve(subset.size());
  for (int id : subset) {
    const auto it = index.find(id);
    if (it == index.end())
      throw InvalidInstanceError("subset references unknown request " + std::to_string(id));
    members.push_back(it->second);
  }
  return members;
}

} // namespace detail

/// True iff every request in `subset` can be served in full simultaneously;
/// the witness schedule satisfies all schedule invariants when feasible.
inline FeasibilityResult max_flow_feasible(const Instance& in, const std::set<int>& subset) {
  return detail::subset_feasible(in, detail::subset_members(in, subset));
}

struct OptResult {
  double revenue = 0.0;
  std::vector<int> subset; ///< ids, ascending
};

namespace detail {

/// Canonical subset value: summed in ascending id order so that every
/// enumeration strategy computes bit-identical revenues.
inline double subset_value(const std::vector<const ChargingRequest*>& all,
                           const std::vector<int>& chosen_indices) {
  std::vector<const ChargingRequest*> members;
  members.reserve(chosen_indices.size());
  for (int idx : chosen_indices) members.push_back(all[static_cast<std::size_t>(idx)]);
  std::sort(members.begin(), members.end(),
            [](const ChargingRequest* a, const ChargingRequest* b) { return a->id < b->id; });
  double value = 0.0;
  for (const auto* r : members) value += r->value;
  return value;
}

inline std::vector<int> subset_ids(const std::vector<const ChargingRequest*>& all,
                                   const std::vector<int>& chosen_indices) {
  std::vector<int> ids;
  ids.reserve(chosen_indices.size());
  for (int idx : chosen_indices) ids.push_back(all[static_cast<std::size_t>(idx)]->id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Shared best-so-far update. Equal-revenue optima (within `tie_tol`) keep
/// the lexicographically smallest id vector, so any enumeration order lands
/// on the same answer.
inline void consider_candidate(double value, std::vector<int> ids, double tie_tol,
                               OptResult& best, bool& has_best) {
  if (!has_best || value > best.revenue + tie_tol) {
    best = {value, std::move(ids)};
    has_best = true;
    return;
  }
  if (value >= best.revenue - tie_tol &&
      std::lexicographical_compare(ids.begin(), ids.end(), best.subset.begin(),
                                   best.subset.end())) {
    best.subset = std::move(ids);
  }
}

inline void check_enumerable(const Instance& in, int max_requests) {
  if (in.num_requests() > max_requests)
    throw InstanceTooLargeError("exact enumeration limited to " + std::to_string(max_requests) +
                                " requests, instance has " + std::to_string(in.num_requests()));
}

inline double tie_tolerance(double reference) {
  return 1e-9 * std::max(1.0, std::fabs(reference));
}

} // namespace detail

/// Exact optimal revenue by subset enumeration with two prunes: a branch is
/// cut when its value upper bound cannot beat the incumbent, and when the
/// chosen prefix is already infeasible (feasibility is monotone under
/// inclusion). Ties resolve to the lexicographically smallest id set.
inline OptResult brute_force_opt(const Instance& in, int max_requests = 16) {
  detail::check_enumerable(in, max_requests);
  std::vector<const ChargingRequest*> all;
  for (const auto& r : in.requests) all.push_back(&r);

  // value-descending order gives the tightest remaining-value prefix bound
  std::vector<int> order(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto* ra = all[static_cast<std::size_t>(a)];
    const auto* rb = all[static_cast<std::size_t>(b)];
    if (ra->value != rb->value) return ra->value > rb->value;
    return ra->id < rb->id;
  });
  std::vector<double> remaining_value(order.size() + 1, 0.0);
  for (std::size_t i = order.size(); i-- > 0;)
    remaining_value[i] =
        remaining_value[i + 1] + all[static_cast<std::size_t>(order[i])]->value;

  OptResult best{0.0, {}};
  bool has_best = false;
  detail::consider_candidate(0.0, {}, 0.0, best, has_best); // empty subset is always feasible

  std::vector<int> chosen;
  double chosen_value = 0.0;

  const std::function<void(std::size_t)> descend = [&](std::size_t pos) {
    // prune margin is loose enough to never cut a potential tie
    if (chosen_value + remaining_value[pos] <
        best.revenue - detail::tie_tolerance(best.revenue))
      return;
    if (pos == order.size()) return;
    const int idx = order[pos];

    chosen.push_back(idx);
    chosen_value += all[static_cast<std::size_t>(idx)]->value;
    std::vector<const ChargingRequest*> members;
    for (int c : chosen) members.push_back(all[static_cast<std::size_t>(c)]);
    if (detail::subset_feasible(in, members).feasible) {
      const double value = detail::subset_value(all, chosen);
      detail::consider_candidate(value, detail::subset_ids(all, chosen),
                                 detail::tie_tolerance(value), best, has_best);
      descend(pos + 1);
    }
    chosen.pop_back();
    chosen_value -= all[static_cast<std::size_t>(idx)]->value;

    descend(pos + 1);
  };
  descend(0);
  return best;
}

/// Plain unpruned scan over all 2^n subsets in bitmask order. Slower route
/// kept as an independent cross-check for the pruned search.
inline OptResult brute_force_opt_reference(const Instance& in, int max_requests = 16) {
  detail::check_enumerable(in, max_requests);
  std::vector<const ChargingRequest*> all;
  for (const auto& r : in.requests) all.push_back(&r);
  const int n = static_cast<int>(all.size());

  OptResult best{0.0, {}};
  bool has_best = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> chosen;
    std::vector<const ChargingRequest*> members;
    for (int i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        chosen.push_back(i);
        members.push_back(all[static_cast<std::size_t>(i)]);
      }
    }
    if (!detail::subset_feasible(in, members).feasible) continue;
    const double value = detail::subset_value(all, chosen);
    detail::consider_candidate(value, detail::subset_ids(all, chosen),
                               detail::tie_tolerance(value), best, has_best);
  }
  return best;
}

/// Minimum achievable global peak over all revenue-optimal subsets. Each
/// optimal subset's minimum peak is located by binary search on a tightened
/// per-slot sink cap, to a precision of 1e-6 * C_total.
inline double min_peak_among_optimal(const Instance& in, int max_requests = 16) {
  detail::check_enumerable(in, max_requests);
  const OptResult opt = brute_force_opt(in, max_requests);
  if (opt.subset.empty()) return 0.0;

  std::vector<const ChargingRequest*> all;
  for (const auto& r : in.requests) all.push_back(&r);
  const int n = static_cast<int>(all.size());
  const double tie_tol = detail::tie_tolerance(opt.revenue);
  const double precision = 1e-6 * in.global_cap;

  double best_peak = in.global_cap;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> chosen;
    std::vector<const ChargingRequest*> members;
    for (int i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        chosen.push_back(i);
        members.push_back(all[static_cast<std::size_t>(i)]);
      }
    }
    if (members.empty()) continue;
    if (std::fabs(detail::subset_value(all, chosen) - opt.revenue) > tie_tol) continue;
    if (!detail::subset_feasible(in, members).feasible) continue;

    double lo = 0.0;
    double hi = std::min(best_peak, in.global_cap);
    if (!detail::subset_feasible(in, members, hi).feasible) continue; // cannot beat incumbent
    while (hi - lo > precision) {
      const double mid = 0.5 * (lo + hi);
      if (detail::subset_feasible(in, members, mid).feasible)
        hi = mid;
      else
        lo = mid;
    }
    best_peak = std::min(best_peak, hi);
  }
  return best_peak;
}

} // namespace peakshaver
