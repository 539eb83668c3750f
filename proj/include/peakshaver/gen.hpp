#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "peakshaver/model.hpp"

namespace peakshaver {

struct DeadlineWindow {
  int first = 0;
  int last = 0;
};

/// Generator parameters. The defaults describe the reference scenario: a
/// 24-slot day, 4 stations capped at 125 kWh under a 500 kWh global cap,
/// 200 EVs with integer rates in [1, 20], slackness 1.5, pickup preferences
/// clustered in the morning, lunch and evening windows, and per-unit prices
/// uniform in [0.5, 1.5].
struct GenConfig {
  int horizon = 24;
  int stations = 4;
  int evs = 200;
  double local_cap = 125.0;        ///< applied to every station...
  std::vector<double> station_caps; ///< ...unless explicit caps are given
  double global_cap = 500.0;
  double slackness = 1.5;
  int rate_min = 1;
  int rate_max = 20;
  std::vector<DeadlineWindow> windows = {{7, 9}, {12, 14}, {16, 19}};
  std::vector<double> window_weights; ///< empty = uniform over windows
  double price_min = 0.5; ///< value is demand times a uniform unit price
  double price_max = 1.5;
  std::uint64_t seed = 1;
};

inline std::vector<std::string> validate_config(const GenConfig& c) {
  std::vector<std::string> errors;
  if (c.horizon < 1) errors.push_back("horizon must be at least 1");
  if (c.stations < 1) errors.push_back("station count must be at least 1");
  if (c.evs < 0) errors.push_back("EV count must be non-negative");
  if (!c.station_caps.empty() && static_cast<int>(c.station_caps.size()) != c.stations)
    errors.push_back("station_caps must list one cap per station");
  if (c.station_caps.empty() && !(c.local_cap > 0.0))
    errors.push_back("local cap must be positive");
  for (double cap : c.station_caps)
    if (!(cap > 0.0)) errors.push_back("station caps must be positive");
  if (!(c.global_cap > 0.0)) errors.push_back("global cap must be positive");
  if (!(c.slackness >= 1.0)) errors.push_back("slackness must be at least 1");
  if (c.rate_min < 1 || c.rate_max < c.rate_min)
    errors.push_back("rate range must satisfy 1 <= rate_min <= rate_max");
  if (c.windows.empty()) errors.push_back("at least one deadline window is required");
  for (const auto& w : c.windows) {
    if (w.first < 1 || w.last < w.first || w.last > c.horizon)
      errors.push_back("window [" + std::to_string(w.first) + "," + std::to_string(w.last) +
                       "] must lie within [1," + std::to_string(c.horizon) + "]");
  }
  if (!c.window_weights.empty()) {
    if (c.window_weights.size() != c.windows.size()) {
      errors.push_back("window_weights must list one weight per window");
    } else {
      double sum = 0.0;
      for (double w : c.window_weights) {
        if (w < 0.0) errors.push_back("window weights must be non-negative");
        sum += w;
      }
      if (!(sum > 0.0)) errors.push_back("window weights must not all be zero");
    }
  }
  if (!(c.price_min > 0.0) || c.price_max < c.price_min)
    errors.push_back("price range must satisfy 0 < price_min <= price_max");
  return errors;
}

namespace detail {

/// Thin wrapper over mt19937_64 with explicitly written distributions, so a
/// seed maps to the same byte stream regardless of standard-library
/// implementation details.
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double unit() { // in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform_real(double lo, double hi) { return lo + unit() * (hi - lo); }
  int uniform_int(int lo, int hi) { // inclusive
    return lo + static_cast<int>(unit() * (static_cast<double>(hi) - lo + 1.0));
  }
  std::size_t weighted_pick(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double mark = unit() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      mark -= weights[i];
      if (mark < 0.0) return i;
    }
    return weights.size() - 1;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace detail

/// Draws one instance from the configured distributions. Per EV the draw
/// order is station, window, deadline, rate, demand, unit price; the order
/// is part of the determinism contract (same seed, same instance, byte for
/// byte once serialized). Demands are drawn from
/// [min(k, k*d/s), k*d/s], which keeps every request slackness-feasible and
/// away from the degenerate near-zero range.
inline Instance generate_instance(const GenConfig& c) {
  const auto errors = validate_config(c);
  if (!errors.empty()) throw ConfigError("invalid generator config: " + errors.front());

  detail::SeededRng rng(c.seed);
  Instance in;
  in.horizon = c.horizon;
  in.global_cap = c.global_cap;
  in.slackness = c.slackness;
  for (int j = 0; j < c.stations; ++j) {
    in.stations.push_back(
        {c.station_caps.empty() ? c.local_cap : c.station_caps[static_cast<std::size_t>(j)]});
  }

  const std::vector<double> weights = c.window_weights.empty()
                                          ? std::vector<double>(c.windows.size(), 1.0)
                                          : c.window_weights;
  for (int i = 1; i <= c.evs; ++i) {
    ChargingRequest r;
    r.id = i;
    r.station = rng.uniform_int(1, c.stations);
    const DeadlineWindow& w = c.windows[rng.weighted_pick(weights)];
    r.deadline = rng.uniform_int(w.first, w.last);
    r.max_rate = static_cast<double>(rng.uniform_int(c.rate_min, c.rate_max));
    const double demand_max = r.max_rate * r.deadline / c.slackness;
    const double demand_min = std::min(r.max_rate, demand_max);
    r.demand = rng.uniform_real(demand_min, demand_max);
    r.value = rng.uniform_real(c.price_min, c.price_max) * r.demand;
    in.requests.push_back(r);
  }
  return in;
}

} // namespace peakshaver
