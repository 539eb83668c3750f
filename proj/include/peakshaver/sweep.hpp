#pragma once

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "peakshaver/baseline.hpp"
#include "peakshaver/gen.hpp"
#include "peakshaver/metrics.hpp"
#include "peakshaver/oracle.hpp"
#include "peakshaver/scheduler.hpp"

namespace peakshaver {

enum class SweepParam { kEvs, kGlobalCap, kSlackness };

inline const char* sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::kEvs: return "evs";
    case SweepParam::kGlobalCap: return "ctotal";
    case SweepParam::kSlackness: return "slackness";
  }
  return "?";
}

inline SweepParam parse_sweep_param(const std::string& name) {
  if (name == "evs") return SweepParam::kEvs;
  if (name == "ctotal") return SweepParam::kGlobalCap;
  if (name == "slackness") return SweepParam::kSlackness;
  throw ConfigError("unknown sweep parameter '" + name + "' (expected evs|ctotal|slackness)");
}

struct SweepSpec {
  SweepParam param = SweepParam::kEvs;
  std::vector<double> values;
  int seeds = 50; ///< seeds 1..seeds per value
  std::vector<std::string> engines = {"scs", "greedy-rtl"};
  bool with_oracle = false;
  int oracle_limit = 16;
  GenConfig base;
  bool baseline_reconsider = true;
  int workers = 0; ///< 0: PEAKSHAVER_WORKERS env var, else hardware concurrency
};

struct SweepRow {
  std::string instance_id;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string engine;
  MetricsReport metrics;
  std::optional<double> alpha_bound;
  std::optional<double> dual_objective;
  std::optional<double> opt_revenue;
  std::optional<double> ratio_to_opt;
  std::optional<double> pseudo_optimal_peak;
};

inline GenConfig apply_sweep_value(GenConfig base, SweepParam param, double value) {
  switch (param) {
    case SweepParam::kEvs: base.evs = static_cast<int>(std::llround(value)); break;
    case SweepParam::kGlobalCap: base.global_cap = value; break;
    case SweepParam::kSlackness: base.slackness = value; break;
  }
  return base;
}

namespace detail {

inline int resolve_worker_count(int requested) {
  if (const char* env = std::getenv("PEAKSHAVER_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline std::string sweep_instance_id(SweepParam param, double value, std::uint64_t seed) {
  return std::string(sweep_param_name(param)) + fmt(value) + "_s" + std::to_string(seed);
}

} // namespace detail

/// Runs the cross product (value, seed, engine). Instances are generated
/// once per (value, seed) and shared across engines; with the oracle enabled
/// the exact optimum and pseudo-optimal peak are computed once per instance
/// as well. Tasks run on a worker pool but each writes into its own result
/// slot, so the output order is (value, seed, engine) regardless of timing.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  for (const auto& engine : spec.engines) {
    if (engine != "scs" && engine != "greedy-rtl")
      throw ConfigError("unknown engine '" + engine + "' (expected scs|greedy-rtl)");
  }
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.seeds < 1) throw ConfigError("sweep needs at least one seed");
  if (spec.with_oracle) {
    for (double v : spec.values) {
      const GenConfig cfg = apply_sweep_value(spec.base, spec.param, v);
      if (cfg.evs > spec.oracle_limit)
        throw ConfigError("oracle columns need at most " + std::to_string(spec.oracle_limit) +
                          " EVs per instance, sweep would generate " + std::to_string(cfg.evs));
    }
  }

  struct Task {
    std::size_t value_index;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi)
    for (int s = 1; s <= spec.seeds; ++s) tasks.push_back({vi, static_cast<std::uint64_t>(s)});

  std::vector<std::vector<SweepRow>> results(tasks.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    while (true) {
      const std::size_t at = cursor.fetch_add(1);
      if (at >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        const Task& task = tasks[at];
        const double value = spec.values[task.value_index];
        GenConfig cfg = apply_sweep_value(spec.base, spec.param, value);
        cfg.seed = task.seed;
        const Instance instance = generate_instance(cfg);
        const std::string instance_id = detail::sweep_instance_id(spec.param, value, task.seed);

        std::optional<double> alpha;
        try {
          alpha = approximation_bound(instance);
        } catch (const BoundUndefinedError&) {
        }
        std::optional<double> opt;
        std::optional<double> pseudo_peak;
        if (spec.with_oracle) {
          opt = brute_force_opt(instance, spec.oracle_limit).revenue;
          pseudo_peak = min_peak_among_optimal(instance, spec.oracle_limit);
        }

        for (const auto& engine : spec.engines) {
          SweepRow row;
          row.instance_id = instance_id;
          row.value = value;
          row.seed = task.seed;
          row.engine = engine;
          row.alpha_bound = alpha;
          row.opt_revenue = opt;
          row.pseudo_optimal_peak = pseudo_peak;
          if (engine == "scs") {
            const RunResult run = run_scs(instance);
            row.metrics = compute_metrics(instance, run.schedule);
            row.dual_objective = run.certificate.dual_objective;
          } else {
            BaselineOptions bopt;
            bopt.reconsider = spec.baseline_reconsider;
            const BaselineResult run = run_greedy_rtl(instance, bopt);
            row.metrics = run.metrics;
          }
          if (opt && *opt > 0.0) row.ratio_to_opt = row.metrics.revenue / *opt;
          results[at].push_back(std::move(row));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int worker_count =
      std::min<int>(detail::resolve_worker_count(spec.workers), static_cast<int>(tasks.size()));
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<SweepRow> rows;
  for (auto& bundle : results)
    for (auto& row : bundle) rows.push_back(std::move(row));
  return rows;
}

inline std::string sweep_csv_header(int num_stations) {
  return std::string("param,value,seed,") + metrics_csv_header(num_stations) +
         ",pseudo_optimal_peak";
}

inline void write_sweep_csv(std::ostream& out, SweepParam param, int num_stations,
                            const std::vector<SweepRow>& rows) {
  out << sweep_csv_header(num_stations) << '\n';
  for (const auto& row : rows) {
    out << sweep_param_name(param) << ',' << detail::fmt(row.value) << ',' << row.seed << ','
        << metrics_csv_row(row.instance_id, row.engine, row.metrics, num_stations,
                           row.alpha_bound, row.dual_objective, row.opt_revenue,
                           row.ratio_to_opt)
        << ',' << (row.pseudo_optimal_peak ? detail::fmt(*row.pseudo_optimal_peak) : "") << '\n';
  }
}

struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0; ///< sample standard deviation
  int count = 0;
};

inline SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat stat;
  stat.count = static_cast<int>(values.size());
  if (values.empty()) return stat;
  double sum = 0.0;
  for (double v : values) sum += v;
  stat.mean = sum / stat.count;
  if (stat.count > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - stat.mean) * (v - stat.mean);
    stat.stddev = std::sqrt(squares / (stat.count - 1));
  }
  return stat;
}

/// Aggregates the detail rows by (value, engine). Means and deviations are
/// recomputable from the detail CSV: both sides see the identical doubles.
inline void write_sweep_summary_csv(std::ostream& out, SweepParam param,
                                    const std::vector<SweepRow>& rows) {
  const char* metrics_names[] = {"revenue",     "normalized_revenue",  "utilization",
                                 "acceptance_rate", "actual_peak",     "ratio_to_opt",
                                 "pseudo_optimal_peak"};
  out << "param,value,engine,count";
  for (const char* name : metrics_names) out << ',' << name << "_mean," << name << "_stddev";
  out << '\n';

  std::vector<std::pair<double, std::string>> groups;
  for (const auto& row : rows) {
    const std::pair<double, std::string> key{row.value, row.engine};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }

  for (const auto& [value, engine] : groups) {
    std::vector<std::vector<double>> columns(std::size(metrics_names));
    for (const auto& row : rows) {
      if (row.value != value || row.engine != engine) continue;
      columns[0].push_back(row.metrics.revenue);
      columns[1].push_back(row.metrics.normalized_revenue);
      columns[2].push_back(row.metrics.utilization);
      columns[3].push_back(row.metrics.acceptance_rate);
      columns[4].push_back(row.metrics.actual_peak);
      if (row.ratio_to_opt) columns[5].push_back(*row.ratio_to_opt);
      if (row.pseudo_optimal_peak) columns[6].push_back(*row.pseudo_optimal_peak);
    }
    out << sweep_param_name(param) << ',' << detail::fmt(value) << ',' << engine << ','
        << columns[0].size();
    for (const auto& column : columns) {
      if (column.empty()) {
        out << ",,";
      } else {
        const SummaryStat stat = summarize(column);
        out << ',' << detail::fmt(stat.mean) << ',' << detail::fmt(stat.stddev);
      }
    }
    out << '\n';
  }
}

} // namespace peakshaver
