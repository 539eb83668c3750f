// Command-line harness: generate instances, run the scheduling engines with
// optional verification, and sweep a parameter over seeded scenarios into
// long-format CSV.
//
// Exit codes: 0 success, 1 usage error, 2 invalid config or instance,
// 3 I/O error, 4 verification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peakshaver/baseline.hpp"
#include "peakshaver/gen.hpp"
#include "peakshaver/instance_io.hpp"
#include "peakshaver/metrics.hpp"
#include "peakshaver/oracle.hpp"
#include "peakshaver/scheduler.hpp"
#include "peakshaver/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerification = 4;

struct GenFlags {
  peakshaver::GenConfig config;
  std::string config_path;
  std::string windows_text;
  std::string weights_text;
  std::string caps_text;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, sep)) parts.push_back(part);
  return parts;
}

// "7-9,12-14,16-19"
std::vector<peakshaver::DeadlineWindow> parse_windows(const std::string& text) {
  std::vector<peakshaver::DeadlineWindow> windows;
  for (const auto& part : split(text, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos)
      throw peakshaver::ConfigError("window '" + part + "' must look like first-last");
    windows.push_back({std::stoi(part.substr(0, dash)), std::stoi(part.substr(dash + 1))});
  }
  return windows;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(std::stod(part));
  return values;
}

// "a,b,c" or "a..b" (step 10) or "a..b..step"
std::vector<double> parse_sweep_values(const std::string& text) {
  const auto range_at = text.find("..");
  if (range_at == std::string::npos) return parse_doubles(text);
  const double from = std::stod(text.substr(0, range_at));
  const std::string rest = text.substr(range_at + 2);
  const auto step_at = rest.find("..");
  const double to = std::stod(step_at == std::string::npos ? rest : rest.substr(0, step_at));
  const double step = step_at == std::string::npos ? 10.0 : std::stod(rest.substr(step_at + 2));
  if (!(step > 0.0) || to < from)
    throw peakshaver::ConfigError("range '" + text + "' must be from..to with positive step");
  std::vector<double> values;
  for (double v = from; v <= to + 1e-12; v += step) values.push_back(v);
  return values;
}

void register_gen_flags(CLI::App* cmd, GenFlags& flags) {
  cmd->add_option("--config", flags.config_path, "generator config JSON file");
  cmd->add_option("--evs", flags.config.evs, "number of EVs");
  cmd->add_option("--stations", flags.config.stations, "number of stations");
  cmd->add_option("--horizon", flags.config.horizon, "number of slots");
  cmd->add_option("--local-cap", flags.config.local_cap, "per-slot cap for every station (kWh)");
  cmd->add_option("--station-caps", flags.caps_text, "comma-separated per-station caps (kWh)");
  cmd->add_option("--global-cap", flags.config.global_cap, "per-slot global cap (kWh)");
  cmd->add_option("--slackness", flags.config.slackness, "slackness parameter, >= 1");
  cmd->add_option("--k-min", flags.config.rate_min, "minimum charging rate (integer kWh/slot)");
  cmd->add_option("--k-max", flags.config.rate_max, "maximum charging rate (integer kWh/slot)");
  cmd->add_option("--windows", flags.windows_text, "deadline windows, e.g. 7-9,12-14,16-19");
  cmd->add_option("--weights", flags.weights_text, "window weights, e.g. 1,1,2");
  cmd->add_option("--price-min", flags.config.price_min, "minimum unit price");
  cmd->add_option("--price-max", flags.config.price_max, "maximum unit price");
  cmd->add_option("--seed", flags.config.seed, "generator seed");
}

peakshaver::GenConfig resolve_gen_config(const CLI::App* cmd, const GenFlags& flags) {
  peakshaver::GenConfig config;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw peakshaver::IoError("cannot open " + flags.config_path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw peakshaver::ConfigError("cannot parse " + flags.config_path + ": " + e.what());
    }
    config = peakshaver::gen_config_from_json(doc);
  }
  // explicit flags override the config file
  const auto set = [&cmd](const char* name) { return cmd->count(name) > 0; };
  if (set("--evs")) config.evs = flags.config.evs;
  if (set("--stations")) config.stations = flags.config.stations;
  if (set("--horizon")) config.horizon = flags.config.horizon;
  if (set("--local-cap")) {
    config.local_cap = flags.config.local_cap;
    config.station_caps.clear();
  }
  if (set("--station-caps")) config.station_caps = parse_doubles(flags.caps_text);
  if (set("--global-cap")) config.global_cap = flags.config.global_cap;
  if (set("--slackness")) config.slackness = flags.config.slackness;
  if (set("--k-min")) config.rate_min = flags.config.rate_min;
  if (set("--k-max")) config.rate_max = flags.config.rate_max;
  if (set("--windows")) config.windows = parse_windows(flags.windows_text);
  if (set("--weights")) config.window_weights = parse_doubles(flags.weights_text);
  if (set("--price-min")) config.price_min = flags.config.price_min;
  if (set("--price-max")) config.price_max = flags.config.price_max;
  if (set("--seed")) config.seed = flags.config.seed;

  const auto errors = peakshaver::validate_config(config);
  if (!errors.empty()) throw peakshaver::ConfigError("invalid config: " + errors.front());
  return config;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw peakshaver::IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw peakshaver::IoError("failed while writing " + path);
}

std::string instance_id_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int cmd_generate(const CLI::App* cmd, const GenFlags& flags, const std::string& out_path) {
  const peakshaver::GenConfig config = resolve_gen_config(cmd, flags);
  const peakshaver::Instance instance = peakshaver::generate_instance(config);
  if (out_path.empty()) {
    std::cout << peakshaver::instance_to_json(instance, config.seed).dump(2) << '\n';
  } else {
    peakshaver::write_instance_file(out_path, instance, config.seed);
  }
  return kExitOk;
}

int cmd_run(const std::string& instance_path, const std::string& engine, bool verify,
            bool with_oracle, int oracle_limit, bool baseline_reconsider,
            const std::string& out_path, const std::string& trace_path) {
  const peakshaver::Instance instance = peakshaver::read_instance_file(instance_path);
  const auto report = peakshaver::validate_instance(instance);
  if (!report.ok()) {
    for (const auto& v : report.violations)
      std::cerr << "invalid instance: " << v.subject << ": " << v.condition << '\n';
    return kExitInvalid;
  }
  for (const auto& w : report.warnings)
    std::cerr << "warning: " << w.subject << ": " << w.condition << '\n';

  peakshaver::Schedule schedule;
  peakshaver::MetricsReport metrics;
  std::optional<double> dual_objective;
  peakshaver::RunResult scs_result;
  std::vector<peakshaver::TraceRecord> trace;

  if (engine == "scs") {
    scs_result = peakshaver::run_scs(instance);
    schedule = scs_result.schedule;
    metrics = peakshaver::compute_metrics(instance, schedule);
    dual_objective = scs_result.certificate.dual_objective;
    trace = scs_result.trace;
  } else if (engine == "greedy-rtl") {
    peakshaver::BaselineOptions opt;
    opt.reconsider = baseline_reconsider;
    auto result = peakshaver::run_greedy_rtl(instance, opt);
    schedule = std::move(result.schedule);
    metrics = result.metrics;
    trace = std::move(result.trace);
  } else {
    throw peakshaver::ConfigError("unknown engine '" + engine + "' (expected scs|greedy-rtl)");
  }

  std::optional<double> alpha_bound;
  try {
    alpha_bound = peakshaver::approximation_bound(instance);
  } catch (const peakshaver::BoundUndefinedError&) {
  }
  std::optional<double> opt_revenue;
  std::optional<double> ratio_to_opt;
  if (with_oracle) {
    opt_revenue = peakshaver::brute_force_opt(instance, oracle_limit).revenue;
    if (*opt_revenue > 0.0) ratio_to_opt = metrics.revenue / *opt_revenue;
  }

  std::ostringstream csv;
  csv << peakshaver::metrics_csv_header(instance.num_stations()) << '\n'
      << peakshaver::metrics_csv_row(instance_id_from_path(instance_path), engine, metrics,
                                     instance.num_stations(), alpha_bound, dual_objective,
                                     opt_revenue, ratio_to_opt)
      << '\n';
  if (out_path.empty())
    std::cout << csv.str();
  else
    write_text_file(out_path, csv.str());
  if (!trace_path.empty()) write_text_file(trace_path, peakshaver::trace_to_json_lines(trace));

  if (!verify) return kExitOk;

  bool verified = true;
  const auto primal = peakshaver::verify_primal_feasibility(instance, schedule);
  for (const auto& v : primal)
    std::cerr << "primal violation: " << v.subject << ": " << v.condition << '\n';
  verified = verified && primal.empty();

  if (engine == "scs") {
    const auto dual = peakshaver::verify_dual_feasibility(instance, scs_result.certificate);
    for (const auto& v : dual)
      std::cerr << "dual violation: " << v.subject << ": " << v.condition << '\n';
    verified = verified && dual.empty();

    if (instance.slackness > 1.0 && alpha_bound) {
      const auto bound = peakshaver::verify_bound(instance, schedule, scs_result.certificate,
                                                  &scs_result.phi, opt_revenue);
      if (!bound.dual_bounded) {
        std::cerr << "bound violation: dual objective " << bound.dual_objective
                  << " exceeds alpha*revenue " << bound.alpha_times_revenue << '\n';
        verified = false;
      }
      if (opt_revenue && !bound.weak_duality_ok) {
        std::cerr << "bound violation: dual objective " << bound.dual_objective
                  << " below exact optimum " << *opt_revenue << '\n';
        verified = false;
      }
    }
  }
  if (!verified) return kExitVerification;
  std::cerr << "verification passed\n";
  return kExitOk;
}

int cmd_sweep(const CLI::App* cmd, const GenFlags& flags, peakshaver::SweepSpec spec,
              const std::string& values_text, const std::string& engines_text,
              const std::string& out_path) {
  spec.base = resolve_gen_config(cmd, flags);
  spec.values = parse_sweep_values(values_text);
  spec.engines = split(engines_text, ',');

  const auto rows = peakshaver::run_sweep(spec);

  // one synthetic value is enough to know the station count
  const int stations = spec.base.stations;
  std::ostringstream detail;
  peakshaver::write_sweep_csv(detail, spec.param, stations, rows);
  std::ostringstream summary;
  peakshaver::write_sweep_summary_csv(summary, spec.param, rows);

  if (out_path.empty()) {
    std::cout << detail.str() << '\n' << summary.str();
    return kExitOk;
  }
  write_text_file(out_path, detail.str());
  std::filesystem::path summary_path(out_path);
  summary_path.replace_extension(".summary.csv");
  write_text_file(summary_path.string(), summary.str());
  std::filesystem::path config_path(out_path);
  config_path.replace_extension(".config.json");
  nlohmann::json config_doc;
  config_doc["generator"] = peakshaver::gen_config_to_json(spec.base);
  config_doc["param"] = peakshaver::sweep_param_name(spec.param);
  config_doc["values"] = spec.values;
  config_doc["seeds"] = spec.seeds;
  config_doc["engines"] = spec.engines;
  config_doc["oracle"] = spec.with_oracle;
  config_doc["baseline_reconsider"] = spec.baseline_reconsider;
  write_text_file(config_path.string(), config_doc.dump(2) + "\n");
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging scheduling with local and global peak caps"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "draw a random instance and write it as JSON");
  GenFlags gen_flags;
  register_gen_flags(generate, gen_flags);
  std::string gen_out;
  generate->add_option("--out", gen_out, "output path (stdout when omitted)");

  // run
  auto* run = app.add_subcommand("run", "run one engine on an instance file");
  std::string run_instance;
  std::string run_engine_name = "scs";
  std::string run_out;
  std::string run_trace;
  bool run_verify = false;
  bool run_oracle = false;
  int run_oracle_limit = 16;
  std::string baseline_reconsider_text = "on";
  run->add_option("--instance", run_instance, "instance JSON file")->required();
  run->add_option("--engine", run_engine_name, "scs or greedy-rtl");
  run->add_flag("--verify", run_verify, "check schedule, certificate and bound after the run");
  run->add_flag("--oracle", run_oracle, "compute the exact optimum (small instances only)");
  run->add_option("--oracle-limit", run_oracle_limit, "max EV count for the exact oracle");
  run->add_option("--baseline-reconsider", baseline_reconsider_text,
                  "on|off: exchange phase in greedy-rtl");
  run->add_option("--out", run_out, "CSV output path (stdout when omitted)");
  run->add_option("--trace", run_trace, "write the decision trace as JSON lines");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run engines over a swept parameter into CSV");
  GenFlags sweep_flags;
  register_gen_flags(sweep, sweep_flags);
  std::string sweep_param_text = "evs";
  std::string sweep_values_text;
  std::string sweep_engines_text = "scs,greedy-rtl";
  std::string sweep_out;
  peakshaver::SweepSpec sweep_spec;
  std::string sweep_baseline_reconsider = "on";
  sweep->add_option("--param", sweep_param_text, "evs|ctotal|slackness")->required();
  sweep->add_option("--values", sweep_values_text, "comma list, or from..to[..step] (step 10)")
      ->required();
  sweep->add_option("--seeds", sweep_spec.seeds, "seeds 1..N per value");
  sweep->add_option("--engines", sweep_engines_text, "comma list of scs,greedy-rtl");
  sweep->add_flag("--oracle", sweep_spec.with_oracle,
                  "add exact optimum and pseudo-optimal peak columns");
  sweep->add_option("--oracle-limit", sweep_spec.oracle_limit, "max EV count for the oracle");
  sweep->add_option("--workers", sweep_spec.workers,
                    "worker pool size (PEAKSHAVER_WORKERS overrides)");
  sweep->add_option("--baseline-reconsider", sweep_baseline_reconsider,
                    "on|off: exchange phase in greedy-rtl");
  sweep->add_option("--out", sweep_out, "detail CSV path; summary lands next to it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto parse_on_off = [](const std::string& text) {
    if (text == "on") return true;
    if (text == "off") return false;
    throw peakshaver::ConfigError("expected on|off, got '" + text + "'");
  };

  try {
    if (generate->parsed()) return cmd_generate(generate, gen_flags, gen_out);
    if (run->parsed())
      return cmd_run(run_instance, run_engine_name, run_verify, run_oracle, run_oracle_limit,
                     parse_on_off(baseline_reconsider_text), run_out, run_trace);
    if (sweep->parsed()) {
      sweep_spec.param = peakshaver::parse_sweep_param(sweep_param_text);
      sweep_spec.baseline_reconsider = parse_on_off(sweep_baseline_reconsider);
      return cmd_sweep(sweep, sweep_flags, sweep_spec, sweep_values_text, sweep_engines_text,
                       sweep_out);
    }
  } catch (const peakshaver::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const peakshaver::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const peakshaver::InvalidInstanceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const peakshaver::InstanceTooLargeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
