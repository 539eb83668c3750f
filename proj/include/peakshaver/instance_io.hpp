#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "peakshaver/gen.hpp"
#include "peakshaver/model.hpp"
#include "peakshaver/scheduler.hpp"

namespace peakshaver {

inline constexpr int kInstanceFormatVersion = 1;

/// Canonical instance document:
///   {version, horizon, global_cap, slackness, stations:[{cap}],
///    requests:[{id, station, demand, deadline, max_rate, value}]}
/// A generator seed is carried along when one is known.
inline nlohmann::json instance_to_json(const Instance& in,
                                       std::optional<std::uint64_t> seed = std::nullopt) {
  nlohmann::json doc;
  doc["version"] = kInstanceFormatVersion;
  doc["horizon"] = in.horizon;
  doc["global_cap"] = in.global_cap;
  doc["slackness"] = in.slackness;
  doc["stations"] = nlohmann::json::array();
  for (const auto& s : in.stations) doc["stations"].push_back({{"cap", s.cap}});
  doc["requests"] = nlohmann::json::array();
  for (const auto& r : in.requests) {
    doc["requests"].push_back({{"id", r.id},
                               {"station", r.station},
                               {"demand", r.demand},
                               {"deadline", r.deadline},
                               {"max_rate", r.max_rate},
                               {"value", r.value}});
  }
  if (seed) doc["seed"] = *seed;
  return doc;
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("version", kInstanceFormatVersion) != kInstanceFormatVersion)
      throw InvalidInstanceError("unsupported instance format version");
    Instance in;
    in.horizon = doc.at("horizon").get<int>();
    in.global_cap = doc.at("global_cap").get<double>();
    in.slackness = doc.at("slackness").get<double>();
    for (const auto& s : doc.at("stations")) in.stations.push_back({s.at("cap").get<double>()});
    for (const auto& r : doc.at("requests")) {
      in.requests.push_back({r.at("id").get<int>(), r.at("station").get<int>(),
                             r.at("demand").get<double>(), r.at("deadline").get<int>(),
                             r.at("max_rate").get<double>(), r.at("value").get<double>()});
    }
    return in;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInstanceError(std::string("malformed instance document: ") + e.what());
  }
}

inline void write_instance_file(const std::string& path, const Instance& in,
                                std::optional<std::uint64_t> seed = std::nullopt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << instance_to_json(in, seed).dump(2) << '\n';
  if (!out) throw IoError("failed while writing " + path);
}

inline Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInstanceError("cannot parse " + path + ": " + e.what());
  }
  return instance_from_json(doc);
}

/// Generator config document; all fields optional, missing ones keep their
/// defaults. Windows are [first, last] slot pairs.
inline GenConfig gen_config_from_json(const nlohmann::json& doc) {
  try {
    GenConfig c;
    c.horizon = doc.value("horizon", c.horizon);
    c.stations = doc.value("stations", c.stations);
    c.evs = doc.value("evs", c.evs);
    c.local_cap = doc.value("local_cap", c.local_cap);
    if (doc.contains("station_caps"))
      c.station_caps = doc.at("station_caps").get<std::vector<double>>();
    c.global_cap = doc.value("global_cap", c.global_cap);
    c.slackness = doc.value("slackness", c.slackness);
    c.rate_min = doc.value("rate_min", c.rate_min);
    c.rate_max = doc.value("rate_max", c.rate_max);
    if (doc.contains("windows")) {
      c.windows.clear();
      for (const auto& w : doc.at("windows"))
        c.windows.push_back({w.at(0).get<int>(), w.at(1).get<int>()});
    }
    if (doc.contains("window_weights"))
      c.window_weights = doc.at("window_weights").get<std::vector<double>>();
    c.price_min = doc.value("price_min", c.price_min);
    c.price_max = doc.value("price_max", c.price_max);
    c.seed = doc.value("seed", c.seed);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
}

inline nlohmann::json gen_config_to_json(const GenConfig& c) {
  nlohmann::json doc;
  doc["horizon"] = c.horizon;
  doc["stations"] = c.stations;
  doc["evs"] = c.evs;
  if (c.station_caps.empty())
    doc["local_cap"] = c.local_cap;
  else
    doc["station_caps"] = c.station_caps;
  doc["global_cap"] = c.global_cap;
  doc["slackness"] = c.slackness;
  doc["rate_min"] = c.rate_min;
  doc["rate_max"] = c.rate_max;
  doc["windows"] = nlohmann::json::array();
  for (const auto& w : c.windows) doc["windows"].push_back({w.first, w.last});
  if (!c.window_weights.empty()) doc["window_weights"] = c.window_weights;
  doc["price_min"] = c.price_min;
  doc["price_max"] = c.price_max;
  doc["seed"] = c.seed;
  return doc;
}

inline nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json doc;
  doc["selected"] = nlohmann::json::array();
  for (int id : s.selected) doc["selected"].push_back(id);
  doc["allocation"] = nlohmann::json::array();
  for (const auto& [id, slots] : s.allocation) {
    nlohmann::json entry;
    entry["id"] = id;
    entry["slots"] = nlohmann::json::array();
    for (const auto& [t, energy] : slots) entry["slots"].push_back({t, energy});
    doc["allocation"].push_back(std::move(entry));
  }
  return doc;
}

inline nlohmann::json certificate_to_json(const DualCertificate& cert) {
  nlohmann::json doc;
  doc["alpha"] = nlohmann::json::array();
  for (const auto& [id, a] : cert.alpha) doc["alpha"].push_back({id, a});
  doc["beta"] = nlohmann::json::array();
  for (std::size_t t = 1; t < cert.beta.size(); ++t) doc["beta"].push_back(cert.beta[t]);
  doc["gamma"] = nlohmann::json::array();
  for (std::size_t t = 1; t < cert.gamma.size(); ++t) doc["gamma"].push_back(cert.gamma[t]);
  doc["pi"] = nlohmann::json::array();
  for (const auto& [id, slots] : cert.pi)
    for (const auto& [t, v] : slots) doc["pi"].push_back({id, t, v});
  doc["dual_objective"] = cert.dual_objective;
  return doc;
}

inline nlohmann::json trace_record_to_json(const TraceRecord& rec) {
  nlohmann::json doc;
  doc["engine"] = rec.engine;
  doc["phase"] = rec.phase;
  doc["request_id"] = rec.request_id;
  doc["decision"] = rec.decision;
  doc["slots_touched"] = rec.slots_touched;
  doc["revenue_so_far"] = rec.revenue_so_far;
  if (rec.delta) doc["delta"] = *rec.delta;
  return doc;
}

/// One JSON object per line, in decision order.
inline std::string trace_to_json_lines(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  for (const auto& rec : trace) out << trace_record_to_json(rec).dump() << '\n';
  return out.str();
}

} // namespace peakshaver
