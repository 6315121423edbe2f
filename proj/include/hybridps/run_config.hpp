#pragma once

// RunConfig: the JSON run description shared by presets and user configs.
//
//   {
//     "name": "fig2",
//     "method": "hybrid",                       // or "runs": [{"method", "n_trajectories"?}]
//     "params": {"omega_a", "omega_b", "chi_a", "chi_b",
//                "coupling": [{"t_end": 0.1, "g": 1}, {"t_end": null, "g": 0}]},
//     "ensemble": {"n_trajectories", "n_batches", "dt", "t_final", "sample_interval",
//                  "master_seed", "N_a0", "N_b0", "blowup_threshold"?, "scheme"?},
//     "observables": ["X_a", ...],
//     "output": {"path": "out", "format": "csv"}
//   }
//
// A null or missing t_end marks the open final segment. Missing ensemble and
// params keys take the library defaults; unknown keys are rejected.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hybridps/core.hpp"
#include "hybridps/stats.hpp"

namespace hybridps {

using json = nlohmann::ordered_json;

enum class OutputFormat { csv, json };

inline std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::json ? "json" : "csv"; }

inline std::optional<OutputFormat> parse_format(std::string_view s) noexcept {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  return std::nullopt;
}

// One method to run; n_trajectories overrides the ensemble value.
struct MethodRun {
  Method method = Method::hybrid;
  std::optional<std::uint64_t> n_trajectories;

  friend bool operator==(const MethodRun&, const MethodRun&) = default;
};

struct RunConfig {
  std::string name = "run";
  std::vector<MethodRun> runs{MethodRun{}};
  SystemParams params;
  EnsembleConfig ensemble;
  std::vector<std::string> observables{"X_a"};
  std::string output_path = "out";
  OutputFormat format = OutputFormat::csv;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  [[nodiscard]] EnsembleConfig ensemble_for(const MethodRun& r) const {
    EnsembleConfig c = ensemble;
    if (r.n_trajectories) c.n_trajectories = *r.n_trajectories;
    return c;
  }
};

// Parse or validation failure; `line` is 1-based, 0 when unknown.
class ConfigFileError : public std::runtime_error {
 public:
  ConfigFileError(std::string field, std::size_t line, const std::string& message, const std::string& path = "")
      : std::runtime_error((path.empty() ? "" : path + ":") + (line > 0 ? "line " + std::to_string(line) + ": " : "") +
                           (path.empty() || line > 0 ? "" : " ") + message),
        field_(std::move(field)),
        line_(line),
        message_(message) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::size_t line_;
  std::string message_;
};

namespace config_detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" used as an object key, or 0.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  for (auto pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted, pos + 1)) {
    auto after = text.find_first_not_of(" \t\r\n", pos + quoted.size());
    if (after != std::string::npos && text[after] == ':') return line_of_offset(text, pos);
  }
  return 0;
}

struct Reader {
  const std::string& text;

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigFileError(field, line_of_key(text, field), msg);
  }

  void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (const char* allowed : keys) ok = ok || k == allowed;
      if (!ok) fail(k, "unknown key '" + k + "' in " + where);
    }
  }

  double number(const json& obj, const char* key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(key, std::string("'") + key + "' must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const json& obj, const char* key, std::uint64_t fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(key, std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const json& obj, const char* key, const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(key, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  Method method(const json& v) const {
    if (!v.is_string()) fail("method", "'method' must be a string");
    auto m = parse_method(v.get<std::string>());
    if (!m) fail("method", "unknown method '" + v.get<std::string>() + "'");
    return *m;
  }
};

}  // namespace config_detail

// Parses and fully validates a config text (every run must pass
// validate_config). Errors carry the line of the offending key.
inline RunConfig parse_run_config(const std::string& text) {
  using config_detail::Reader;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigFileError("", config_detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0),
                          std::string("JSON syntax error: ") + e.what());
  }
  Reader rd{text};
  rd.only_keys(doc, "config", {"name", "method", "runs", "params", "ensemble", "observables", "output"});

  RunConfig cfg;
  cfg.name = rd.string(doc, "name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
    rd.fail("name", "'name' must be a non-empty file-name-safe string");

  if (doc.contains("method") && doc.contains("runs")) rd.fail("runs", "give either 'method' or 'runs', not both");
  if (doc.contains("method")) {
    cfg.runs = {MethodRun{rd.method(doc.at("method")), std::nullopt}};
  } else if (doc.contains("runs")) {
    const auto& runs = doc.at("runs");
    if (!runs.is_array() || runs.empty()) rd.fail("runs", "'runs' must be a non-empty array");
    cfg.runs.clear();
    std::set<Method> seen;
    for (const auto& r : runs) {
      rd.only_keys(r, "runs", {"method", "n_trajectories"});
      if (!r.contains("method")) rd.fail("runs", "every entry of 'runs' needs a 'method'");
      MethodRun mr{rd.method(r.at("method")), std::nullopt};
      if (r.contains("n_trajectories")) mr.n_trajectories = rd.count(r, "n_trajectories", 0);
      if (!seen.insert(mr.method).second) rd.fail("runs", "method listed twice in 'runs'");
      cfg.runs.push_back(mr);
    }
  }

  if (doc.contains("params")) {
    const auto& p = doc.at("params");
    rd.only_keys(p, "params", {"omega_a", "omega_b", "chi_a", "chi_b", "coupling"});
    cfg.params.omega_a = rd.number(p, "omega_a", cfg.params.omega_a);
    cfg.params.omega_b = rd.number(p, "omega_b", cfg.params.omega_b);
    cfg.params.chi_a = rd.number(p, "chi_a", cfg.params.chi_a);
    cfg.params.chi_b = rd.number(p, "chi_b", cfg.params.chi_b);
    if (p.contains("coupling")) {
      const auto& c = p.at("coupling");
      if (!c.is_array()) rd.fail("coupling", "'coupling' must be an array of {t_end, g} segments");
      std::vector<CouplingSchedule::Segment> segs;
      for (const auto& s : c) {
        if (!s.is_object() || !s.contains("g")) rd.fail("coupling", "every coupling segment needs 'g'");
        for (const auto& [k, v] : s.items())
          if (k != "t_end" && k != "g") rd.fail("coupling", "unknown key '" + k + "' in a coupling segment");
        if (!s.at("g").is_number()) rd.fail("coupling", "coupling 'g' must be a number");
        double t_end = kInf;
        if (s.contains("t_end") && !s.at("t_end").is_null()) {
          if (!s.at("t_end").is_number()) rd.fail("coupling", "coupling 't_end' must be a number or null");
          t_end = s.at("t_end").get<double>();
        }
        segs.push_back({t_end, s.at("g").get<double>()});
      }
      try {
        cfg.params.coupling = CouplingSchedule(segs);
      } catch (const ConfigError& e) {
        rd.fail("coupling", e.what());
      }
    }
  }

  if (doc.contains("ensemble")) {
    const auto& e = doc.at("ensemble");
    rd.only_keys(e, "ensemble",
                 {"n_trajectories", "n_batches", "dt", "t_final", "sample_interval", "master_seed", "N_a0", "N_b0",
                  "blowup_threshold", "scheme"});
    auto& c = cfg.ensemble;
    c.n_trajectories = rd.count(e, "n_trajectories", c.n_trajectories);
    c.n_batches = rd.count(e, "n_batches", c.n_batches);
    c.dt = rd.number(e, "dt", c.dt);
    c.t_final = rd.number(e, "t_final", c.t_final);
    c.sample_interval = rd.count(e, "sample_interval", c.sample_interval);
    c.master_seed = rd.count(e, "master_seed", c.master_seed);
    c.N_a0 = rd.number(e, "N_a0", c.N_a0);
    c.N_b0 = rd.number(e, "N_b0", c.N_b0);
    if (e.contains("blowup_threshold") && !e.at("blowup_threshold").is_null())
      c.blowup_threshold = rd.number(e, "blowup_threshold", 0.0);
    if (e.contains("scheme")) {
      auto s = parse_scheme(rd.string(e, "scheme", ""));
      if (!s) rd.fail("scheme", "unknown scheme; expected exponential_euler, explicit_euler or log_euler");
      c.scheme = *s;
    }
  }

  if (doc.contains("observables")) {
    const auto& o = doc.at("observables");
    if (!o.is_array() || o.empty()) rd.fail("observables", "'observables' must be a non-empty array of names");
    cfg.observables.clear();
    for (const auto& v : o) {
      if (!v.is_string() || !stats::is_observable(v.get<std::string>()))
        rd.fail("observables", "unknown observable " + v.dump());
      cfg.observables.push_back(v.get<std::string>());
    }
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    rd.only_keys(o, "output", {"path", "format"});
    cfg.output_path = rd.string(o, "path", cfg.output_path);
    auto f = parse_format(rd.string(o, "format", "csv"));
    if (!f) rd.fail("format", "'format' must be csv or json");
    cfg.format = *f;
  }

  for (const auto& r : cfg.runs) {
    try {
      validate_config(cfg.ensemble_for(r), MethodSpec(r.method), cfg.params);
    } catch (const ConfigError& e) {
      // A defaulted field has no line of its own; point at its section.
      auto line = config_detail::line_of_key(text, e.field());
      if (line == 0) line = config_detail::line_of_key(text, e.field() == "coupling" ? "params" : "ensemble");
      throw ConfigFileError(e.field(), line, e.what());
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFileError("", 0, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigFileError& e) {
    throw ConfigFileError(e.field(), e.line(), e.message(), path);
  }
}

inline json to_json(const RunConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  if (cfg.runs.size() == 1 && !cfg.runs.front().n_trajectories) {
    doc["method"] = std::string(to_string(cfg.runs.front().method));
  } else {
    json runs = json::array();
    for (const auto& r : cfg.runs) {
      json e;
      e["method"] = std::string(to_string(r.method));
      if (r.n_trajectories) e["n_trajectories"] = *r.n_trajectories;
      runs.push_back(e);
    }
    doc["runs"] = runs;
  }
  json coupling = json::array();
  for (const auto& s : cfg.params.coupling.segments()) {
    json seg;
    seg["t_end"] = std::isfinite(s.t_end) ? json(s.t_end) : json(nullptr);
    seg["g"] = s.g;
    coupling.push_back(seg);
  }
  doc["params"] = {{"omega_a", cfg.params.omega_a},
                   {"omega_b", cfg.params.omega_b},
                   {"chi_a", cfg.params.chi_a},
                   {"chi_b", cfg.params.chi_b},
                   {"coupling", coupling}};
  const auto& c = cfg.ensemble;
  doc["ensemble"] = {{"n_trajectories", c.n_trajectories},
                     {"n_batches", c.n_batches},
                     {"dt", c.dt},
                     {"t_final", c.t_final},
                     {"sample_interval", c.sample_interval},
                     {"master_seed", c.master_seed},
                     {"N_a0", c.N_a0},
                     {"N_b0", c.N_b0},
                     {"blowup_threshold", c.blowup_threshold ? json(*c.blowup_threshold) : json(nullptr)},
                     {"scheme", std::string(to_string(c.scheme))}};
  doc["observables"] = cfg.observables;
  doc["output"] = {{"path", cfg.output_path}, {"format", std::string(to_string(cfg.format))}};
  return doc;
}

inline std::string serialize_run_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace hybridps
