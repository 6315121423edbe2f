#pragma once

// Running a RunConfig end to end and writing its artifacts.
//
// For every (method, observable) pair one series file
//   <out>/<name>_<method>_<observable>.{csv,json}
// and per method a sidecar <out>/<name>_<method>.meta.json carrying the
// resolved config, the artifact version and the breakdown time (null if none).
// Output bytes depend only on the config, never on timing or worker count.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hybridps/integrator.hpp"
#include "hybridps/run_config.hpp"
#include "hybridps/stats.hpp"

#ifndef HYBRIDPS_VERSION
#define HYBRIDPS_VERSION "0.0.0"
#endif

namespace hybridps {

inline constexpr const char* kVersion = HYBRIDPS_VERSION;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Command-line style overrides applied on top of a loaded config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n_trajectories;
  std::optional<double> dt;
  std::optional<Method> method;
  std::optional<std::vector<std::string>> observables;
  std::optional<std::string> output_path;
  std::optional<OutputFormat> format;
};

// Applies overrides and re-validates every run; throws ConfigError.
inline RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
  if (o.seed) cfg.ensemble.master_seed = *o.seed;
  if (o.dt) cfg.ensemble.dt = *o.dt;
  if (o.method) {
    std::optional<std::uint64_t> n;
    for (const auto& r : cfg.runs)
      if (r.method == *o.method) n = r.n_trajectories;
    cfg.runs = {MethodRun{*o.method, n}};
  }
  if (o.n_trajectories) {
    cfg.ensemble.n_trajectories = *o.n_trajectories;
    for (auto& r : cfg.runs) r.n_trajectories.reset();
  }
  if (o.observables) {
    for (const auto& name : *o.observables)
      if (!stats::is_observable(name)) throw ConfigError("observables", "unknown observable '" + name + "'");
    if (o.observables->empty()) throw ConfigError("observables", "observable list is empty");
    cfg.observables = *o.observables;
  }
  if (o.output_path) cfg.output_path = *o.output_path;
  if (o.format) cfg.format = *o.format;
  for (const auto& r : cfg.runs) validate_config(cfg.ensemble_for(r), MethodSpec(r.method), cfg.params);
  return cfg;
}

namespace output_detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw OutputError("cannot create output directory '" + dir.string() + "'");
}

}  // namespace output_detail

// Columns t, mean, stderr, exact, live_fraction; a missing exact value is an
// empty field.
inline std::string series_csv(const stats::ObservableSeries& s) {
  using output_detail::num;
  std::string out = "t,mean,stderr,exact,live_fraction\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += num(s.times[i]) + ',' + num(s.mean[i]) + ',' + num(s.stderr_[i]) + ',';
    if (s.exact[i] && std::isfinite(*s.exact[i])) out += num(*s.exact[i]);
    out += ',' + num(s.live_fraction[i]) + '\n';
  }
  return out;
}

inline json series_json(const stats::ObservableSeries& s, Method method) {
  using output_detail::num_json;
  json t = json::array(), mean = json::array(), se = json::array(), exact = json::array(), live = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    t.push_back(num_json(s.times[i]));
    mean.push_back(num_json(s.mean[i]));
    se.push_back(num_json(s.stderr_[i]));
    exact.push_back(s.exact[i] ? num_json(*s.exact[i]) : json(nullptr));
    live.push_back(num_json(s.live_fraction[i]));
  }
  json j;
  j["observable"] = s.name;
  j["method"] = std::string(to_string(method));
  j["t"] = t;
  j["mean"] = mean;
  j["stderr"] = se;
  j["exact"] = exact;
  j["live_fraction"] = live;
  return j;
}

struct MethodOutcome {
  Method method;
  std::vector<stats::ObservableSeries> series;
  std::optional<double> breakdown_time;  // earliest over the observables
  std::size_t blown_up = 0;
  std::vector<std::filesystem::path> files;
};

// The config narrowed to one method, as recorded in the metadata.
inline RunConfig resolved_for(const RunConfig& cfg, const MethodRun& r) {
  RunConfig one = cfg;
  one.runs = {MethodRun{r.method, std::nullopt}};
  one.ensemble = cfg.ensemble_for(r);
  return one;
}

inline json metadata_json(const RunConfig& cfg, const MethodRun& r, const MethodOutcome& o) {
  json m;
  m["version"] = kVersion;
  // The output block is left out so that the bytes do not depend on where
  // they are written.
  auto c = to_json(resolved_for(cfg, r));
  c.erase("output");
  m["config"] = c;
  m["breakdown_time"] = o.breakdown_time ? json(*o.breakdown_time) : json(nullptr);
  json per = json::object();
  for (const auto& s : o.series) {
    json e;
    const auto bt = stats::detect_blowup(s);
    e["breakdown_time"] = bt ? json(*bt) : json(nullptr);
    e["unreliable_from"] = s.unreliable_from ? json(*s.unreliable_from) : json(nullptr);
    e["diagnostics"] = s.diagnostics;
    per[s.name] = e;
  }
  m["observables"] = per;
  m["trajectories_blown_up"] = o.blown_up;
  return m;
}

// Simulates one method of a config and writes its files.
inline MethodOutcome run_method(const RunConfig& cfg, const MethodRun& r, std::size_t workers) {
  namespace fs = std::filesystem;
  const auto run = validate_config(cfg.ensemble_for(r), MethodSpec(r.method), cfg.params);
  const auto result = run_ensemble(run, workers);

  MethodOutcome out{r.method, {}, std::nullopt, result.blowup_times.size(), {}};
  for (const auto& name : cfg.observables) {
    out.series.push_back(stats::observable_series(result, run, name));
    if (auto bt = stats::detect_blowup(out.series.back()))
      out.breakdown_time = out.breakdown_time ? std::min(*out.breakdown_time, *bt) : *bt;
  }

  const fs::path dir(cfg.output_path);
  output_detail::ensure_dir(dir);
  const std::string stem = cfg.name + "_" + std::string(to_string(r.method));
  const auto meta = metadata_json(cfg, r, out);
  for (const auto& s : out.series) {
    fs::path file = dir / (stem + "_" + s.name + (cfg.format == OutputFormat::csv ? ".csv" : ".json"));
    if (cfg.format == OutputFormat::csv) {
      output_detail::write_file(file, series_csv(s));
    } else {
      json doc;
      doc["series"] = series_json(s, r.method);
      doc["metadata"] = meta;
      output_detail::write_file(file, doc.dump(2) + "\n");
    }
    out.files.push_back(file);
  }
  fs::path meta_file = dir / (stem + ".meta.json");
  output_detail::write_file(meta_file, meta.dump(2) + "\n");
  out.files.push_back(meta_file);
  return out;
}

inline std::vector<MethodOutcome> run_config(const RunConfig& cfg, std::size_t workers = default_worker_count()) {
  std::vector<MethodOutcome> out;
  for (const auto& r : cfg.runs) out.push_back(run_method(cfg, r, workers));
  return out;
}

inline std::filesystem::path preset_path(const std::string& name, const std::filesystem::path& preset_dir) {
  return preset_dir / (name + ".json");
}

inline RunConfig load_preset(const std::string& name, const std::filesystem::path& preset_dir) {
  const auto path = preset_path(name, preset_dir);
  if (!std::filesystem::exists(path)) throw ConfigFileError("preset", 0, "unknown preset '" + name + "'");
  return load_run_config(path.string());
}

// Exact values only: columns t then one per observable, in the order given.
inline std::string oracle_table_csv(const oracle::OracleParams& p, const std::vector<double>& times,
                                    const std::vector<std::string>& observables) {
  using output_detail::num;
  std::string out = "t";
  for (const auto& o : observables) out += "," + o;
  out += '\n';
  for (double t : times) {
    out += num(t);
    for (const auto& o : observables) {
      const double v = stats::exact_value(o, t, p);
      out += ',';
      if (std::isfinite(v)) out += num(v);
    }
    out += '\n';
  }
  return out;
}

inline std::filesystem::path oracle_table(const RunConfig& cfg, const std::vector<double>& times) {
  const oracle::OracleParams p{cfg.params, cfg.ensemble.N_a0, cfg.ensemble.N_b0};
  const std::filesystem::path dir(cfg.output_path);
  output_detail::ensure_dir(dir);
  const auto file = dir / (cfg.name + "_oracle.csv");
  output_detail::write_file(file, oracle_table_csv(p, times, cfg.observables));
  return file;
}

// n evenly spaced times covering [0, t_final].
inline std::vector<double> linspace_times(double t_final, std::size_t n) {
  std::vector<double> t;
  if (n < 2) return {0.0};
  for (std::size_t i = 0; i < n; ++i) t.push_back(t_final * static_cast<double>(i) / static_cast<double>(n - 1));
  return t;
}

}  // namespace hybridps
