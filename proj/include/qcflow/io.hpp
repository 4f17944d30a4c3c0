#pragma once

// JSON reports and run configurations.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcflow/error.hpp"
#include "qcflow/gradientflow.hpp"
#include "qcflow/registry.hpp"
#include "qcflow/verify.hpp"

namespace qcflow {

using json = nlohmann::ordered_json;

/// Wall time is included only when requested so that reports are byte-stable.
inline json to_json(const VerificationReport& r, bool with_timing = false) {
  json cases = json::array();
  for (const auto& c : r.cases) {
    cases.push_back({{"id", c.id},
                     {"basis", to_string(c.basis)},
                     {"comparison", to_string(c.comparison)},
                     {"status", c.passed ? "pass" : "fail"},
                     {"measured", c.measured},
                     {"expected", c.expected},
                     {"tolerance", c.tolerance}});
  }
  json j = {{"suite", r.suite},
            {"seed", r.seed},
            {"cases", std::move(cases)},
            {"summary", {{"total", r.cases.size()}, {"passed", r.passed()}, {"failed", r.failed()}}}};
  if (with_timing) j["wall_time_s"] = r.wallSeconds;
  return j;
}

inline json matrix_json(const SquareMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

/// Pointwise record of K, S(g), L_p and L_inf for a registry map.
inline json pointwise_record(const std::string& id, const std::vector<double>& params, const Vector& x,
                             double p) {
  const SmoothMap map = make_map(id, params, x.size());
  const Jet2Sample s = map.jet(x);
  const DilationReport r = analyze(s.J);
  return {{"map", id},
          {"params", params},
          {"n", x.size()},
          {"point", vector_json(x)},
          {"p", p},
          {"K", r.K},
          {"K2", r.K * r.K},
          {"det", r.det},
          {"conformal", r.conformal},
          {"Sg", matrix_json(r.Sg)},
          {"Lp", vector_json(lp_nondiv(s, p))},
          {"Linfty", vector_json(linfty_factored(s))}};
}

/// A gradient-flow run description.
struct FlowConfig {
  std::string mapId;
  std::vector<double> params;
  int n = 2;
  std::vector<int> shape;
  double h = 0.0;
  Vector origin;
  double p = 2.0;
  double T = 0.0;
  FlowOptions options;
  std::optional<int> threads;
  std::string energyCsv;
  std::string snapshot;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorCode::ConfigParse, what); }

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("key '") + key + "' has the wrong type");
  }
}

template <class T>
T optional_value(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return required<T>(j, key);
}

}  // namespace detail

/// Parses and fully validates a configuration; nothing is written here.
inline FlowConfig parse_flow_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) detail::config_error("configuration must be a JSON object");

  FlowConfig c;
  if (!j.contains("map") || !j["map"].is_object()) detail::config_error("missing object 'map'");
  c.mapId = detail::required<std::string>(j["map"], "id");
  c.params = detail::optional_value<std::vector<double>>(j["map"], "params", {});
  c.n = detail::required<int>(j, "n");
  c.shape = detail::required<std::vector<int>>(j, "shape");
  c.h = detail::required<double>(j, "h");
  c.origin = Vector(c.n == 2 || c.n == 3 ? c.n : 1);
  if (j.contains("origin")) {
    const auto o = detail::required<std::vector<double>>(j, "origin");
    if (static_cast<int>(o.size()) != c.n) detail::config_error("'origin' must have n entries");
    for (int i = 0; i < c.n; ++i) c.origin[i] = o[i];
  }
  c.p = detail::required<double>(j, "p");
  c.T = detail::required<double>(j, "T");

  const std::string mode = detail::optional_value<std::string>(j, "mode", "explicit");
  if (mode == "explicit") {
    c.options.mode = FlowMode::Explicit;
  } else if (mode == "picard") {
    c.options.mode = FlowMode::Picard;
  } else {
    detail::config_error("'mode' must be \"explicit\" or \"picard\"");
  }
  const std::string policy = detail::optional_value<std::string>(j, "policy", "frobenius");
  if (policy == "frobenius") {
    c.options.policy = DtPolicy::Frobenius;
  } else if (policy == "lemma") {
    c.options.policy = DtPolicy::LemmaBound;
  } else {
    detail::config_error("'policy' must be \"frobenius\" or \"lemma\"");
  }
  c.options.safety = detail::optional_value<double>(j, "safety", 0.2);
  c.options.picard_iterations = detail::optional_value<int>(j, "picard_iterations", 3);
  if (j.contains("threads")) c.threads = detail::required<int>(j, "threads");

  if (!j.contains("outputs") || !j["outputs"].is_object()) detail::config_error("missing object 'outputs'");
  c.energyCsv = detail::optional_value<std::string>(j["outputs"], "energy_csv", "");
  c.snapshot = detail::optional_value<std::string>(j["outputs"], "snapshot", "");
  if (c.energyCsv.empty() && c.snapshot.empty()) detail::config_error("'outputs' names no file");

  if (c.n != 2 && c.n != 3) detail::config_error("'n' must be 2 or 3");
  if (static_cast<int>(c.shape.size()) != c.n) detail::config_error("'shape' must have n entries");
  for (int s : c.shape)
    if (s < 4 || s > 1025) detail::config_error("'shape' entries must lie in [4, 1025]");
  if (!(c.h > 0.0) || !std::isfinite(c.h)) detail::config_error("'h' must be positive");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) detail::config_error("'p' must be >= 1");
  if (!(c.T >= 0.0) || !std::isfinite(c.T)) detail::config_error("'T' must be >= 0");
  if (!(c.options.safety > 0.0) || !std::isfinite(c.options.safety)) detail::config_error("'safety' must be positive");
  if (c.options.picard_iterations < 1) detail::config_error("'picard_iterations' must be >= 1");
  if (c.threads && *c.threads < 1) detail::config_error("'threads' must be >= 1");
  try {
    make_map(c.mapId, c.params, c.n);
  } catch (const Error& e) {
    detail::config_error(std::string("map: ") + e.what());
  }
  return c;
}

inline FlowConfig load_flow_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParse, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_flow_config(ss.str());
}

/// Samples the initial grid; a guard violation or a non-positive determinant
/// is a configuration error.
inline GridField initial_grid(const FlowConfig& c) {
  try {
    GridField g = GridField::sample(make_map(c.mapId, c.params, c.n), c.shape, c.h, c.origin);
    if (!(g.min_det() > 0.0)) throw Error(ErrorCode::NonPositiveDeterminant, "initial det du <= 0");
    energy(g, c.p);
    return g;
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigParse, std::string("initial grid: ") + e.what());
  }
}

}  // namespace qcflow
