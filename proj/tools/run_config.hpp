#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "salab/domain_spec.hpp"
#include "salab/instability.hpp"

namespace salab::cli {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

struct SyntheticParams {
  double a = kPi * kPi;
  double p = 2.0;
  std::vector<double> amps{1.0};
  double q = 1.0;
};

struct RunConfig {
  std::string command;
  std::string model = "pinned";
  std::string domain;
  std::string base;
  std::vector<double> lambda_grid;
  int count = 10;
  int truncation = 20000;
  std::uint64_t seed = 42;
  int samples = 0;
  double m = 5.0;
  double scale = 2.0;
  bool oracle = false;
  int oracle_n = 4000;
  int quad_order = 96;
  std::string out_dir = "runs";
  SyntheticParams synthetic;
};

inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> g;
  for (const auto& part : detail::split_top(text, ',')) g.push_back(detail::parse_real(part));
  return g;
}

/// Reads the keys of a JSON config into `c`; unknown keys are rejected.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model = v.get<std::string>();
      else if (key == "domain") c.domain = v.get<std::string>();
      else if (key == "base") c.base = v.get<std::string>();
      else if (key == "lambda_grid") c.lambda_grid = v.is_string() ? parse_grid(v.get<std::string>()) : v.get<std::vector<double>>();
      else if (key == "count") c.count = v.get<int>();
      else if (key == "truncation") c.truncation = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "samples") c.samples = v.get<int>();
      else if (key == "M") c.m = v.get<double>();
      else if (key == "scale") c.scale = v.get<double>();
      else if (key == "oracle") c.oracle = v.get<bool>();
      else if (key == "oracle_n") c.oracle_n = v.get<int>();
      else if (key == "quad_order") c.quad_order = v.get<int>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "synthetic") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "a") c.synthetic.a = sv.get<double>();
          else if (sk == "p") c.synthetic.p = sv.get<double>();
          else if (sk == "amps") c.synthetic.amps = sv.get<std::vector<double>>();
          else if (sk == "q") c.synthetic.q = sv.get<double>();
          else throw Error(ErrorCode::ConfigError, "unknown synthetic key '" + sk + "'");
        }
      } else {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config type error: ") + e.what());
  }
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  RunConfig c;
  try {
    apply_json(c, nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config parse error: ") + e.what());
  }
  return c;
}

/// Fills command-specific defaults and checks ranges.
inline void resolve(RunConfig& c) {
  const std::string& cmd = c.command;
  if (c.model != "pinned" && c.model != "full" && c.model != "synthetic")
    throw Error(ErrorCode::ConfigError, "model must be pinned, full or synthetic");
  if (c.model == "synthetic" && cmd != "spectrum")
    throw Error(ErrorCode::ConfigError, "the synthetic model only supports the spectrum command");
  if (c.count < 1) throw Error(ErrorCode::ConfigError, "count must be >= 1");
  if (c.truncation < 0) throw Error(ErrorCode::ConfigError, "truncation must be >= 0");
  if (c.quad_order < 8) throw Error(ErrorCode::ConfigError, "quad_order must be >= 8");
  if (c.oracle_n < 100) throw Error(ErrorCode::ConfigError, "oracle_n must be >= 100");
  if (c.m < 0) throw Error(ErrorCode::ConfigError, "M must be >= 0");
  if (c.synthetic.amps.empty()) throw Error(ErrorCode::ConfigError, "synthetic amps must be non-empty");

  if (cmd == "spectrum") {
    if (c.domain.empty()) c.domain = "dirichlet";
  } else if (cmd == "flow") {
    if (c.base.empty()) c.base = "neumann";
    if (c.lambda_grid.empty()) c.lambda_grid = {-1e1, -1e2, -1e3, -1e4};
    for (double l : c.lambda_grid)
      if (!(l < 0)) throw Error(ErrorCode::ConfigError, "flow grid must be negative");
  } else if (cmd == "instability") {
    if (c.domain.empty()) c.domain = "dirichlet";
    if (c.lambda_grid.empty()) c.lambda_grid = {-1e2, -1e3, -1e4};
  } else if (cmd == "certify") {
    if (c.base.empty()) c.base = "friedrichs";
    if (c.lambda_grid.empty()) c.lambda_grid = certificate_grid();
    if (c.samples == 0) c.samples = 10;
  } else if (cmd == "audit") {
    if (c.samples == 0) c.samples = c.model == "full" ? 100 : 200;
    if (c.lambda_grid.empty()) c.lambda_grid = {-1e3};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown command '" + cmd + "'");
  }
  if (c.samples < 0) throw Error(ErrorCode::ConfigError, "samples must be >= 0");
}

inline ojson to_json(const RunConfig& c) {
  ojson j;
  j["command"] = c.command;
  j["model"] = c.model;
  j["domain"] = c.domain;
  j["base"] = c.base;
  j["lambda_grid"] = c.lambda_grid;
  j["count"] = c.count;
  j["truncation"] = c.truncation;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["M"] = c.m;
  j["scale"] = c.scale;
  j["oracle"] = c.oracle;
  j["oracle_n"] = c.oracle_n;
  j["quad_order"] = c.quad_order;
  j["out_dir"] = c.out_dir;
  j["synthetic"] = {{"a", c.synthetic.a}, {"p", c.synthetic.p}, {"amps", c.synthetic.amps}, {"q", c.synthetic.q}};
  return j;
}

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of the config with keys sorted, independent of field order.
inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(nlohmann::json::parse(to_json(c).dump()).dump()); }

}  // namespace salab::cli
