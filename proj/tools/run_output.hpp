#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace salab::cli {

namespace fs = std::filesystem;

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Quoted CSV field.
inline std::string csv_text(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

/// JSON number, or null when not finite.
inline ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

inline ojson jcomplex_matrix(const CMat& m) {
  ojson re = ojson::array(), im = ojson::array();
  for (int i = 0; i < m.rows(); ++i) {
    ojson r = ojson::array(), s = ojson::array();
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(jnum(m(i, j).real()));
      s.push_back(jnum(m(i, j).imag()));
    }
    re.push_back(r);
    im.push_back(s);
  }
  return {{"re", re}, {"im", im}};
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct RunOutput {
  fs::path dir;
  ojson results = ojson::object();
  ojson diagnostics = ojson::object();
  std::vector<Table> tables;

  Table& table(const std::string& name, std::vector<std::string> cols) {
    tables.push_back(Table{name, std::move(cols), {}});
    return tables.back();
  }
};

inline std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s%03dZ", buf, static_cast<int>(ms));
  return out;
}

inline fs::path make_run_dir(const RunConfig& c) {
  const std::string stem = utc_stamp() + "-" + config_hash(c);
  fs::path dir = fs::path(c.out_dir) / stem;
  for (int k = 1; fs::exists(dir); ++k) dir = fs::path(c.out_dir) / (stem + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline void write_table(const fs::path& dir, const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += "\n";
  }
  write_text(dir / (t.name + ".csv"), s);
}

}  // namespace salab::cli
