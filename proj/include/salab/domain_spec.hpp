#pragma once

// Text syntax for boundary conditions:
//   dirichlet | neumann | friedrichs | robin(a,b) | dirichlet-neumann | neumann-dirichlet
//   (robin(a,b): a u(0) + b u'(0) = 0, and a u(1) - b u'(1) = 0 for the full model)
//   perp(<spec>)                       A-orthogonal complement
//   trace-matrix(t11,t21;t12,t22)      columns of traces, separated by ';'
//   chart(<base>, s11,s12;s21,s22)     graph over <base>, rows of sigma separated by ';'
// Entries may be complex: 2, -1.5e-3, 3i, 1-2i.

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "salab/realization.hpp"

namespace salab {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_real(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw Error(ErrorCode::ConfigError, "empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw Error(ErrorCode::ConfigError, "bad number '" + t + "'");
  return v;
}

// Splits on `sep` at parenthesis depth zero.
inline std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (depth < 0) throw Error(ErrorCode::ConfigError, "unbalanced parentheses in '" + s + "'");
    if (ch == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw Error(ErrorCode::ConfigError, "unbalanced parentheses in '" + s + "'");
  out.push_back(cur);
  return out;
}

inline CMat parse_rows(const std::string& s, char row_sep, char col_sep);

}  // namespace detail

inline cplx parse_complex(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) throw Error(ErrorCode::ConfigError, "empty number");
  if (t.back() != 'i' && t.back() != 'j') return detail::parse_real(t);
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag = [](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return detail::parse_real(s);
  };
  if (split == std::string::npos) return {0.0, imag(t)};
  return {detail::parse_real(t.substr(0, split)), imag(t.substr(split))};
}

inline CMat detail::parse_rows(const std::string& s, char row_sep, char col_sep) {
  const auto rows = split_top(s, row_sep);
  std::vector<std::vector<cplx>> vals;
  for (const auto& r : rows) {
    std::vector<cplx> row;
    for (const auto& e : split_top(r, col_sep)) row.push_back(parse_complex(e));
    if (!vals.empty() && row.size() != vals.front().size())
      throw Error(ErrorCode::ConfigError, "ragged matrix '" + s + "'");
    vals.push_back(std::move(row));
  }
  CMat m(vals.size(), vals.front().size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < vals[i].size(); ++j) m(i, j) = vals[i][j];
  return m;
}

namespace detail {

inline LagrangianDomain parse_domain_impl(const IntervalLaplacian& model, const std::string& raw) {
  std::string s = trim(raw);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const bool full = model.kind() == BoundaryModel::Full;
  const int n = model.space()->dim();
  auto unit = [n](std::initializer_list<int> idx) {
    CMat y = CMat::Zero(n, static_cast<int>(idx.size()));
    int c = 0;
    for (int i : idx) y(i, c++) = 1.0;
    return y;
  };

  if (s == "friedrichs" || s == "dirichlet") return model.friedrichs();
  if (s == "neumann") return model.domain(full ? unit({0, 2}) : unit({0}));
  if (s == "dirichlet-neumann" || s == "neumann-dirichlet") {
    if (!full) throw Error(ErrorCode::ConfigError, s + " needs the full model");
    return model.domain(s == "dirichlet-neumann" ? unit({1, 2}) : unit({0, 3}));
  }

  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') throw Error(ErrorCode::ConfigError, "unknown domain '" + s + "'");
  const std::string head = trim(s.substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);

  if (head == "robin") {
    const auto args = split_top(body, ',');
    if (args.size() != 2) throw Error(ErrorCode::ConfigError, "robin takes two coefficients");
    const double a = parse_real(args[0]), b = parse_real(args[1]);
    if (a == 0.0 && b == 0.0) throw Error(ErrorCode::ConfigError, "robin coefficients both zero");
    // a u(0) + b u'(0) = 0, mirrored (a u(1) - b u'(1) = 0) at a free right end
    CMat y = CMat::Zero(n, full ? 2 : 1);
    y(0, 0) = b;
    y(1, 0) = -a;
    if (full) {
      y(2, 1) = b;
      y(3, 1) = a;
    }
    return model.domain(y);
  }
  if (head == "perp") return orthocomplement(parse_domain_impl(model, body));
  if (head == "trace-matrix") {
    const CMat y = parse_rows(body, ';', ',').transpose();
    if (y.rows() != n) throw Error(ErrorCode::ConfigError, "trace columns need " + std::to_string(n) + " entries");
    return model.domain(y);
  }
  if (head == "chart") {
    const auto parts = split_top(body, ',');
    if (parts.size() < 2) throw Error(ErrorCode::ConfigError, "chart needs a base and sigma");
    std::string rest;
    for (std::size_t k = 1; k < parts.size(); ++k) rest += (k > 1 ? "," : "") + parts[k];
    const LagrangianDomain base = parse_domain_impl(model, parts[0]);
    return graph_domain(GraphChart{base, parse_rows(rest, ';', ',')});
  }
  throw Error(ErrorCode::ConfigError, "unknown domain '" + s + "'");
}

}  // namespace detail

/// Parses a domain string for `model`; every failure is reported as ConfigError.
inline LagrangianDomain parse_domain(const IntervalLaplacian& model, const std::string& spec) {
  try {
    return detail::parse_domain_impl(model, spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, "domain '" + spec + "': " + e.what());
  }
}

}  // namespace salab
