#pragma once

// Metrics defined by coefficient expressions, and the key = value text format
// used for metric configs and catalog facts.

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pgeod/error.hpp"
#include "pgeod/expr.hpp"
#include "pgeod/metric.hpp"

namespace pgeod {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Splits on `sep` at parenthesis depth zero, trimming each piece.
inline std::vector<std::string> split_top_level(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

/// Evaluates a constant expression; "inf", "+inf" and "-inf" are accepted.
inline double eval_constant(std::string_view text, const std::map<std::string, double>& params = {}) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  const expr::NodePtr node = expr::parse(t, params);
  if (node->uses_x()) throw Error(ErrorCode::ParseError, "constant expected, got '" + t + "'");
  return node->eval(0.0, 0.0);
}

/// Metric whose coefficients are expression strings in x and y, with exact
/// partials from the expression tree. The metric is y-only when no
/// coefficient mentions x.
inline MetricField metric_from_expressions(const std::string& name, const std::string& a, const std::string& b,
                                           const std::string& c,
                                           const std::map<std::string, double>& params = {}) {
  const expr::NodePtr ea = expr::parse(a, params);
  const expr::NodePtr eb = expr::parse(b, params);
  const expr::NodePtr ec = expr::parse(c, params);
  MetricField m;
  m.name = name;
  m.a = [ea](double x, double y) { return ea->eval(x, y); };
  m.b = [eb](double x, double y) { return eb->eval(x, y); };
  m.c = [ec](double x, double y) { return ec->eval(x, y); };
  auto grad = [](expr::NodePtr e) {
    return [e](double x, double y) {
      const expr::Dual d = e->diff(x, y);
      return Gradient{d.dx, d.dy};
    };
  };
  m.da = grad(ea);
  m.db = grad(eb);
  m.dc = grad(ec);
  const bool uses_x = ea->uses_x() || eb->uses_x() || ec->uses_x();
  m.symmetry = uses_x ? Symmetry::general : Symmetry::y_only;
  return m;
}

// ---------------------------------------------------------------------------
// Facts: "kind key=value key=value ..." with expression values.

struct Fact {
  std::string kind;
  std::map<std::string, std::string> args;
  std::string source;

  bool has(const std::string& key) const { return args.count(key) != 0; }

  const std::string& raw(const std::string& key) const {
    const auto it = args.find(key);
    if (it == args.end()) throw Error(ErrorCode::ParseError, "fact '" + source + "' lacks '" + key + "'");
    return it->second;
  }

  double number(const std::string& key, const std::map<std::string, double>& params = {}) const {
    return eval_constant(raw(key), params);
  }

  std::vector<double> numbers(const std::string& key, const std::map<std::string, double>& params = {}) const {
    std::vector<double> out;
    for (const auto& piece : split_top_level(raw(key), ',')) out.push_back(eval_constant(piece, params));
    return out;
  }
};

inline Fact parse_fact(std::string_view line) {
  Fact f;
  f.source = trim(line);
  std::istringstream in(f.source);
  in >> f.kind;
  if (f.kind.empty()) throw Error(ErrorCode::ParseError, "empty fact");
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::ParseError, "bad fact token '" + tok + "'");
    f.args[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return f;
}

/// One fact per non-empty line; '#' starts a comment.
inline std::vector<Fact> parse_facts(std::string_view text) {
  std::vector<Fact> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (!trim(line).empty()) out.push_back(parse_fact(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config text: "key = value" lines, '#' comments. Repeated keys (lines,
// fact, param.*) accumulate in order.

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

inline std::vector<ConfigEntry> parse_config_lines(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(no) + ": expected 'key = value'");
    }
    ConfigEntry e{trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)), no};
    if (e.key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(no) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pgeod
