#pragma once

// Built-in metrics, each shipped with machine-checkable facts.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "pgeod/config.hpp"
#include "pgeod/error.hpp"
#include "pgeod/metric.hpp"

namespace pgeod {

struct CatalogEntry {
  std::string name;
  MetricField metric;
  /// Numeric parameters, also visible to fact expressions (rho for the torus).
  std::map<std::string, double> params;
  std::vector<Fact> facts;
};

struct CatalogListing {
  std::string name;
  std::string signature;  // e.g. "torus(rho)"
  std::string summary;
};

inline std::vector<CatalogListing> catalog_listing() {
  return {
      {"flat", "flat", "dx^2 + dy^2"},
      {"minkowski", "minkowski", "dx^2 - dy^2"},
      {"ex21", "ex21", "dx^2 + y dy^2"},
      {"ex22", "ex22", "dx^2 - y dy^2"},
      {"klein", "klein", "(dx^2 + dy^2)/y^2, y > 0"},
      {"sphere", "sphere", "(1 + sin y) dx^2 - sin y dy^2, -pi/2 < y < 3pi/2"},
      {"torus", "torus(rho)", "(rho + cos y)^2 dx^2 - cos 2y dy^2, rho > 1 (default 2)"},
      {"klein_type", "klein_type(v,w)", "(v(y) dx^2 + w(y) dy^2)/y^2 (v, w default 1)"},
      {"grushin_type", "grushin_type(v,w)", "v(y)/y^2 dx^2 + w(y) dy^2 (v, w default 1)"},
      {"ex34", "ex34", "klein_type with v = 1 + y^4"},
  };
}

namespace detail {

inline MetricField constant_metric(std::string name, double a, double b, double c) {
  MetricField m;
  m.name = std::move(name);
  m.a = [a](double, double) { return a; };
  m.b = [b](double, double) { return b; };
  m.c = [c](double, double) { return c; };
  m.da = m.db = m.dc = [](double, double) { return Gradient{}; };
  m.symmetry = Symmetry::y_only;
  return m;
}

inline GradientField zero_gradient() {
  return [](double, double) { return Gradient{}; };
}

inline GradientField dy_only(std::function<double(double)> f) {
  return [f = std::move(f)](double, double y) { return Gradient{0.0, f(y)}; };
}

inline void check_params(const std::string& name, const std::map<std::string, std::string>& given,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : given) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw Error(ErrorCode::BadParam, "metric '" + name + "' has no parameter '" + k + "'");
  }
}

inline std::string param_or(const std::map<std::string, std::string>& given, const std::string& key,
                            const std::string& fallback) {
  const auto it = given.find(key);
  return it == given.end() ? fallback : it->second;
}

constexpr const char* kSphereFacts = R"(
parabolic_line y=0
parabolic_line y=pi
horizontal_geodesic y=pi/2 h2=2
admissible x=0 y=0 count=1 p=inf
admissible x=0 y=pi count=1 p=inf
class_count y0=0 launch=parabolic region=1 rows=7
class_boundaries y0=0 launch=parabolic region=1 h2=1,2
)";

// The non-isotropic admissible slopes solve p^2 = a'/c' at the parallel.
constexpr const char* kTorusFacts = R"(
parabolic_line y=-pi/4
parabolic_line y=pi/4
parabolic_line y=3*pi/4
parabolic_line y=5*pi/4
horizontal_geodesic y=0 h2=(rho+1)^2
horizontal_geodesic y=pi h2=(rho-1)^2
admissible x=0 y=pi/4 count=1 p=inf
admissible x=0 y=3*pi/4 count=3 p=inf,sqrt((sqrt(2)*rho-1)/2),-sqrt((sqrt(2)*rho-1)/2)
admissible x=0 y=5*pi/4 count=3 p=inf,sqrt((sqrt(2)*rho-1)/2),-sqrt((sqrt(2)*rho-1)/2)
class_count y0=pi launch=regular lo=3*pi/4 hi=5*pi/4 rows=5
class_boundaries y0=pi launch=regular lo=3*pi/4 hi=5*pi/4 h2=(rho-1)^2,(rho-1/sqrt(2))^2
)";

constexpr const char* kEx21Facts = R"(
parabolic_line y=0
admissible x=0 y=0 degenerate=1
)";

constexpr const char* kEx22Facts = R"(
parabolic_line y=0
)";

constexpr const char* kKleinFacts = R"(
envelope y=1 h2=1
)";

constexpr const char* kEx34Facts = R"(
horizontal_geodesic y=1 h2=2
horizontal_geodesic y=-1 h2=2
class_count y0=0 launch=klein side=plus rows=3
class_boundaries y0=0 launch=klein side=plus h2=2
)";

}  // namespace detail

/// Builds a catalog entry. Parameters are expression strings; the torus takes
/// rho, the Klein and Grushin types take the functions v and w of y.
inline CatalogEntry lookup(const std::string& name, const std::map<std::string, std::string>& params = {}) {
  using std::numbers::pi;
  CatalogEntry e;
  e.name = name;
  MetricField& m = e.metric;

  if (name == "flat") {
    detail::check_params(name, params, {});
    m = detail::constant_metric(name, 1.0, 0.0, 1.0);
  } else if (name == "minkowski") {
    detail::check_params(name, params, {});
    m = detail::constant_metric(name, 1.0, 0.0, -1.0);
  } else if (name == "ex21" || name == "ex22") {
    detail::check_params(name, params, {});
    const double s = name == "ex21" ? 1.0 : -1.0;
    m = detail::constant_metric(name, 1.0, 0.0, 0.0);
    m.c = [s](double, double y) { return s * y; };
    m.dc = detail::dy_only([s](double) { return s; });
    m.lines = {{0.0, "L"}};
    e.facts = parse_facts(name == "ex21" ? detail::kEx21Facts : detail::kEx22Facts);
  } else if (name == "klein") {
    detail::check_params(name, params, {});
    m.name = name;
    m.a = m.c = [](double, double y) { return 1.0 / (y * y); };
    m.b = [](double, double) { return 0.0; };
    m.da = m.dc = detail::dy_only([](double y) { return -2.0 / (y * y * y); });
    m.db = detail::zero_gradient();
    m.symmetry = Symmetry::y_only;
    m.domain = {0.0, kInf};
    m.lines = {{0.0, "A"}};
    e.facts = parse_facts(detail::kKleinFacts);
  } else if (name == "sphere") {
    detail::check_params(name, params, {});
    m.name = name;
    m.a = [](double, double y) { return 1.0 + std::sin(y); };
    m.b = [](double, double) { return 0.0; };
    m.c = [](double, double y) { return -std::sin(y); };
    m.da = detail::dy_only([](double y) { return std::cos(y); });
    m.db = detail::zero_gradient();
    m.dc = detail::dy_only([](double y) { return -std::cos(y); });
    m.symmetry = Symmetry::y_only;
    m.domain = {-pi / 2.0, 3.0 * pi / 2.0};
    m.lines = {{0.0, "C_N"}, {pi / 2.0, "E"}, {pi, "C_S"}};
    e.facts = parse_facts(detail::kSphereFacts);
  } else if (name == "torus") {
    detail::check_params(name, params, {"rho"});
    double rho = 2.0;
    if (params.count("rho")) {
      try {
        rho = eval_constant(params.at("rho"));
      } catch (const Error&) {
        throw Error(ErrorCode::BadParam, "rho must be a number");
      }
    }
    if (!(rho > 1.0) || !std::isfinite(rho)) throw Error(ErrorCode::BadParam, "torus needs rho > 1");
    e.params["rho"] = rho;
    m.name = name;
    m.a = [rho](double, double y) { return (rho + std::cos(y)) * (rho + std::cos(y)); };
    m.b = [](double, double) { return 0.0; };
    m.c = [](double, double y) { return -std::cos(2.0 * y); };
    m.da = detail::dy_only([rho](double y) { return -2.0 * (rho + std::cos(y)) * std::sin(y); });
    m.db = detail::zero_gradient();
    m.dc = detail::dy_only([](double y) { return 2.0 * std::sin(2.0 * y); });
    m.symmetry = Symmetry::y_only;
    m.y_period = 2.0 * pi;
    m.lines = {{-pi / 4.0, "C_S+"}, {0.0, "E+"},        {pi / 4.0, "C_N+"},      {pi / 2.0, "N"},
               {3.0 * pi / 4.0, "C_N-"}, {pi, "E-"}, {5.0 * pi / 4.0, "C_S-"}};
    e.facts = parse_facts(detail::kTorusFacts);
  } else if (name == "klein_type" || name == "grushin_type") {
    detail::check_params(name, params, {"v", "w"});
    const std::string v = detail::param_or(params, "v", "1");
    const std::string w = detail::param_or(params, "w", "1");
    const bool klein = name == "klein_type";
    try {
      m = metric_from_expressions(name, "(" + v + ")/y^2", "0", klein ? "(" + w + ")/y^2" : "(" + w + ")");
    } catch (const Error& err) {
      throw Error(ErrorCode::BadParam, err.what());
    }
    if (m.symmetry != Symmetry::y_only) throw Error(ErrorCode::BadParam, "v and w must depend on y only");
    m.singular_lines = {0.0};
    m.lines = {{0.0, "A"}};
  } else if (name == "ex34") {
    detail::check_params(name, params, {});
    m.name = name;
    m.a = [](double, double y) { return (1.0 + y * y * y * y) / (y * y); };
    m.b = [](double, double) { return 0.0; };
    m.c = [](double, double y) { return 1.0 / (y * y); };
    m.da = detail::dy_only([](double y) { return 2.0 * y - 2.0 / (y * y * y); });
    m.db = detail::zero_gradient();
    m.dc = detail::dy_only([](double y) { return -2.0 / (y * y * y); });
    m.symmetry = Symmetry::y_only;
    m.singular_lines = {0.0};
    m.lines = {{0.0, "A"}, {1.0, "y=1"}, {-1.0, "y=-1"}};
    e.facts = parse_facts(detail::kEx34Facts);
  } else {
    throw Error(ErrorCode::UnknownMetric, "no catalog metric named '" + name + "'");
  }
  return e;
}

/// Parses "NAME" or "NAME:k=v,k=v" (values may be expressions containing
/// commas inside parentheses).
inline CatalogEntry lookup_ref(std::string_view ref) {
  const auto colon = ref.find(':');
  const std::string name = trim(ref.substr(0, colon));
  std::map<std::string, std::string> params;
  if (colon != std::string_view::npos) {
    for (const auto& kv : split_top_level(ref.substr(colon + 1), ',')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::BadParam, "expected k=v in '" + kv + "'");
      params[trim(std::string_view(kv).substr(0, eq))] = trim(std::string_view(kv).substr(eq + 1));
    }
  }
  return lookup(name, params);
}

/// Loads a metric from config text. Either `builtin = NAME` with `param.K`
/// entries, or expressions `a`, `b`, `c` in x and y (with optional
/// `param.K` constants usable inside them). Optional keys: name, symmetry,
/// domain = lo, hi, lines = NAME:y, ..., singular = y, ..., fact = ...
inline CatalogEntry load_metric_config(std::string_view text) {
  const auto entries = parse_config_lines(text);
  std::map<std::string, std::string> single;
  std::map<std::string, std::string> params;
  std::vector<std::string> facts, lines, singular;
  static const std::vector<std::string> kKeys = {"name", "builtin", "a", "b", "c", "symmetry", "domain"};
  for (const auto& e : entries) {
    if (e.key.rfind("param.", 0) == 0) {
      params[e.key.substr(6)] = e.value;
    } else if (e.key == "fact") {
      facts.push_back(e.value);
    } else if (e.key == "lines") {
      lines.push_back(e.value);
    } else if (e.key == "singular") {
      singular.push_back(e.value);
    } else if (std::find(kKeys.begin(), kKeys.end(), e.key) != kKeys.end()) {
      single[e.key] = e.value;
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }

  CatalogEntry out;
  if (single.count("builtin")) {
    for (const char* k : {"a", "b", "c"}) {
      if (single.count(k)) throw Error(ErrorCode::ParseError, "builtin metrics take no coefficient expressions");
    }
    out = lookup(single["builtin"], params);
  } else {
    if (!single.count("a") || !single.count("c")) {
      throw Error(ErrorCode::ParseError, "config needs 'builtin' or the coefficients 'a' and 'c'");
    }
    std::map<std::string, double> values;
    for (const auto& [k, v] : params) values[k] = eval_constant(v);
    const std::string name = single.count("name") ? single["name"] : "custom";
    out.name = name;
    out.params = values;
    out.metric = metric_from_expressions(name, single["a"], single.count("b") ? single["b"] : "0", single["c"], values);
  }
  if (single.count("name")) out.name = out.metric.name = single["name"];
  if (single.count("symmetry")) {
    const std::string& s = single["symmetry"];
    if (s == "general") {
      out.metric.symmetry = Symmetry::general;
    } else if (s == "y_only") {
      out.metric.symmetry = Symmetry::y_only;
    } else {
      throw Error(ErrorCode::ParseError, "symmetry must be 'general' or 'y_only'");
    }
  }
  if (single.count("domain")) {
    const auto parts = split_top_level(single["domain"], ',');
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "domain needs 'lo, hi'");
    out.metric.domain = {eval_constant(parts[0], out.params), eval_constant(parts[1], out.params)};
    if (!(out.metric.domain.lo < out.metric.domain.hi)) throw Error(ErrorCode::ParseError, "empty domain");
  }
  for (const auto& l : lines) {
    for (const auto& item : split_top_level(l, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "lines entries look like NAME:y");
      out.metric.lines.push_back(
          {eval_constant(std::string_view(item).substr(colon + 1), out.params), trim(item.substr(0, colon))});
    }
  }
  for (const auto& s : singular) {
    for (const auto& item : split_top_level(s, ',')) out.metric.singular_lines.push_back(eval_constant(item, out.params));
  }
  for (const auto& f : facts) out.facts.push_back(parse_fact(f));
  return out;
}

}  // namespace pgeod
