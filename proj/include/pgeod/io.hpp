#pragma once

// JSON emitters and SVG portraits. Needs nlohmann_json on the include path.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgeod/geodesic.hpp"
#include "pgeod/path.hpp"
#include "pgeod/projective.hpp"
#include "pgeod/symmetry.hpp"

namespace pgeod::io {

using nlohmann::json;

/// JSON has no infinities: they travel as "inf"/"-inf", NaN as null.
inline json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double read_number(const json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw Error(ErrorCode::ParseError, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

inline json to_json(const GeodesicPath& p, const std::string& metric) {
  json samples = json::array();
  for (const auto& s : p.samples) {
    samples.push_back({{"t", number(s.t)}, {"x", number(s.x)}, {"y", number(s.y)}, {"vx", number(s.vx)},
                       {"vy", number(s.vy)}});
  }
  return {{"metric", metric},
          {"stop_reason", to_string(p.stop_reason)},
          {"type", to_string(p.type_tag)},
          {"samples", std::move(samples)}};
}

inline GeodesicPath path_from_json(const json& j) {
  GeodesicPath p;
  const std::string stop = j.at("stop_reason").get<std::string>();
  for (auto r : {StopReason::reached_tmax, StopReason::hit_domain_boundary, StopReason::hit_parabolic_set,
                 StopReason::step_underflow, StopReason::user_event}) {
    if (stop == to_string(r)) p.stop_reason = r;
  }
  const std::string type = j.value("type", "isotropic");
  for (auto t : {CurveType::timelike, CurveType::spacelike, CurveType::isotropic, CurveType::mixed}) {
    if (type == to_string(t)) p.type_tag = t;
  }
  for (const auto& s : j.at("samples")) {
    p.samples.push_back({read_number(s.at("x")), read_number(s.at("y")), read_number(s.at("vx")),
                         read_number(s.at("vy")), read_number(s.at("t"))});
  }
  return p;
}

inline json to_json(const JetPath& p, const std::string& metric) {
  json samples = json::array();
  for (const auto& s : p.samples) {
    samples.push_back({{"s", number(s.s)},
                       {"x", number(s.x)},
                       {"y", number(s.y)},
                       {"p_or_q", number(s.dir.value())},
                       {"chart", s.dir.chart() == Chart::affine ? "p" : "q"}});
  }
  return {{"metric", metric}, {"stop_reason", to_string(p.stop_reason)}, {"samples", std::move(samples)}};
}

inline json to_json(const AdmissibleSet& s, Point q0, const std::string& metric) {
  json dirs = json::array();
  for (const auto& d : s.directions) {
    dirs.push_back({{"p", number(d.dir.slope())},
                    {"multiplicity", d.multiplicity},
                    {"kind", to_string(d.kind)}});
  }
  return {{"metric", metric},
          {"point", {number(q0.x), number(q0.y)}},
          {"count", s.count()},
          {"degenerate", s.degenerate},
          {"mu", {number(s.mu.mu0), number(s.mu.mu1), number(s.mu.mu2), number(s.mu.mu3)}},
          {"directions", std::move(dirs)}};
}

inline json to_json(const ClassRow& r) {
  return {{"type", to_string(r.type)},
          {"h2_range", r.h2_range()},
          {"h2_lo", number(r.h2_lo)},
          {"h2_hi", number(r.h2_hi)},
          {"lo_closed", r.lo_closed},
          {"hi_closed", r.hi_closed},
          {"endpoint_1", r.endpoint_1},
          {"endpoint_2", r.endpoint_2},
          {"description", r.description},
          {"launch_y", number(r.launch_y)},
          {"side", r.side == Side::plus ? "plus" : "minus"},
          {"h2_rep", number(r.h2_rep)},
          {"alpha_rep", number(r.alpha_rep)},
          {"verified", r.verified},
          {"deriv_distance", number(r.deriv_distance)}};
}

inline json to_json(const Classification& c, const FamilyQuery& q, const std::string& metric) {
  json rows = json::array();
  for (const auto& r : c.rows) rows.push_back(to_json(r));
  json bounds = json::array();
  for (double b : c.boundaries()) bounds.push_back(number(b));
  return {{"metric", metric},
          {"y0", number(q.y0)},
          {"launch", to_string(q.launch)},
          {"side", q.side == Side::plus ? "plus" : "minus"},
          {"whole_region", q.whole_region},
          {"rows", std::move(rows)},
          {"boundaries", std::move(bounds)}};
}

// ---------------------------------------------------------------------------
// SVG portraits

enum class Stroke { timelike, spacelike, isotropic, dashed };

inline const char* to_string(Stroke s) {
  switch (s) {
    case Stroke::timelike: return "timelike";
    case Stroke::spacelike: return "spacelike";
    case Stroke::isotropic: return "isotropic";
    case Stroke::dashed: return "horizontal geodesic / admissible direction";
  }
  return "?";
}

inline Stroke stroke_for(CurveType t) {
  switch (t) {
    case CurveType::spacelike: return Stroke::spacelike;
    case CurveType::isotropic: return Stroke::isotropic;
    default: return Stroke::timelike;
  }
}

struct Polyline {
  std::vector<Point> points;
  Stroke stroke = Stroke::timelike;
};

struct PortraitSpec {
  std::string title;
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  int width = 640, height = 480;
  std::vector<Polyline> curves;
};

/// Ramer-Douglas-Peucker on a polyline.
inline std::vector<Point> simplify(const std::vector<Point>& pts, double tol) {
  if (pts.size() < 3) return pts;
  const std::size_t n = pts.size();
  std::vector<bool> keep(n, false);
  keep[0] = keep[n - 1] = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    const double dx = pts[j].x - pts[i].x, dy = pts[j].y - pts[i].y;
    const double len = std::hypot(dx, dy);
    double worst = -1.0;
    std::size_t at = i;
    for (std::size_t k = i + 1; k < j; ++k) {
      const double ex = pts[k].x - pts[i].x, ey = pts[k].y - pts[i].y;
      const double d = len > 0.0 ? std::abs(dx * ey - dy * ex) / len : std::hypot(ex, ey);
      if (d > worst) {
        worst = d;
        at = k;
      }
    }
    if (worst > tol) {
      keep[at] = true;
      stack.push_back({i, at});
      stack.push_back({at, j});
    }
  }
  std::vector<Point> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) out.push_back(pts[k]);
  }
  return out;
}

namespace detail {

inline const char* color(Stroke s) {
  switch (s) {
    case Stroke::timelike: return "#1f4fd8";
    case Stroke::spacelike: return "#d62728";
    case Stroke::isotropic: return "#e6b800";
    case Stroke::dashed: return "#555555";
  }
  return "#000000";
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

/// Deterministic SVG: curves grouped by stroke in a fixed order, points
/// outside the window split a curve, and each run is simplified in
/// viewport-normalized units at 1e-4 before printing with 6 decimals.
inline std::string render_svg(const PortraitSpec& spec) {
  const double W = spec.width, H = spec.height;
  const double sx = spec.x1 - spec.x0, sy = spec.y1 - spec.y0;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                spec.width, spec.height + 70, spec.width, spec.height + 70);
  out += buf;
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    out += "<title>" + detail::escape(spec.title) + "</title>\n";
  }
  std::snprintf(buf, sizeof buf, "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"none\" stroke=\"#999\"/>\n",
                spec.width, spec.height);
  out += buf;

  for (Stroke s : {Stroke::timelike, Stroke::spacelike, Stroke::isotropic, Stroke::dashed}) {
    std::string group;
    for (const auto& c : spec.curves) {
      if (c.stroke != s) continue;
      std::vector<std::vector<Point>> runs(1);
      for (const auto& p : c.points) {
        const bool inside = std::isfinite(p.x) && std::isfinite(p.y) && p.x >= spec.x0 && p.x <= spec.x1 &&
                            p.y >= spec.y0 && p.y <= spec.y1;
        if (inside) {
          runs.back().push_back({(p.x - spec.x0) / sx, (spec.y1 - p.y) / sy});
        } else if (!runs.back().empty()) {
          runs.emplace_back();
        }
      }
      for (const auto& run : runs) {
        if (run.size() < 2) continue;
        group += "<polyline points=\"";
        bool first = true;
        for (const auto& p : simplify(run, 1e-4)) {
          std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", first ? "" : " ", p.x * W, p.y * H);
          group += buf;
          first = false;
        }
        group += "\"/>\n";
      }
    }
    if (group.empty()) continue;
    std::snprintf(buf, sizeof buf, "<g class=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.2\"%s>\n",
                  s == Stroke::dashed ? "dashed" : to_string(s), detail::color(s),
                  s == Stroke::dashed ? " stroke-dasharray=\"5 3\"" : "");
    out += buf;
    out += group;
    out += "</g>\n";
  }

  // Legend below the plot.
  double ly = H + 18.0;
  int col = 0;
  out += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (Stroke s : {Stroke::timelike, Stroke::spacelike, Stroke::isotropic, Stroke::dashed}) {
    const double lx = 10.0 + (col % 2) * W / 2.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.6f\" y1=\"%.6f\" x2=\"%.6f\" y2=\"%.6f\" stroke=\"%s\" stroke-width=\"2\"%s/>\n", lx,
                  ly, lx + 30.0, ly, detail::color(s), s == Stroke::dashed ? " stroke-dasharray=\"5 3\"" : "");
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.6f\" y=\"%.6f\">%s</text>\n", lx + 38.0, ly + 4.0, to_string(s));
    out += buf;
    if (++col % 2 == 0) ly += 20.0;
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace pgeod::io
