#pragma once

// Executes catalog facts against the analysis modules.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pgeod/catalog.hpp"
#include "pgeod/projective.hpp"
#include "pgeod/symmetry.hpp"

namespace pgeod {

struct FactResult {
  Fact fact;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline FamilyQuery fact_query(const Fact& f, const std::map<std::string, double>& params) {
  FamilyQuery q;
  q.y0 = f.number("y0", params);
  if (f.has("launch")) q.launch = parse_launch_kind(f.raw("launch"));
  if (f.has("side")) q.side = f.raw("side") == "minus" ? Side::minus : Side::plus;
  if (f.has("lo")) q.lo = f.number("lo", params);
  if (f.has("hi")) q.hi = f.number("hi", params);
  if (f.has("region")) q.whole_region = f.number("region") != 0.0;
  return q;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline FactResult check_fact(const CatalogEntry& e, const Fact& f) {
  const MetricField& m = e.metric;
  const auto& P = e.params;
  FactResult r{f, false, ""};
  try {
    if (f.kind == "parabolic_line") {
      const double y = f.number("y", P);
      const MetricJet j = m.jet(0.0, y);
      const double d = std::abs(j.delta());
      r.pass = d <= 1e-9 * j.scale() && j.grad_delta().dy != 0.0;
      r.detail = "|Delta| = " + detail::fmt(d);
    } else if (f.kind == "horizontal_geodesic") {
      const double y = f.number("y", P), h2 = f.number("h2", P);
      std::optional<YDomain> window;
      if (m.y_period) window = YDomain{y - *m.y_period / 2.0, y + *m.y_period / 2.0};
      for (const auto& hg : horizontal_geodesics(m, window)) {
        if (std::abs(hg.y - y) <= 1e-8 && std::abs(hg.h2 - h2) <= 1e-8 * std::max(1.0, h2)) r.pass = true;
      }
      r.detail = r.pass ? "found" : "no critical point of a with that level";
    } else if (f.kind == "envelope") {
      const double y = f.number("y", P), h2 = f.number("h2", P);
      r.pass = singular_solution_test(m, y) == SingularSolution::envelope_not_geodesic &&
               std::abs(m.a(0.0, y) - h2) <= 1e-10 * std::max(1.0, h2);
      r.detail = "a'(y) = " + detail::fmt(m.jet(0.0, y).da.dy);
    } else if (f.kind == "admissible") {
      const AdmissibleSet s = admissible_directions(m, {f.number("x", P), f.number("y", P)});
      r.pass = true;
      if (f.has("degenerate")) r.pass = r.pass && s.degenerate == (f.number("degenerate") != 0.0);
      if (f.has("count")) r.pass = r.pass && static_cast<double>(s.count()) == f.number("count");
      if (f.has("p")) {
        for (double p : f.numbers("p", P)) {
          const Direction want = std::isinf(p) ? Direction::vertical() : Direction::from_slope(p);
          bool hit = false;
          for (const auto& d : s.directions) hit = hit || d.dir.distance(want) <= 1e-9;
          r.pass = r.pass && hit;
        }
      }
      r.detail = "count " + std::to_string(s.count()) + (s.degenerate ? ", degenerate" : "");
    } else if (f.kind == "class_count") {
      const auto c = classify_family(m, detail::fact_query(f, P));
      r.pass = static_cast<double>(c.rows.size()) == f.number("rows");
      r.detail = std::to_string(c.rows.size()) + " rows";
    } else if (f.kind == "class_boundaries") {
      const auto got = classify_family(m, detail::fact_query(f, P)).boundaries();
      auto want = f.numbers("h2", P);
      std::sort(want.begin(), want.end());
      r.pass = got.size() == want.size();
      for (std::size_t i = 0; r.pass && i < got.size(); ++i) r.pass = std::abs(got[i] - want[i]) <= 1e-6;
      r.detail = "boundaries";
      for (double v : got) r.detail += " " + detail::fmt(v);
    } else {
      r.detail = "unknown fact kind";
    }
  } catch (const Error& err) {
    r.pass = false;
    r.detail = err.what();
  }
  return r;
}

inline std::vector<FactResult> check_facts(const CatalogEntry& e) {
  std::vector<FactResult> out;
  for (const auto& f : e.facts) out.push_back(check_fact(e, f));
  return out;
}

}  // namespace pgeod
