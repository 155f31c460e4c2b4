#pragma once

// Metrics whose coefficients depend on y only: the energy integral, the
// implicit first-order equation of each level, turning points, and the
// classification of whole launch families by level.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pgeod/error.hpp"
#include "pgeod/geodesic.hpp"
#include "pgeod/level.hpp"
#include "pgeod/metric.hpp"

namespace pgeod {

enum class LevelType { timelike, spacelike, isotropic };

inline const char* to_string(LevelType t) {
  switch (t) {
    case LevelType::timelike: return "timelike";
    case LevelType::spacelike: return "spacelike";
    case LevelType::isotropic: return "isotropic";
  }
  return "?";
}

/// Signed h^2: negative on spacelike levels, +inf on the isotropic one.
/// h^2 = 0 sits on both sides of the convention and is tagged timelike.
struct EnergyLevel {
  double h2 = 0.0;
  LevelType type = LevelType::timelike;

  static EnergyLevel of(double h2) {
    if (std::isinf(h2)) return {kInf, LevelType::isotropic};
    return {h2, h2 < 0.0 ? LevelType::spacelike : LevelType::timelike};
  }
  bool isotropic() const { return type == LevelType::isotropic; }
};

namespace detail {

inline void require_y_only(const MetricField& m) {
  if (m.symmetry != Symmetry::y_only) {
    throw Error(ErrorCode::AssumptionViolated, "metric '" + m.name + "' depends on x");
  }
}

inline double a_of(const MetricField& m, double y) { return m.a(0.0, y); }
inline double da_of(const MetricField& m, double y) { return m.jet(0.0, y).da.dy; }
inline double delta_of(const MetricField& m, double y) { return m.jet(0.0, y).delta(); }

}  // namespace detail

/// h^2 of the level through (y, p). Isotropic directions have no finite
/// level and raise IsotropicJet.
inline EnergyLevel energy(const MetricField& m, double y, const Direction& d) {
  detail::require_y_only(m);
  const double h2 = signed_h2(m.jet(0.0, y), d);
  if (std::isinf(h2)) throw Error(ErrorCode::IsotropicJet, "isotropic direction: h2 = inf");
  return EnergyLevel::of(h2);
}

inline EnergyLevel energy(const MetricField& m, double y, double p) { return energy(m, y, Direction::from_slope(p)); }

/// Slopes p of the level's first-order equation at height y.
inline std::vector<ProjectiveRoot> implicit_ode_roots(const MetricField& m, double y, const EnergyLevel& level) {
  detail::require_y_only(m);
  return level_slopes(m.jet(0.0, y), level.h2);
}

// ---------------------------------------------------------------------------
// One-dimensional scans

inline constexpr int kDefaultGrid = 4096;

namespace detail {

/// Maps u in [0, 1] onto [lo, hi]; infinite ends are reached at u = 0 or 1.
inline double map_unit(double lo, double hi, double u) {
  const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
  if (flo && fhi) return u >= 1.0 ? hi : lo + (hi - lo) * u;
  if (flo) {
    if (u >= 1.0) return kInf;
    return lo + std::max(1.0, std::abs(lo)) * u / (1.0 - u);
  }
  if (fhi) {
    if (u <= 0.0) return -kInf;
    return hi - std::max(1.0, std::abs(hi)) * (1.0 - u) / u;
  }
  if (u <= 0.0) return -kInf;
  if (u >= 1.0) return kInf;
  return std::tan(std::numbers::pi * (u - 0.5));
}

template <class F>
double bisect(F&& f, double lo, double hi, double flo, double tol = 1e-12) {
  for (int i = 0; i < 200 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Sampled values of a scalar function over [lo, hi]. Samples that are not
/// finite, or that fall on an excluded end, are stored as NaN.
struct Grid {
  std::vector<double> y;
  std::vector<double> f;

  template <class F>
  static Grid sample(F&& fn, double lo, double hi, int n, bool include_lo, bool include_hi) {
    Grid g;
    g.y.resize(n + 1);
    g.f.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double y = map_unit(lo, hi, static_cast<double>(k) / n);
      g.y[k] = y;
      const bool excluded = (k == 0 && !include_lo) || (k == n && !include_hi) || !std::isfinite(y);
      const double v = excluded ? kNaN : fn(y);
      g.f[k] = std::isfinite(v) ? v : kNaN;
    }
    return g;
  }

  /// Zeros of f - shift: exact grid zeros plus bisected sign changes.
  template <class F>
  std::vector<double> zeros(F&& fn, double shift = 0.0) const {
    std::vector<double> out;
    auto g = [&](double y) { return fn(y) - shift; };
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (std::isnan(f[k])) continue;
      const double v = f[k] - shift;
      if (v == 0.0) {
        out.push_back(y[k]);
        continue;
      }
      if (k + 1 < y.size() && !std::isnan(f[k + 1])) {
        const double w = f[k + 1] - shift;
        if (w != 0.0 && (v > 0.0) != (w > 0.0)) out.push_back(bisect(g, y[k], y[k + 1], v));
      }
    }
    return out;
  }
};

/// Splits (lo, hi) at the singular lines strictly inside it.
inline std::vector<std::pair<double, double>> components(const MetricField& m, double lo, double hi) {
  std::vector<double> cuts;
  for (double s : m.singular_lines) {
    if (s > lo && s < hi) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> out;
  double start = lo;
  for (double s : cuts) {
    out.emplace_back(start, s);
    start = s;
  }
  out.emplace_back(start, hi);
  return out;
}

inline bool on_singular_line(const MetricField& m, double y) {
  for (double s : m.singular_lines) {
    if (std::abs(s - y) <= 1e-12 * std::max(1.0, std::abs(y))) return true;
  }
  return false;
}

/// Critical points of a in the open interval (lo, hi), singular lines excluded.
inline std::vector<double> critical_points(const MetricField& m, double lo, double hi, int n) {
  std::vector<double> out;
  auto da = [&](double y) { return da_of(m, y); };
  for (const auto& [clo, chi] : components(m, lo, hi)) {
    const Grid g = Grid::sample(da, clo, chi, n, false, false);
    for (double y : g.zeros(da)) {
      if (std::isfinite(a_of(m, y))) out.push_back(y);
    }
  }
  return out;
}

}  // namespace detail

/// Default window for scans: the domain, or one period starting a quarter
/// period below zero for periodic metrics.
inline YDomain analysis_window(const MetricField& m) {
  if (m.y_period) return {-*m.y_period / 4.0, 3.0 * *m.y_period / 4.0};
  return m.domain;
}

/// All y in the window with a(y) = h^2, tangential roots included.
inline std::vector<double> discriminant_curve(const MetricField& m, double h2, std::optional<YDomain> window = {},
                                              int grid = kDefaultGrid) {
  detail::require_y_only(m);
  if (!std::isfinite(h2) || h2 == 0.0) return {};
  const YDomain w = window.value_or(analysis_window(m));
  std::vector<double> out;
  auto a = [&](double y) { return detail::a_of(m, y); };
  for (const auto& [lo, hi] : detail::components(m, w.lo, w.hi)) {
    const auto g = detail::Grid::sample(a, lo, hi, grid, false, false);
    for (double y : g.zeros(a, h2)) out.push_back(y);
  }
  for (double y : detail::critical_points(m, w.lo, w.hi, grid)) {
    if (std::abs(detail::a_of(m, y) - h2) <= 1e-10 * std::max(1.0, std::abs(h2))) out.push_back(y);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double u, double v) { return std::abs(u - v) <= 1e-9 * std::max(1.0, std::abs(u)); }),
            out.end());
  return out;
}

namespace detail {

/// 1e-8 times the typical size of a' over the window. The median is used
/// rather than the maximum: Klein-type coefficients blow up at the edges.
inline double eps_deriv(const MetricField& m, double lo, double hi, int grid = 512) {
  std::vector<double> v;
  for (const auto& [clo, chi] : components(m, lo, hi)) {
    auto da = [&](double y) { return std::abs(da_of(m, y)); };
    const auto g = Grid::sample(da, clo, chi, grid, false, false);
    for (double f : g.f) {
      if (!std::isnan(f)) v.push_back(f);
    }
  }
  if (v.empty()) return 1e-8;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return 1e-8 * std::max(v[v.size() / 2], 1e-300);
}

}  // namespace detail

enum class SingularSolution { horizontal_geodesic, envelope_not_geodesic };

inline const char* to_string(SingularSolution s) {
  return s == SingularSolution::horizontal_geodesic ? "horizontal_geodesic" : "envelope_not_geodesic";
}

/// Whether the line y = y_star, along which the level a(y_star) has a double
/// root p = 0, is itself a geodesic (a' = 0) or only an envelope.
inline SingularSolution singular_solution_test(const MetricField& m, double y_star,
                                               std::optional<YDomain> window = {}) {
  detail::require_y_only(m);
  YDomain w = window.value_or(m.component(y_star));
  if (!std::isfinite(w.lo)) w.lo = y_star - 1.0;
  if (!std::isfinite(w.hi)) w.hi = y_star + 1.0;
  const double eps = detail::eps_deriv(m, w.lo, w.hi);
  return std::abs(detail::da_of(m, y_star)) <= eps ? SingularSolution::horizontal_geodesic
                                                   : SingularSolution::envelope_not_geodesic;
}

struct HorizontalGeodesic {
  double y = 0.0;
  double h2 = 0.0;
};

/// Critical points of a in the window (open), away from singular lines and
/// points where a vanishes or is infinite.
inline std::vector<HorizontalGeodesic> horizontal_geodesics(const MetricField& m, std::optional<YDomain> window = {},
                                                            int grid = kDefaultGrid) {
  detail::require_y_only(m);
  const YDomain w = window.value_or(analysis_window(m));
  std::vector<HorizontalGeodesic> out;
  for (double y : detail::critical_points(m, w.lo, w.hi, grid)) {
    const double a = detail::a_of(m, y);
    if (!std::isfinite(a) || a == 0.0 || detail::on_singular_line(m, y)) continue;
    if (singular_solution_test(m, y) != SingularSolution::horizontal_geodesic) continue;
    out.push_back({y, a});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Launch constants

enum class LaunchKind { regular, parabolic, klein, grushin };

inline const char* to_string(LaunchKind k) {
  switch (k) {
    case LaunchKind::regular: return "regular";
    case LaunchKind::parabolic: return "parabolic";
    case LaunchKind::klein: return "klein";
    case LaunchKind::grushin: return "grushin";
  }
  return "?";
}

inline LaunchKind parse_launch_kind(const std::string& s) {
  if (s == "regular") return LaunchKind::regular;
  if (s == "parabolic") return LaunchKind::parabolic;
  if (s == "klein") return LaunchKind::klein;
  if (s == "grushin") return LaunchKind::grushin;
  throw Error(ErrorCode::ParseError, "unknown launch kind '" + s + "'");
}

namespace detail {

/// Data of a normalized launch line. For y-only metrics with b(y0) != 0 the
/// shear x -> x + (b0/a0) y is applied implicitly: it makes b(y0) vanish and
/// replaces c by Delta/a, and alpha is then read in the sheared coordinates.
struct LaunchData {
  double a0 = 0.0;
  double c0 = 0.0;   // regular: Delta/a at y0
  double dc0 = 0.0;  // parabolic: (Delta/a)' at y0
  double shear = 0.0;
};

inline LaunchData launch_data(const MetricField& m, double y0, LaunchKind kind, Side side) {
  require_y_only(m);
  LaunchData d;
  if (kind == LaunchKind::klein || kind == LaunchKind::grushin) {
    const double eta = 1e-6 * side_sign(side);
    const MetricJet j = m.jet(0.0, y0 + eta);
    const double v0 = j.a * eta * eta;
    const double w0 = kind == LaunchKind::klein ? j.c * eta * eta : j.c;
    if (std::abs(v0 - 1.0) > 1e-5 || std::abs(w0 - 1.0) > 1e-5 || std::abs(j.b * eta * eta) > 1e-5) {
      throw Error(ErrorCode::NotNormalized, "discontinuity line needs v(y0) = w(y0) = 1 and b = 0");
    }
    d.a0 = 1.0;
    return d;
  }
  const MetricJet j = m.jet(0.0, y0);
  if (!(j.a > 0.0)) throw Error(ErrorCode::NotNormalized, "launch needs a(y0) > 0");
  d.a0 = j.a;
  d.shear = j.b / j.a;
  d.c0 = j.delta() / j.a;
  if (kind == LaunchKind::parabolic) {
    if (std::abs(j.delta()) > 1e-8 * j.scale()) throw Error(ErrorCode::NotNormalized, "y0 is not parabolic");
    d.c0 = 0.0;
    d.dc0 = j.grad_delta().dy / j.a;
  }
  return d;
}

}  // namespace detail

/// Level of the geodesic launched from the line y = y0 with parameter alpha:
/// dx/dy for regular launches, the coefficient of the seed x = alpha tau^3
/// (parabolic), x = alpha y^2 (klein) or x = alpha y^3 (grushin).
inline EnergyLevel h_of_launch(const MetricField& m, double y0, double alpha, LaunchKind kind,
                               Side side = Side::plus) {
  const detail::LaunchData d = detail::launch_data(m, y0, kind, side);
  switch (kind) {
    case LaunchKind::regular:
      return EnergyLevel::of(regular_launch_h2(d.a0, d.c0, alpha + d.shear));
    case LaunchKind::parabolic:
      return EnergyLevel::of(parabolic_launch_h2(d.a0, d.dc0, alpha, side_sign(side)));
    case LaunchKind::klein:
      return EnergyLevel::of(4.0 * alpha * alpha);
    case LaunchKind::grushin:
      // p^{-1} = 3 alpha y^2 in the limit of H^2 = v^2/(y^2 v + w (y^2 p)^2).
      return EnergyLevel::of(9.0 * alpha * alpha);
  }
  return EnergyLevel::of(0.0);
}

/// The non-negative alpha that launches onto the level, when there is one.
/// Regular launches report alpha = inf for the level a(y0).
inline std::optional<double> alpha_for_level(const MetricField& m, double y0, double h2, LaunchKind kind,
                                             Side side = Side::plus) {
  const detail::LaunchData d = detail::launch_data(m, y0, kind, side);
  double a2 = kNaN;
  switch (kind) {
    case LaunchKind::klein:
    case LaunchKind::grushin: {
      if (!(h2 >= 0.0) || std::isinf(h2)) return std::nullopt;
      return std::sqrt(h2) / (kind == LaunchKind::klein ? 2.0 : 3.0);
    }
    case LaunchKind::regular: {
      if (std::isinf(h2)) {
        a2 = -d.c0 / d.a0;
      } else if (h2 == d.a0) {
        return kInf;
      } else {
        a2 = h2 * d.c0 / (d.a0 * (d.a0 - h2));
      }
      if (!(a2 >= 0.0)) return std::nullopt;
      return std::sqrt(a2) - d.shear;
    }
    case LaunchKind::parabolic: {
      const double c1 = 4.0 / 9.0 * d.dc0;
      const double Y = side_sign(side);
      if (std::isinf(h2)) {
        a2 = -c1 * Y / d.a0;
      } else if (h2 == d.a0) {
        return kInf;
      } else {
        a2 = h2 * c1 * Y / (d.a0 * (d.a0 - h2));
      }
      if (!(a2 >= 0.0)) return std::nullopt;
      return std::sqrt(a2);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Strips and turning points

enum class BoundKind { parabolic, singular, edge, infinite };

struct StripBound {
  double y = kInf;
  BoundKind kind = BoundKind::infinite;
};

namespace detail {

inline BoundKind bound_kind(const MetricField& m, double y) {
  if (std::isinf(y)) return BoundKind::infinite;
  if (on_singular_line(m, y)) return BoundKind::singular;
  const double a = a_of(m, y);
  if (!std::isfinite(a)) return BoundKind::edge;
  const MetricJet j = m.jet(0.0, y);
  if (std::abs(j.delta()) <= 1e-8 * std::max(j.scale(), 1e-300)) return BoundKind::parabolic;
  return BoundKind::edge;
}

}  // namespace detail

/// First parabolic line, singular line or domain edge met when moving from
/// y0 in direction dir (+1 or -1). y0 itself is never returned.
inline StripBound next_bound(const MetricField& m, double y0, double dir, int grid = kDefaultGrid) {
  const double tiny = 1e-9 * std::max(1.0, std::abs(y0));
  const YDomain comp = m.component(y0 + dir * tiny);
  double limit = dir > 0 ? comp.hi : comp.lo;
  if (m.y_period) limit = dir > 0 ? std::min(limit, y0 + *m.y_period) : std::max(limit, y0 - *m.y_period);
  const double start = y0 + dir * tiny;
  auto delta = [&](double y) { return detail::delta_of(m, y); };
  const double lo = dir > 0 ? start : limit;
  const double hi = dir > 0 ? limit : start;
  const auto g = detail::Grid::sample(delta, lo, hi, grid, true, false);
  const auto z = g.zeros(delta);
  if (!z.empty()) {
    const double y = dir > 0 ? z.front() : z.back();
    // A zero found right at the starting offset is y0 itself.
    if (std::abs(y - y0) > 10.0 * tiny) return {y, BoundKind::parabolic};
    if (z.size() > 1) return {dir > 0 ? z[1] : z[z.size() - 2], BoundKind::parabolic};
  }
  if (std::isinf(limit)) return {limit, BoundKind::infinite};
  return {limit, detail::bound_kind(m, limit)};
}

enum class ReturnCase { returns, asymptote, escapes };

inline const char* to_string(ReturnCase c) {
  switch (c) {
    case ReturnCase::returns: return "returns";
    case ReturnCase::asymptote: return "asymptote";
    case ReturnCase::escapes: return "escapes";
  }
  return "?";
}

struct ReturnAnalysis {
  double y_hat_plus = kInf;
  double y_hat_minus = -kInf;
  ReturnCase case_plus = ReturnCase::escapes;
  ReturnCase case_minus = ReturnCase::escapes;
  std::optional<double> horizontal_geodesic;
  double omega_plus = kInf;
  double omega_minus = -kInf;
  /// |a'| at the turning ordinates, for auditing the asymptote tolerance.
  double deriv_plus = kNaN;
  double deriv_minus = kNaN;
};

namespace detail {

/// Cached samples of a over one strip, for repeated level queries.
class StripContext {
 public:
  StripContext(const MetricField& m, StripBound lo, StripBound hi, int grid)
      : m_(&m), lo_(lo), hi_(hi), grid_(grid) {
    auto a = [&](double y) { return a_of(m, y); };
    a_grid_ = Grid::sample(a, lo.y, hi.y, grid, std::isfinite(lo.y), std::isfinite(hi.y));
    for (std::size_t k = 1; k + 1 < a_grid_.y.size(); ++k) {
      const double v = a_grid_.f[k];
      if (std::isnan(v) || v == 0.0) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "a vanishes or is undefined at y=%.9g", a_grid_.y[k]);
        throw Error(ErrorCode::AssumptionViolated, buf);
      }
    }
    for (double y : critical_points(m, lo.y, hi.y, grid)) crit_.push_back(y);
    eps_ = eps_deriv(m, lo.y, hi.y);
    width_ = std::isfinite(hi.y - lo.y) ? hi.y - lo.y : 1.0;
  }

  const MetricField& metric() const { return *m_; }
  StripBound lo() const { return lo_; }
  StripBound hi() const { return hi_; }
  double eps() const { return eps_; }
  double width() const { return width_; }
  const std::vector<double>& critical() const { return crit_; }

  /// Roots of a = h2 in the closed strip, tangential ones included.
  std::vector<double> roots(double h2) const {
    if (!std::isfinite(h2)) return {};
    auto a = [&](double y) { return a_of(*m_, y); };
    std::vector<double> out = a_grid_.zeros(a, h2);
    for (double y : crit_) {
      if (std::abs(a_of(*m_, y) - h2) <= 1e-10 * std::max(1.0, std::abs(h2))) out.push_back(y);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [&](double u, double v) { return std::abs(u - v) <= gap(); }),
              out.end());
    return out;
  }

  double gap() const { return 1e-9 * std::max(1.0, width_); }

  bool at_bound(double y, const StripBound& b) const {
    return std::isfinite(b.y) && std::abs(y - b.y) <= 1e-8 * std::max(1.0, std::abs(b.y));
  }

 private:
  const MetricField* m_;
  StripBound lo_, hi_;
  int grid_;
  Grid a_grid_;
  std::vector<double> crit_;
  double eps_ = 0.0;
  double width_ = 1.0;
};

/// First root strictly beyond y in direction dir that is not a strip bound.
inline std::optional<double> next_root(const StripContext& ctx, const std::vector<double>& roots, double y,
                                       double dir) {
  std::optional<double> best;
  for (double r : roots) {
    if ((r - y) * dir <= ctx.gap()) continue;
    if (ctx.at_bound(r, ctx.lo()) || ctx.at_bound(r, ctx.hi())) continue;
    if (!best || (r - *best) * dir < 0.0) best = r;
  }
  return best;
}

}  // namespace detail

/// Turning ordinates and return cases of the level through y0, on both
/// sides, inside the strip between the nearest parabolic or singular lines.
inline ReturnAnalysis turning_analysis(const MetricField& m, double y0, const EnergyLevel& level,
                                       int grid = kDefaultGrid) {
  detail::require_y_only(m);
  ReturnAnalysis r;
  const StripBound up = next_bound(m, y0, 1.0, grid);
  const StripBound down = next_bound(m, y0, -1.0, grid);
  r.omega_plus = up.y;
  r.omega_minus = down.y;
  r.y_hat_plus = up.y;
  r.y_hat_minus = down.y;
  if (level.isotropic() || level.h2 == 0.0) return r;

  auto one_side = [&](StripBound lo, StripBound hi, double dir, double& y_hat, ReturnCase& c, double& deriv) {
    const detail::StripContext ctx(m, lo, hi, grid);
    const auto roots = ctx.roots(level.h2);
    const auto root = detail::next_root(ctx, roots, y0, dir);
    if (!root) return;
    y_hat = *root;
    deriv = std::abs(detail::da_of(m, *root));
    if (deriv <= ctx.eps()) {
      c = ReturnCase::asymptote;
      r.horizontal_geodesic = *root;
    } else {
      c = ReturnCase::returns;
    }
  };
  one_side({y0, BoundKind::edge}, up, 1.0, r.y_hat_plus, r.case_plus, r.deriv_plus);
  one_side(down, {y0, BoundKind::edge}, -1.0, r.y_hat_minus, r.case_minus, r.deriv_minus);
  return r;
}

// ---------------------------------------------------------------------------
// Family classification

struct FamilyQuery {
  double y0 = 0.0;
  LaunchKind launch = LaunchKind::parabolic;
  Side side = Side::plus;
  /// Explicit strip; found from the metric when absent.
  std::optional<double> lo, hi;
  /// Parabolic launches: also launch from the opposite boundary of the strip
  /// when it is a parabolic line, covering the whole region.
  bool whole_region = false;
  int grid = kDefaultGrid;
  /// Integrate one representative per class to check that it leaves the
  /// launch line; failures mark the row unverified.
  bool verify = true;
};

struct ClassRow {
  LevelType type = LevelType::timelike;
  double h2_lo = 0.0, h2_hi = 0.0;
  bool lo_closed = false, hi_closed = false;
  std::string endpoint_1, endpoint_2;
  std::string description;
  double h2_rep = 0.0;
  double alpha_rep = kNaN;
  double launch_y = 0.0;
  Side side = Side::plus;
  bool verified = true;
  /// Smallest |a'| at a root of a = h2 for single-level rows.
  double deriv_distance = kNaN;

  bool is_point() const { return h2_lo == h2_hi; }

  std::string h2_range() const {
    auto num = [](double v) {
      if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.10g", v);
      return std::string(buf);
    };
    if (is_point()) return "h2 = " + num(h2_lo);
    return num(h2_lo) + (lo_closed ? " <= " : " < ") + "h2" + (hi_closed ? " <= " : " < ") + num(h2_hi);
  }
};

struct Classification {
  std::vector<ClassRow> rows;

  /// Finite nonzero ends of the class ranges.
  std::vector<double> boundaries() const {
    std::vector<double> out;
    for (const auto& r : rows) {
      for (double v : {r.h2_lo, r.h2_hi}) {
        if (std::isfinite(v) && v != 0.0) out.push_back(v);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double u, double v) { return std::abs(u - v) <= 1e-9 * std::max(1.0, std::abs(u)); }),
              out.end());
    return out;
  }
};

namespace detail {

enum class EndKind { boundary, asymptote, oscillation };

struct WalkEnd {
  EndKind kind = EndKind::boundary;
  double y = 0.0;
  std::string label;  // endpoint column
  std::string line;   // name of the line involved
};

inline std::string boundary_label(const StripContext& ctx, const StripBound& b, double h2) {
  const MetricField& m = ctx.metric();
  switch (b.kind) {
    case BoundKind::infinite: return "---";
    case BoundKind::parabolic: {
      const bool regular = std::isfinite(h2) && std::abs(a_of(m, b.y) - h2) <= 1e-9 * std::max(1.0, std::abs(h2));
      return std::string(regular ? "regular on " : "cusp on ") + m.line_label(b.y);
    }
    case BoundKind::singular:
    case BoundKind::edge: return "reaches " + m.line_label(b.y);
  }
  return "---";
}

/// Follows the y-motion of the level from y in direction dir. `turns` counts
/// turning points already passed; a second turn means oscillation.
inline WalkEnd walk(const StripContext& ctx, const std::vector<double>& roots, double h2, double y, double dir,
                    int turns = 0) {
  const MetricField& m = ctx.metric();
  double first_turn = y;
  for (;;) {
    const auto r = next_root(ctx, roots, y, dir);
    if (!r) {
      const StripBound b = dir > 0 ? ctx.hi() : ctx.lo();
      return {EndKind::boundary, b.y, boundary_label(ctx, b, h2), m.line_label(b.y)};
    }
    if (std::abs(da_of(m, *r)) <= ctx.eps()) return {EndKind::asymptote, *r, "---", m.line_label(*r)};
    if (++turns == 2) {
      // Name the oscillation after a critical point between the turns.
      const double lo = std::min(first_turn, *r), hi = std::max(first_turn, *r);
      std::string name;
      for (double c : ctx.critical()) {
        if (c > lo && c < hi) name = m.line_label(c);
      }
      if (name.empty()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "y=%.6g..%.6g", lo, hi);
        name = buf;
      }
      return {EndKind::oscillation, *r, "---", name};
    }
    first_turn = *r;
    y = *r;
    dir = -dir;
  }
}

struct Key {
  LevelType type;
  std::string e1, e2, description;

  bool operator==(const Key& o) const {
    return type == o.type && e1 == o.e1 && e2 == o.e2 && description == o.description;
  }
};

inline std::string describe_half(const WalkEnd& w, const std::string& from) {
  switch (w.kind) {
    case EndKind::asymptote: return "tend to the horizontal geodesic " + w.line;
    case EndKind::oscillation: return "oscillate around " + w.line;
    case EndKind::boundary:
      if (w.label == "---") return std::string("escape to ") + w.line;
      return w.line == from ? "return to " + from : "connect " + from + " and " + w.line;
  }
  return "";
}

struct Launch {
  double y = 0.0;
  Side side = Side::plus;
  LaunchKind kind = LaunchKind::parabolic;
  std::string label;  // launch endpoint for one-sided launches
  std::string line;
};

inline Key key_at(const StripContext& ctx, const Launch& L, double h2, LevelType type) {
  const auto roots = ctx.roots(h2);
  Key k{type, "", "", ""};
  if (L.kind != LaunchKind::regular) {
    const WalkEnd w = walk(ctx, roots, h2, L.y, side_sign(L.side));
    k.e1 = L.label;
    k.e2 = w.label;
    k.description = describe_half(w, L.line);
    return k;
  }
  const MetricField& m = ctx.metric();
  const bool turning_here = std::isfinite(h2) && std::abs(a_of(m, L.y) - h2) <= 1e-10 * std::max(1.0, std::abs(h2));
  WalkEnd down, up;
  if (turning_here) {
    // Launched horizontally at a turning point: both halves leave on the
    // side where the level is allowed.
    const double da = da_of(m, L.y);
    const double dir = (delta_of(m, L.y) > 0.0 ? 1.0 : -1.0) * (da > 0.0 ? 1.0 : -1.0);
    down = up = walk(ctx, roots, h2, L.y, dir, 1);
  } else {
    down = walk(ctx, roots, h2, L.y, -1.0);
    up = walk(ctx, roots, h2, L.y, 1.0);
  }
  k.e1 = down.label;
  k.e2 = up.label;
  if (down.kind == EndKind::oscillation && up.kind == EndKind::oscillation) {
    k.description = "oscillate around " + up.line;
  } else if (down.kind == EndKind::boundary && up.kind == EndKind::boundary && down.label != "---" &&
             up.label != "---") {
    k.description = down.line == up.line ? "start and end on " + up.line : "connect " + down.line + " and " + up.line;
  } else {
    k.description = describe_half(down, L.line) + "; " + describe_half(up, L.line);
  }
  return k;
}

struct Piece {
  double lo, hi;
  bool lo_closed, hi_closed;
  LevelType type;
};

/// Levels reachable from the launch, with the meridian level h2 = 0 left out
/// on Lorentzian sides and the launch line itself left out when it is a
/// horizontal geodesic.
inline std::vector<Piece> value_set(const MetricField& m, const Launch& L) {
  if (L.kind == LaunchKind::klein || L.kind == LaunchKind::grushin) {
    return {{0.0, kInf, true, false, LevelType::timelike}};
  }
  const LaunchData d = launch_data(m, L.y, L.kind, L.side);
  bool lorentzian = false;
  bool a0_included = false;
  if (L.kind == LaunchKind::parabolic) {
    lorentzian = d.dc0 * side_sign(L.side) < 0.0;
  } else {
    lorentzian = d.c0 < 0.0;
    a0_included = std::abs(da_of(m, L.y)) > eps_deriv(m, L.y - 1.0, L.y + 1.0);
  }
  if (!lorentzian) return {{0.0, d.a0, true, a0_included, LevelType::timelike}};
  return {{d.a0, kInf, a0_included, false, LevelType::timelike},
          {kInf, kInf, true, true, LevelType::isotropic},
          {-kInf, 0.0, false, false, LevelType::spacelike}};
}

inline double representative(double lo, double hi) {
  if (lo == hi) return lo;
  if (std::isinf(hi) && std::isinf(lo)) return 0.0;
  if (std::isinf(hi)) return lo + std::max(1.0, std::abs(lo));
  if (std::isinf(lo)) return hi - std::max(1.0, std::abs(hi));
  return 0.5 * (lo + hi);
}

struct LevelClass {
  Piece range;
  Key key;
};

/// Splits a value-set piece at the candidate levels and at any key change
/// found by sampling, then evaluates the key on every resulting piece.
inline std::vector<LevelClass> scan_piece(const StripContext& ctx, const Launch& L, const Piece& p,
                                          const std::vector<double>& candidates) {
  std::vector<LevelClass> out;
  if (p.type == LevelType::isotropic) {
    out.push_back({p, key_at(ctx, L, kInf, p.type)});
    return out;
  }
  std::vector<double> cuts;
  auto near = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(1.0, std::abs(u)); };
  for (double c : candidates) {
    // a(pi) = 1 + 1e-16 on the sphere must not split off a sliver above 1.
    if (c > p.lo && c < p.hi && !near(c, p.lo) && !near(c, p.hi)) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), near), cuts.end());
  auto point = [&](double v) { out.push_back({{v, v, true, true, p.type}, key_at(ctx, L, v, p.type)}); };
  auto open = [&](double lo, double hi) {
    // Sample for key changes the candidate list did not predict.
    constexpr int kSamples = 8;
    std::vector<double> s;
    for (int i = 1; i <= kSamples; ++i) {
      const double u = static_cast<double>(i) / (kSamples + 1);
      double v = 0.0;
      if (std::isfinite(lo) && std::isfinite(hi)) {
        v = lo + (hi - lo) * u;
      } else if (std::isfinite(lo)) {
        v = lo + std::max(1.0, std::abs(lo)) * u / (1.0 - u) * 4.0;
      } else {
        v = hi - std::max(1.0, std::abs(hi)) * u / (1.0 - u) * 4.0;
      }
      s.push_back(v);
    }
    std::sort(s.begin(), s.end());
    double start = lo;
    Key current = key_at(ctx, L, s.front(), p.type);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const Key next = key_at(ctx, L, s[i], p.type);
      if (next == current) continue;
      double a = s[i - 1], b = s[i];
      while (b - a > 1e-9 * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (a + b);
        if (key_at(ctx, L, mid, p.type) == current) {
          a = mid;
        } else {
          b = mid;
        }
      }
      const double edge = 0.5 * (a + b);
      out.push_back({{start, edge, false, false, p.type}, current});
      point(edge);
      start = edge;
      current = next;
    }
    out.push_back({{start, hi, false, false, p.type}, current});
  };

  if (p.lo_closed) point(p.lo);
  double start = p.lo;
  for (double c : cuts) {
    open(start, c);
    point(c);
    start = c;
  }
  open(start, p.hi);
  if (p.hi_closed && p.hi != p.lo) point(p.hi);
  return out;
}

/// Merges neighbours with equal keys into closed or open ranges.
inline std::vector<LevelClass> merge(const std::vector<LevelClass>& in) {
  std::vector<LevelClass> out;
  for (const auto& c : in) {
    if (!out.empty() && out.back().key == c.key && out.back().range.hi == c.range.lo) {
      out.back().range.hi = c.range.hi;
      out.back().range.hi_closed = c.range.hi_closed;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

inline bool same_class(const ClassRow& a, const ClassRow& b) {
  auto eq = [](double u, double v) {
    return u == v || std::abs(u - v) <= 1e-9 * std::max(1.0, std::abs(u));
  };
  const bool ends = (a.endpoint_1 == b.endpoint_1 && a.endpoint_2 == b.endpoint_2) ||
                    (a.endpoint_1 == b.endpoint_2 && a.endpoint_2 == b.endpoint_1);
  return a.type == b.type && ends && eq(a.h2_lo, b.h2_lo) && eq(a.h2_hi, b.h2_hi) && a.lo_closed == b.lo_closed &&
         a.hi_closed == b.hi_closed;
}

/// Integrates the class representative and checks that it leaves the launch
/// line instead of creeping along it.
inline bool leaves_launch_line(const MetricField& m, const Launch& L, double alpha, double width) {
  try {
    GeodesicPath path;
    ShootOptions so;
    so.t_max = 10.0;
    so.integ.max_steps = 200000;
    switch (L.kind) {
      case LaunchKind::parabolic:
        path = shoot_from_parabolic(m, {0.0, L.y}, alpha, L.side, Branch::right, so);
        break;
      case LaunchKind::klein:
      case LaunchKind::grushin:
        path = shoot_from_discontinuity(m, {0.0, L.y}, alpha, L.side,
                                        L.kind == LaunchKind::klein ? DiscontinuityKind::klein
                                                                    : DiscontinuityKind::grushin,
                                        so);
        break;
      case LaunchKind::regular: {
        const PhaseState s0 = std::isinf(alpha) ? PhaseState{0.0, L.y, 1.0, 0.0, 0.0}
                                                : PhaseState{0.0, L.y, alpha, 1.0, 0.0};
        IntegrationOptions io;
        io.max_steps = 200000;
        path = integrate_natural(m, s0, 10.0, io);
        if (std::isinf(alpha)) return true;
        break;
      }
    }
    double far = 0.0;
    for (const auto& s : path.samples) far = std::max(far, std::abs(s.y - L.y));
    return far >= 1e-2 * std::min(1.0, width);
  } catch (const Error&) {
    return false;
  }
}

inline std::vector<ClassRow> classify_launch(const MetricField& m, const Launch& L, StripBound lo, StripBound hi,
                                             const FamilyQuery& q) {
  const StripContext ctx(m, lo, hi, q.grid);
  std::vector<double> candidates;
  for (double c : ctx.critical()) candidates.push_back(a_of(m, c));
  for (const StripBound& b : {lo, hi}) {
    if (std::isfinite(b.y)) {
      const double a = a_of(m, b.y);
      if (std::isfinite(a)) candidates.push_back(a);
    }
  }
  std::vector<ClassRow> rows;
  for (const Piece& p : value_set(m, L)) {
    for (const auto& c : merge(scan_piece(ctx, L, p, candidates))) {
      ClassRow r;
      r.type = c.range.type;
      r.h2_lo = c.range.lo;
      r.h2_hi = c.range.hi;
      r.lo_closed = c.range.lo_closed;
      r.hi_closed = c.range.hi_closed;
      r.endpoint_1 = c.key.e1;
      r.endpoint_2 = c.key.e2;
      r.description = c.key.description;
      r.h2_rep = c.range.type == LevelType::isotropic ? kInf : representative(r.h2_lo, r.h2_hi);
      r.launch_y = L.y;
      r.side = L.side;
      if (const auto a = alpha_for_level(m, L.y, r.h2_rep, L.kind, L.side)) r.alpha_rep = *a;
      if (r.is_point() && std::isfinite(r.h2_lo)) {
        for (double y : ctx.roots(r.h2_lo)) {
          const double d = std::abs(da_of(m, y));
          if (std::isnan(r.deriv_distance) || d < r.deriv_distance) r.deriv_distance = d;
        }
      }
      if (q.verify) {
        r.verified = !std::isnan(r.alpha_rep) && leaves_launch_line(m, L, r.alpha_rep, ctx.width());
        if (!r.verified) r.description = "unverified: " + r.description;
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline Launch make_launch(const MetricField& m, double y, Side side, LaunchKind kind) {
  Launch L;
  L.y = y;
  L.side = side;
  L.kind = kind;
  L.line = m.line_label(y);
  L.label = kind == LaunchKind::parabolic ? "cusp on " + L.line : "reaches " + L.line;
  return L;
}

}  // namespace detail

/// Partitions the levels of a launch family into maximal ranges on which
/// both ends of the geodesics behave the same way. Rows list timelike
/// ranges in increasing order, then the isotropic and spacelike ones.
inline Classification classify_family(const MetricField& m, const FamilyQuery& q) {
  detail::require_y_only(m);
  auto explicit_bound = [&](double y) { return StripBound{y, detail::bound_kind(m, y)}; };
  Classification out;
  if (q.launch == LaunchKind::regular) {
    const StripBound lo = q.lo ? explicit_bound(*q.lo) : next_bound(m, q.y0, -1.0, q.grid);
    const StripBound hi = q.hi ? explicit_bound(*q.hi) : next_bound(m, q.y0, 1.0, q.grid);
    const detail::Launch L = detail::make_launch(m, q.y0, q.side, q.launch);
    out.rows = detail::classify_launch(m, L, lo, hi, q);
    return out;
  }
  const double dir = side_sign(q.side);
  const StripBound start{q.y0, q.launch == LaunchKind::parabolic ? BoundKind::parabolic : BoundKind::singular};
  StripBound far = next_bound(m, q.y0, dir, q.grid);
  if (dir > 0 && q.hi) far = explicit_bound(*q.hi);
  if (dir < 0 && q.lo) far = explicit_bound(*q.lo);
  const StripBound lo = dir > 0 ? start : far;
  const StripBound hi = dir > 0 ? far : start;
  out.rows = detail::classify_launch(m, detail::make_launch(m, q.y0, q.side, q.launch), lo, hi, q);

  if (q.whole_region && q.launch == LaunchKind::parabolic && far.kind == BoundKind::parabolic) {
    const Side back = q.side == Side::plus ? Side::minus : Side::plus;
    for (auto& r : detail::classify_launch(m, detail::make_launch(m, far.y, back, q.launch), lo, hi, q)) {
      bool dup = false;
      for (const auto& e : out.rows) dup = dup || detail::same_class(e, r);
      if (!dup) out.rows.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace pgeod
