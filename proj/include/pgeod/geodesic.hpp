#pragma once

// Naturally parametrized geodesics, including the passage close to the
// parabolic set where the standard form blows up.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "pgeod/error.hpp"
#include "pgeod/level.hpp"
#include "pgeod/metric.hpp"
#include "pgeod/ode.hpp"
#include "pgeod/path.hpp"

namespace pgeod {

/// (x'', y'') from the standard form of the Euler-Lagrange equations.
inline std::pair<double, double> spray(const MetricField& m, const PhaseState& s) {
  const MetricJet j = m.jet(s.x, s.y);
  const double delta = j.delta();
  if (std::abs(delta) <= parabolic_threshold(j)) {
    throw Error(ErrorCode::DegenerateMetric, "spray undefined where Delta = 0");
  }
  const QuadraticTerms q = quadratic_terms(j, s.vx, s.vy);
  return {(j.c * q.P - j.b * q.R) / (2.0 * delta), (j.a * q.R - j.b * q.P) / (2.0 * delta)};
}

/// (2 Delta x', 2 Delta y', cP - bR, aR - bP): the spray multiplied through by 2 Delta.
inline std::array<double, 4> desingularized_field(const MetricField& m, const PhaseState& s) {
  const MetricJet j = m.jet(s.x, s.y);
  const double delta = j.delta();
  const QuadraticTerms q = quadratic_terms(j, s.vx, s.vy);
  return {2.0 * delta * s.vx, 2.0 * delta * s.vy, j.c * q.P - j.b * q.R, j.a * q.R - j.b * q.P};
}

struct IntegrationOptions {
  ode::Tolerance tol{};
  /// Half-width of the band |Delta| <= delta_switch integrated in the auxiliary parameter.
  double delta_switch = 1e-4;
  double h_min = 1e-14;
  double max_growth = 5.0;
  std::size_t max_steps = 1'000'000;
  /// Optional extra y-window, intersected with the metric's domain.
  std::optional<YDomain> window;
  /// Checked after every accepted step; true stops with user_event.
  std::function<bool(const PhaseState&)> stop_when;
};

namespace detail {

using Z = ode::Vec<5>;

inline PhaseState to_state(const Z& z) { return {z[0], z[1], z[2], z[3], z[4]}; }
inline Z to_vec(const PhaseState& s) { return {s.x, s.y, s.vx, s.vy, s.t}; }

/// Standard form in natural time, scaled by dir = +-1 for backward runs.
struct NaturalRhs {
  const MetricField* m;
  double dir;
  Z operator()(double, const Z& z) const {
    const MetricJet j = m->jet(z[0], z[1]);
    const double delta = j.delta();
    const QuadraticTerms q = quadratic_terms(j, z[2], z[3]);
    const double k = dir / (2.0 * delta);
    return {dir * z[2], dir * z[3], k * (j.c * q.P - j.b * q.R), k * (j.a * q.R - j.b * q.P), dir};
  }
};

/// Desingularized field with natural time carried along as dt/dsigma = g 2 Delta.
struct SigmaRhs {
  const MetricField* m;
  double g;
  Z operator()(double, const Z& z) const {
    const MetricJet j = m->jet(z[0], z[1]);
    const double delta = j.delta();
    const QuadraticTerms q = quadratic_terms(j, z[2], z[3]);
    return {g * 2.0 * delta * z[2], g * 2.0 * delta * z[3], g * (j.c * q.P - j.b * q.R),
            g * (j.a * q.R - j.b * q.P), g * 2.0 * delta};
  }
};

inline YDomain effective_domain(const MetricField& m, const std::optional<YDomain>& window, double y0) {
  YDomain d = m.component(y0);
  if (window) {
    d.lo = std::max(d.lo, window->lo);
    d.hi = std::min(d.hi, window->hi);
  }
  return d;
}

/// Positive strictly inside the domain, finite even for unbounded sides.
inline double domain_gap(const YDomain& d, double y) {
  double g = std::numeric_limits<double>::max();
  if (std::isfinite(d.lo)) g = std::min(g, y - d.lo);
  if (std::isfinite(d.hi)) g = std::min(g, d.hi - y);
  return g;
}

struct Event {
  StopReason reason;
  ode::Step<5> at;
  bool enter_band = false;
};

}  // namespace detail

/// Integrates the geodesic through s0 up to natural time t_max (t_max may lie
/// before s0.t for a backward run).
inline GeodesicPath integrate_natural(const MetricField& m, const PhaseState& s0, double t_max,
                                      const IntegrationOptions& opts = {}) {
  using detail::Z;
  const YDomain dom = detail::effective_domain(m, opts.window, s0.y);
  if (!std::isfinite(s0.x) || !std::isfinite(s0.y) || !dom.contains(s0.y)) {
    throw Error(ErrorCode::InvalidStart, "start point outside the domain");
  }
  if (!std::isfinite(s0.vx) || !std::isfinite(s0.vy) || (s0.vx == 0.0 && s0.vy == 0.0)) {
    throw Error(ErrorCode::InvalidStart, "start velocity must be finite and nonzero");
  }

  GeodesicPath path;
  path.samples.push_back(s0);
  const double dir = t_max >= s0.t ? 1.0 : -1.0;

  auto delta_of = [&](const Z& z) { return m.jet(z[0], z[1]).delta(); };
  auto gap = [&](const Z& z) { return detail::domain_gap(dom, z[1]); };
  auto band_gap = [&](const Z& z) { return std::abs(delta_of(z)) - opts.delta_switch; };
  auto para_gap = [&](const Z& z) {
    const MetricJet j = m.jet(z[0], z[1]);
    return std::abs(j.delta()) - parabolic_threshold(j);
  };

  ode::StepControl ctl;
  ctl.tol = opts.tol;
  ctl.h_min = opts.h_min;
  ctl.max_growth = opts.max_growth;
  auto nat = ode::make_stepper<5>(detail::NaturalRhs{&m, dir}, ctl);

  Z z = detail::to_vec(s0);
  if (para_gap(z) <= 0.0) {
    path.stop_reason = StopReason::hit_parabolic_set;
    path.type_tag = curve_type(m, path);
    return path;
  }

  bool in_band = band_gap(z) <= 0.0;
  double sigma_sign = delta_of(z) >= 0.0 ? dir : -dir;
  std::optional<ode::Stepper<5, detail::SigmaRhs>> sig;
  auto enter_sigma = [&] {
    sigma_sign = delta_of(z) >= 0.0 ? dir : -dir;
    sig.emplace(detail::SigmaRhs{&m, sigma_sign}, ctl);
    in_band = true;
  };
  if (in_band) enter_sigma();

  auto push = [&](const Z& zz) {
    if (detail::to_state(zz).t != path.samples.back().t) path.samples.push_back(detail::to_state(zz));
  };

  std::optional<StopReason> stop;
  std::size_t steps = 0;
  while (!stop) {
    if (++steps > opts.max_steps) {
      stop = StopReason::step_underflow;
      break;
    }
    if (!in_band) {
      const double remaining = std::abs(t_max - z[4]);
      if (remaining <= 0.0) {
        stop = StopReason::reached_tmax;
        break;
      }
      const auto step = nat.advance(0.0, z, remaining);
      if (!step) {
        stop = StopReason::step_underflow;
        break;
      }
      const Z& zn = step->y;
      std::optional<detail::Event> ev;
      auto consider = [&](StopReason r, auto&& g, bool band) {
        if (g(zn) > 0.0) return;
        const auto at = nat.locate(0.0, z, step->h, g);
        if (!ev || at.h < ev->at.h) ev = detail::Event{r, at, band};
      };
      consider(StopReason::hit_domain_boundary, gap, false);
      consider(StopReason::hit_parabolic_set, band_gap, true);
      if (ev) {
        z = ev->at.y;
        push(z);
        if (ev->enter_band) {
          enter_sigma();
        } else {
          stop = ev->reason;
        }
        continue;
      }
      z = zn;
      z[4] = step->h >= remaining ? t_max : z[4];
      push(z);
      if (step->h >= remaining) stop = StopReason::reached_tmax;
    } else {
      const auto step = sig->advance(0.0, z);
      if (!step) {
        stop = band_gap(z) <= 0.0 ? StopReason::hit_parabolic_set : StopReason::step_underflow;
        break;
      }
      const Z& zn = step->y;
      const double sign0 = delta_of(z) >= 0.0 ? 1.0 : -1.0;
      auto tmax_gap = [&](const Z& zz) { return dir * (t_max - zz[4]); };
      auto same_side = [&](const Z& zz) { return sign0 * delta_of(zz); };
      std::optional<detail::Event> ev;
      auto consider = [&](StopReason r, auto&& g) {
        if (g(zn) > 0.0) return;
        const auto at = sig->locate(0.0, z, step->h, g);
        if (!ev || at.h < ev->at.h) ev = detail::Event{r, at, false};
      };
      consider(StopReason::hit_domain_boundary, gap);
      consider(StopReason::reached_tmax, tmax_gap);
      consider(StopReason::hit_parabolic_set, para_gap);
      consider(StopReason::hit_parabolic_set, same_side);
      if (ev) {
        z = ev->at.y;
        if (ev->reason == StopReason::reached_tmax) z[4] = t_max;
        push(z);
        stop = ev->reason;
        break;
      }
      z = zn;
      push(z);
      // Leave the band with some hysteresis to avoid chattering at its edge.
      if (std::abs(delta_of(z)) > 2.0 * opts.delta_switch) {
        in_band = false;
        nat.reset_step();
      }
    }
    if (!stop && opts.stop_when && opts.stop_when(path.samples.back())) stop = StopReason::user_event;
  }
  path.stop_reason = *stop;
  path.type_tag = curve_type(m, path);
  return path;
}

/// Integral curve of the desingularized field over sigma in [0, sigma_max],
/// with natural time accumulated through dt = 2 Delta dsigma. No events
/// other than the domain boundary are handled.
inline GeodesicPath integrate_desingularized(const MetricField& m, const PhaseState& s0, double sigma_max,
                                             const IntegrationOptions& opts = {}) {
  using detail::Z;
  const YDomain dom = detail::effective_domain(m, opts.window, s0.y);
  if (!dom.contains(s0.y)) throw Error(ErrorCode::InvalidStart, "start point outside the domain");
  ode::StepControl ctl;
  ctl.tol = opts.tol;
  ctl.h_min = opts.h_min;
  ctl.max_growth = opts.max_growth;
  auto st = ode::make_stepper<5>(detail::SigmaRhs{&m, 1.0}, ctl);
  GeodesicPath path;
  path.samples.push_back(s0);
  Z z = detail::to_vec(s0);
  double sigma = 0.0;
  auto gap = [&](const Z& zz) { return detail::domain_gap(dom, zz[1]); };
  while (sigma < sigma_max) {
    const auto step = st.advance(sigma, z, sigma_max - sigma);
    if (!step) {
      path.stop_reason = StopReason::step_underflow;
      break;
    }
    if (gap(step->y) <= 0.0) {
      const auto at = st.locate(sigma, z, step->h, gap);
      path.samples.push_back(detail::to_state(at.y));
      path.stop_reason = StopReason::hit_domain_boundary;
      break;
    }
    z = step->y;
    sigma = step->h >= sigma_max - sigma ? sigma_max : step->s;
    path.samples.push_back(detail::to_state(z));
  }
  path.type_tag = curve_type(m, path);
  return path;
}

// ---------------------------------------------------------------------------
// Shooting out of special points

enum class Side { plus, minus };
enum class Branch { left, right };
enum class DiscontinuityKind { klein, grushin };

inline double side_sign(Side s) { return s == Side::plus ? 1.0 : -1.0; }
inline double branch_sign(Branch b) { return b == Branch::right ? 1.0 : -1.0; }

struct ShootOptions {
  /// Seed parameter: tau for parabolic launches, the offset in y for the
  /// Klein and Grushin lines.
  double tau0 = 1e-3;
  /// Natural time to integrate after the seed.
  double t_max = 10.0;
  /// For y-only metrics, move the seed slope onto the energy level of the
  /// launch so that the shot stays on one level exactly.
  bool snap_to_level = true;
  /// Coordinates start at the scale tau0^3, so the absolute tolerance
  /// defaults far below the relative one.
  IntegrationOptions integ = [] {
    IntegrationOptions o;
    o.tol.abs = 1e-15;
    return o;
  }();
};

namespace detail {

/// Among the level slopes at (x, y), the one closest to the given direction.
inline std::optional<Direction> snap_direction(const MetricField& m, double x, double y, double h2,
                                               const Direction& near) {
  if (m.symmetry != Symmetry::y_only) return std::nullopt;
  const auto roots = level_slopes(m.jet(x, y), h2);
  std::optional<Direction> best;
  for (const auto& r : roots) {
    if (!best || r.dir.distance(near) < best->distance(near)) best = r.dir;
  }
  return best;
}

/// Rescales (vx, vy) to the snapped direction, keeping the sign of the
/// dominant component.
inline void apply_direction(PhaseState& s, const Direction& d) {
  const auto [ux, uy] = d.unit_vector();
  const double speed = std::hypot(s.vx, s.vy);
  const double orient = std::abs(s.vy) >= std::abs(s.vx) ? (s.vy * uy >= 0 ? 1.0 : -1.0)
                                                         : (s.vx * ux >= 0 ? 1.0 : -1.0);
  // Keep the y-velocity magnitude, which fixes the natural-time scale of the seed.
  if (std::abs(uy) > 1e-300) {
    const double k = std::abs(s.vy) / std::abs(uy);
    s.vx = orient * k * ux;
    s.vy = orient * k * uy;
  } else {
    s.vx = orient * speed * ux;
    s.vy = 0.0;
  }
}

}  // namespace detail

/// Seed state of a parabolic launch: x = x0 + sgn alpha tau^3, y = y0 +- tau^2,
/// t = tau^3, so that dy/dtau = +-2 tau exactly.
inline PhaseState parabolic_seed(const MetricField& m, Point q0, double alpha, Side side, Branch branch,
                                 const ShootOptions& opts) {
  const MetricJet j = m.jet(q0);
  const double scale = std::max({std::abs(j.a), std::abs(j.b), std::abs(j.c), 1e-300});
  if (!(j.a > 0.0) || std::abs(j.b) > 1e-10 * scale || std::abs(j.c) > 1e-10 * scale) {
    throw Error(ErrorCode::NotNormalized, "parabolic launch needs a > 0 and b = c = 0 at the point");
  }
  const PointClass pc = classify_parabolic(m, q0);
  if (!pc.transverse.value_or(false)) throw Error(ErrorCode::NotTransverse, "parabolic point is not transverse");

  const double tau = opts.tau0;
  const double Y = side_sign(side);
  const double sgn = branch_sign(branch);
  PhaseState s;
  s.x = q0.x + sgn * alpha * tau * tau * tau;
  s.y = q0.y + Y * tau * tau;
  s.t = tau * tau * tau;
  s.vx = sgn * alpha;
  s.vy = Y * 2.0 / (3.0 * tau);

  if (opts.snap_to_level && m.symmetry == Symmetry::y_only) {
    const double h2 = parabolic_launch_h2(j.a, j.dc.dy, alpha, Y);
    if (h2 == 0.0) {
      s.vx = 0.0;
    } else {
      const Direction lead = Direction::from_inverse_slope(s.vx / s.vy);
      if (auto d = detail::snap_direction(m, s.x, s.y, h2, lead)) detail::apply_direction(s, *d);
    }
  }
  return s;
}

/// Geodesic leaving the transverse parabolic point q0 along the semicubic
/// branch with parameter alpha. alpha = 0 gives the vertical half-line.
inline GeodesicPath shoot_from_parabolic(const MetricField& m, Point q0, double alpha, Side side, Branch branch,
                                         const ShootOptions& opts = {}) {
  const PhaseState s = parabolic_seed(m, q0, alpha, side, branch, opts);
  return integrate_natural(m, s, s.t + opts.t_max, opts.integ);
}

/// Seed on the curve x = x0 + alpha (y - y0)^k (k = 2 Klein, k = 3 Grushin) at
/// distance tau0 from the line, moving away from it with |L| = 1.
inline PhaseState discontinuity_seed(const MetricField& m, Point q0, double alpha, Side side, DiscontinuityKind kind,
                                     const ShootOptions& opts) {
  const double Y = side_sign(side);
  const double eta = Y * opts.tau0;
  const int k = kind == DiscontinuityKind::klein ? 2 : 3;
  const double dxdy = k * alpha * std::pow(eta, k - 1);
  PhaseState s;
  s.x = q0.x + alpha * std::pow(eta, k);
  s.y = q0.y + eta;
  s.t = 0.0;
  s.vx = Y * dxdy;
  s.vy = Y;
  if (opts.snap_to_level && m.symmetry == Symmetry::y_only) {
    const double h2 = (kind == DiscontinuityKind::klein ? 4.0 : 9.0) * alpha * alpha;
    const Direction lead = Direction::from_inverse_slope(dxdy);
    if (alpha == 0.0) {
      s.vx = 0.0;
    } else if (auto d = detail::snap_direction(m, s.x, s.y, h2, lead)) {
      detail::apply_direction(s, *d);
    }
  }
  const MetricJet j = m.jet(s.x, s.y);
  const double L = std::abs(j.form(s.vx, s.vy));
  if (L > 0.0 && std::isfinite(L)) {
    const double r = 1.0 / std::sqrt(L);
    s.vx *= r;
    s.vy *= r;
  }
  return s;
}

/// Geodesic leaving a point of a Klein or Grushin discontinuity line.
inline GeodesicPath shoot_from_discontinuity(const MetricField& m, Point q0, double alpha, Side side,
                                             DiscontinuityKind kind, const ShootOptions& opts = {}) {
  const PhaseState s = discontinuity_seed(m, q0, alpha, side, kind, opts);
  return integrate_natural(m, s, s.t + opts.t_max, opts.integ);
}

namespace detail {

/// x as a function of y on the leading stretch of the path where y is
/// strictly monotone.
struct MonotoneGraph {
  std::vector<double> ys, xs;
  bool increasing = true;

  explicit MonotoneGraph(const GeodesicPath& p) {
    if (p.size() < 2) return;
    increasing = p.samples[1].y > p.samples[0].y;
    ys.push_back(p.samples[0].y);
    xs.push_back(p.samples[0].x);
    for (std::size_t i = 1; i < p.size(); ++i) {
      const double y = p.samples[i].y;
      if (increasing ? !(y > ys.back()) : !(y < ys.back())) break;
      ys.push_back(y);
      xs.push_back(p.samples[i].x);
    }
  }

  double lo() const { return increasing ? ys.front() : ys.back(); }
  double hi() const { return increasing ? ys.back() : ys.front(); }

  /// Cubic Hermite-free interpolation: linear in y between samples.
  double x_at(double y) const {
    auto idx = [&](std::size_t i) { return increasing ? i : ys.size() - 1 - i; };
    std::size_t lo_i = 0, hi_i = ys.size() - 1;
    while (hi_i - lo_i > 1) {
      const std::size_t mid = (lo_i + hi_i) / 2;
      if (ys[idx(mid)] <= y) {
        lo_i = mid;
      } else {
        hi_i = mid;
      }
    }
    const double y0 = ys[idx(lo_i)], y1 = ys[idx(hi_i)];
    const double x0 = xs[idx(lo_i)], x1 = xs[idx(hi_i)];
    if (y1 == y0) return x0;
    return x0 + (x1 - x0) * (y - y0) / (y1 - y0);
  }
};

}  // namespace detail

/// Largest |x1(y) - x2(y)| between the shots seeded at tau0 and tau0/2, over
/// eight ordinates inside the range both cover before turning. Each shot is
/// stopped exactly at the ordinate through the domain-boundary event, so no
/// interpolation error enters the comparison.
inline double shooting_consistency(const MetricField& m, Point q0, double alpha, Side side, Branch branch,
                                   ShootOptions opts = {}) {
  ShootOptions half = opts;
  half.tau0 *= 0.5;
  const detail::MonotoneGraph g1(shoot_from_parabolic(m, q0, alpha, side, branch, opts));
  const detail::MonotoneGraph g2(shoot_from_parabolic(m, q0, alpha, side, branch, half));
  if (g1.ys.size() < 2 || g2.ys.size() < 2) throw Error(ErrorCode::InsufficientSamples, "shots too short");
  const double Y = side_sign(side);
  const double reach = std::min(std::abs(g1.ys.back() - q0.y), std::abs(g2.ys.back() - q0.y));
  const double start = 4.0 * opts.tau0 * opts.tau0;
  if (!(reach > 2.0 * start)) throw Error(ErrorCode::InsufficientSamples, "shots too short");

  auto x_at = [&](const ShootOptions& o, double y) {
    ShootOptions stop = o;
    YDomain w;
    if (Y > 0) {
      w.hi = y;
    } else {
      w.lo = y;
    }
    stop.integ.window = w;
    const GeodesicPath p = shoot_from_parabolic(m, q0, alpha, side, branch, stop);
    if (p.stop_reason != StopReason::hit_domain_boundary) {
      throw Error(ErrorCode::InsufficientSamples, "shot turned before the comparison ordinate");
    }
    return p.back().x;
  };
  double worst = 0.0;
  constexpr int kLevels = 8;
  for (int k = 1; k <= kLevels; ++k) {
    // Stay clear of the turning point, where x(y) has a vertical tangent.
    const double y = q0.y + Y * (start + (0.9 * reach - start) * k / kLevels);
    worst = std::max(worst, std::abs(x_at(opts, y) - x_at(half, y)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Behavior at the endpoint

struct FiniteTimeResult {
  bool finite = false;
  /// Extrapolated natural time at q0 (NaN when not finite).
  double t_arrival = std::numeric_limits<double>::quiet_NaN();
  /// Mean ratio of successive time increments over halving distance shells.
  double ratio = std::numeric_limits<double>::quiet_NaN();
  int shells = 0;
};

/// Ratio test on the natural time needed to cross the distance shells
/// d_k = d_0 2^-k around q0. Convergent increments (ratio < 0.9) mean the
/// path reaches q0 in finite time. The end of the path closer to q0 is used.
inline FiniteTimeResult finite_time_check(const GeodesicPath& path, Point q0) {
  FiniteTimeResult res;
  if (path.size() < 3) return res;
  std::vector<double> d(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    d[i] = std::hypot(path.samples[i].x - q0.x, path.samples[i].y - q0.y);
  }
  // Walk outward from the near end while the distance keeps growing.
  const bool near_front = d.front() < d.back();
  std::vector<double> dist, time;
  const std::size_t n = path.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = near_front ? k : n - 1 - k;
    if (!dist.empty() && !(d[i] > dist.back())) break;
    dist.push_back(d[i]);
    time.push_back(path.samples[i].t);
  }
  if (dist.size() < 3 || !(dist.front() > 0.0)) return res;

  auto t_at = [&](double r) {
    const auto it = std::lower_bound(dist.begin(), dist.end(), r);
    if (it == dist.begin()) return time.front();
    if (it == dist.end()) return time.back();
    const std::size_t i = static_cast<std::size_t>(it - dist.begin());
    const double w = (r - dist[i - 1]) / (dist[i] - dist[i - 1]);
    return time[i - 1] + w * (time[i] - time[i - 1]);
  };

  std::vector<double> shell_t;
  for (double r = dist.back(); r >= dist.front(); r *= 0.5) shell_t.push_back(t_at(r));
  res.shells = static_cast<int>(shell_t.size());
  if (shell_t.size() < 6) return res;

  std::vector<double> inc;
  for (std::size_t k = 1; k < shell_t.size(); ++k) inc.push_back(std::abs(shell_t[k] - shell_t[k - 1]));
  const std::size_t use = std::min<std::size_t>(4, inc.size() - 1);
  double sum = 0.0;
  int cnt = 0;
  for (std::size_t k = inc.size() - use; k < inc.size(); ++k) {
    if (inc[k - 1] <= 0.0) continue;
    sum += inc[k] / inc[k - 1];
    ++cnt;
  }
  if (cnt == 0) return res;
  res.ratio = sum / cnt;
  res.finite = res.ratio < 0.9;
  if (res.finite) {
    const double toward = shell_t.back() - shell_t[shell_t.size() - 2] >= 0.0 ? 1.0 : -1.0;
    res.t_arrival = shell_t.back() + toward * inc.back() * res.ratio / (1.0 - res.ratio);
  }
  return res;
}

/// Slope of log|y - y0| against log|x - x0| over the decade of the approach
/// closest to q0 (widened up to three decades when samples are sparse).
inline double cusp_exponent(const GeodesicPath& path, Point q0) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : path.samples) {
    const double dx = std::abs(s.x - q0.x);
    const double dy = std::abs(s.y - q0.y);
    if (dx > 0.0 && dy > 0.0 && std::isfinite(dx) && std::isfinite(dy)) pts.emplace_back(dx, dy);
  }
  if (pts.empty()) throw Error(ErrorCode::InsufficientSamples, "path never leaves the vertical through q0");
  const double dmin = std::min_element(pts.begin(), pts.end())->first;
  for (double decades = 1.0; decades <= 3.0; decades += 1.0) {
    const double dmax = dmin * std::pow(10.0, decades);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [dx, dy] : pts) {
      if (dx > dmax) continue;
      const double lx = std::log(dx), ly = std::log(dy);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    if (n < 4) continue;
    const double den = n * sxx - sx * sx;
    if (std::abs(den) <= 1e-12 * std::max(1.0, n * sxx)) continue;
    return (n * sxy - sx * sy) / den;
  }
  throw Error(ErrorCode::InsufficientSamples, "fewer than four samples near the endpoint");
}

}  // namespace pgeod
