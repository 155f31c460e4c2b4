#pragma once

// The geodesic flow lifted to the bundle of tangent directions, and the
// admissible directions at parabolic points.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pgeod/error.hpp"
#include "pgeod/geodesic.hpp"
#include "pgeod/metric.hpp"
#include "pgeod/ode.hpp"

namespace pgeod {

struct JetPoint {
  double x = 0.0;
  double y = 0.0;
  Direction dir;
};

struct JetSample {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  Direction dir;
};

struct JetPath {
  std::vector<JetSample> samples;
  StopReason stop_reason = StopReason::reached_tmax;
};

/// Coefficients of M(p) = mu3 p^3 + mu2 p^2 + mu1 p + mu0.
struct MuCoefficients {
  double mu0 = 0.0, mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;

  double eval(double p) const { return ((mu3 * p + mu2) * p + mu1) * p + mu0; }
  /// q^3 M(1/q), the cubic seen from the inverted chart.
  double eval_inverted(double q) const { return ((mu0 * q + mu1) * q + mu2) * q + mu3; }
  double scale() const { return std::max({std::abs(mu0), std::abs(mu1), std::abs(mu2), std::abs(mu3)}); }
};

inline MuCoefficients mu_coefficients(const MetricJet& j) {
  const double a = j.a, b = j.b, c = j.c;
  const double ax = j.da.dx, ay = j.da.dy, bx = j.db.dx, by = j.db.dy, cx = j.dc.dx, cy = j.dc.dy;
  MuCoefficients mu;
  mu.mu3 = c * (2.0 * by - cx) - b * cy;
  mu.mu2 = b * (2.0 * by - 3.0 * cx) + 2.0 * ay * c - a * cy;
  mu.mu1 = b * (3.0 * ay - 2.0 * bx) + ax * c - 2.0 * a * cx;
  mu.mu0 = a * (ay - 2.0 * bx) + ax * b;
  return mu;
}

inline MuCoefficients mu_coefficients(const MetricField& m, Point q) { return mu_coefficients(m.jet(q)); }

/// The lifted field in the chart of j: (2 Delta, 2 Delta p, M(p)) in the
/// affine chart and (2 Delta q, 2 Delta, -q^3 M(1/q)) in the inverted one.
/// The inverted form is q times the affine field rewritten with dq = -q^2 dp.
inline std::array<double, 3> lifted_field(const MetricField& m, const JetPoint& j) {
  const MetricJet mj = m.jet(j.x, j.y);
  const double d2 = 2.0 * mj.delta();
  const MuCoefficients mu = mu_coefficients(mj);
  const double v = j.dir.value();
  if (j.dir.chart() == Chart::affine) return {d2, d2 * v, mu.eval(v)};
  return {d2 * v, d2, -mu.eval_inverted(v)};
}

// ---------------------------------------------------------------------------
// Real projective roots of the cubic

inline constexpr double kCubicInfinityRelTol = 1e-10;

/// Real roots of mu3 p^3 + ... + mu0 in RP^1 with multiplicities. Leading
/// coefficients below 1e-10 of the largest one count as roots at infinity;
/// the remaining polynomial goes through companion-matrix eigenvalues.
inline std::vector<ProjectiveRoot> cubic_real_roots(const MuCoefficients& mu) {
  const double scale = mu.scale();
  if (scale == 0.0) return {};
  std::array<double, 4> c = {mu.mu0, mu.mu1, mu.mu2, mu.mu3};
  int degree = 3;
  int at_infinity = 0;
  while (degree > 0 && std::abs(c[degree]) < kCubicInfinityRelTol * scale) {
    --degree;
    ++at_infinity;
  }
  std::vector<ProjectiveRoot> roots;
  if (at_infinity > 0) roots.push_back({Direction::vertical(), at_infinity});
  if (degree == 0) return roots;

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) comp(0, i) = -c[degree - 1 - i] / c[degree];
  for (int i = 1; i < degree; ++i) comp(i, i - 1) = 1.0;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();

  std::vector<double> real;
  for (int i = 0; i < ev.size(); ++i) {
    const std::complex<double> z = ev[i];
    // A double root may split into a conjugate pair of size sqrt(eps).
    if (std::abs(z.imag()) < 1e-8 * std::max(1.0, std::abs(z))) real.push_back(z.real());
  }
  std::sort(real.begin(), real.end());
  for (double r : real) {
    const Direction d = Direction::from_slope(r);
    bool merged = false;
    for (auto& existing : roots) {
      if (existing.dir.distance(d) < 1e-6) {
        ++existing.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) roots.push_back({d, 1});
  }
  return roots;
}

enum class DirectionKind { isotropic, nonisotropic };

inline const char* to_string(DirectionKind k) { return k == DirectionKind::isotropic ? "isotropic" : "nonisotropic"; }

struct AdmissibleDirection {
  Direction dir;
  int multiplicity = 1;
  DirectionKind kind = DirectionKind::nonisotropic;
};

struct AdmissibleSet {
  std::vector<AdmissibleDirection> directions;
  /// Set when the cubic vanishes identically or has a repeated root; the
  /// generic one-or-three picture does not apply then.
  bool degenerate = false;
  MuCoefficients mu;

  int count() const { return static_cast<int>(directions.size()); }
};

/// |F(p)|/(1 + p^2) on the direction's chart, so that vertical directions
/// are treated like any other.
inline double normalized_form(const MetricJet& j, const Direction& d) {
  const double v = d.value();
  const double F = d.chart() == Chart::affine ? j.a + 2.0 * j.b * v + j.c * v * v : j.a * v * v + 2.0 * j.b * v + j.c;
  return F / (1.0 + v * v);
}

/// Directions in which geodesics can pass through the transverse parabolic
/// point q0: the real roots of the cubic M(q0, p).
inline AdmissibleSet admissible_directions(const MetricField& m, Point q0) {
  const PointClass pc = classify_parabolic(m, q0);
  if (!pc.transverse.value_or(false)) throw Error(ErrorCode::NotTransverse, "parabolic point is not transverse");
  const MetricJet j = m.jet(q0);
  AdmissibleSet set;
  set.mu = mu_coefficients(j);
  const double coeff = std::max({std::abs(j.a), std::abs(j.b), std::abs(j.c)});
  const double dscale = std::max({std::abs(j.da.dy), std::abs(j.da.dx), std::abs(j.db.dx), std::abs(j.db.dy),
                                  std::abs(j.dc.dx), std::abs(j.dc.dy)});
  if (set.mu.scale() <= 1e-12 * coeff * dscale) {
    set.degenerate = true;
    return set;
  }
  for (const auto& r : cubic_real_roots(set.mu)) {
    AdmissibleDirection ad;
    ad.dir = r.dir;
    ad.multiplicity = r.multiplicity;
    ad.kind = std::abs(normalized_form(j, r.dir)) <= 1e-8 * coeff ? DirectionKind::isotropic
                                                                  : DirectionKind::nonisotropic;
    set.degenerate = set.degenerate || r.multiplicity > 1;
    set.directions.push_back(ad);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Integral curves of the lifted field

struct LiftOptions {
  ode::Tolerance tol{1e-12, 1e-10};
  double h_min = 1e-14;
  std::size_t max_steps = 1'000'000;
  std::optional<YDomain> window;
};

namespace detail {

struct LiftRhs {
  const MetricField* m;
  Chart chart;
  double orient;
  ode::Vec<3> operator()(double, const ode::Vec<3>& z) const {
    const auto f = lifted_field(*m, {z[0], z[1], Direction::in_chart(chart, z[2])});
    return {orient * f[0], orient * f[1], orient * f[2]};
  }
};

}  // namespace detail

/// Integral curve of the lifted field from j0 over the auxiliary parameter
/// s in [0, s_max] (negative s_max runs backward). The chart switches
/// whenever the stored value exceeds 1 in modulus; the orientation is
/// carried across the switch so that the curve keeps its direction.
inline JetPath integrate_unparametrized(const MetricField& m, const JetPoint& j0, double s_max,
                                        const LiftOptions& opts = {}) {
  const YDomain dom = detail::effective_domain(m, opts.window, j0.y);
  if (!dom.contains(j0.y)) throw Error(ErrorCode::InvalidStart, "jet outside the domain");
  JetPath path;
  Direction d0 = Direction::from_slope(j0.dir.slope());
  if (j0.dir.chart() == Chart::inverted) d0 = Direction::from_inverse_slope(j0.dir.inverse_slope());
  Chart chart = d0.chart();
  double orient = s_max >= 0.0 ? 1.0 : -1.0;
  // The stored value may come in the non-preferred chart; keep the same
  // geometric direction of travel when re-expressing it.
  if (chart != j0.dir.chart() && j0.dir.value() != 0.0) orient *= j0.dir.value() > 0 ? 1.0 : -1.0;
  ode::Vec<3> z = {j0.x, j0.y, d0.value()};
  path.samples.push_back({0.0, z[0], z[1], Direction::in_chart(chart, z[2])});

  ode::StepControl ctl;
  ctl.tol = opts.tol;
  ctl.h_min = opts.h_min;
  const double total = std::abs(s_max);
  double s = 0.0;
  auto gap = [&](const ode::Vec<3>& v) { return detail::domain_gap(dom, v[1]); };
  std::size_t steps = 0;
  auto stepper = ode::make_stepper<3>(detail::LiftRhs{&m, chart, orient}, ctl);
  while (s < total) {
    if (++steps > opts.max_steps) throw Error(ErrorCode::StepUnderflow, "step budget exhausted");
    const auto step = stepper.advance(s, z, total - s);
    if (!step) throw Error(ErrorCode::StepUnderflow, "lifted field step underflow");
    if (gap(step->y) <= 0.0) {
      const auto at = stepper.locate(s, z, step->h, gap);
      path.samples.push_back({(s + at.h) * (s_max >= 0 ? 1 : -1), at.y[0], at.y[1], Direction::in_chart(chart, at.y[2])});
      path.stop_reason = StopReason::hit_domain_boundary;
      return path;
    }
    z = step->y;
    s = step->h >= total - s ? total : step->s;
    if (std::abs(z[2]) > 1.0) {
      // V = p W in the affine chart and W = q V in the inverted one.
      orient *= z[2] > 0 ? 1.0 : -1.0;
      z[2] = 1.0 / z[2];
      chart = chart == Chart::affine ? Chart::inverted : Chart::affine;
      stepper = ode::make_stepper<3>(detail::LiftRhs{&m, chart, orient}, ctl);
    }
    path.samples.push_back({s * (s_max >= 0 ? 1 : -1), z[0], z[1], Direction::in_chart(chart, z[2])});
  }
  path.stop_reason = StopReason::reached_tmax;
  return path;
}

// ---------------------------------------------------------------------------
// Consistency checks between the two flows

namespace detail {

/// Phase state under the desingularized field together with a jet under the
/// lifted field scaled by x' (affine) or y' (inverted); both then move with
/// the same speed along the plane. The last slot carries natural time.
struct JointRhs {
  const MetricField* m;
  Chart chart;
  ode::Vec<8> operator()(double, const ode::Vec<8>& z) const {
    const auto f = desingularized_field(*m, {z[0], z[1], z[2], z[3], 0.0});
    const auto g = lifted_field(*m, {z[4], z[5], Direction::in_chart(chart, z[6])});
    const double k = chart == Chart::affine ? z[2] : z[3];
    const double d2 = 2.0 * m->jet(z[0], z[1]).delta();
    return {f[0], f[1], f[2], f[3], k * g[0], k * g[1], k * g[2], d2};
  }
};

}  // namespace detail

/// Largest distance in (x, y, direction) between the projection of the
/// desingularized-field trajectory through s and the lifted-field
/// trajectory through its projection. The run ends when either sigma or the
/// elapsed natural time reaches the horizon; the time bound keeps the
/// comparison away from edges where the metric blows up, which sigma can
/// reach in finite parameter. Grushin-type geodesics still reach their
/// singular line in finite time, so the run also ends within edge_margin of
/// the strip boundary, where the coefficients blow up.
inline double commutation_residual(const MetricField& m, const PhaseState& s, double horizon,
                                   ode::Tolerance tol = {1e-12, 1e-12}, double edge_margin = 1e-3) {
  if (s.vx == 0.0 && s.vy == 0.0) throw Error(ErrorCode::InvalidStart, "velocity must be nonzero");
  Chart chart = std::abs(s.vy) <= std::abs(s.vx) ? Chart::affine : Chart::inverted;
  auto dir_of = [](Chart c, double vx, double vy) { return c == Chart::affine ? vy / vx : vx / vy; };
  ode::Vec<8> z = {s.x, s.y, s.vx, s.vy, s.x, s.y, dir_of(chart, s.vx, s.vy), 0.0};
  ode::StepControl ctl;
  ctl.tol = tol;
  auto stepper = ode::make_stepper<8>(detail::JointRhs{&m, chart}, ctl);
  const YDomain dom = m.component(s.y);
  auto time_left = [&](const ode::Vec<8>& v) { return horizon - std::abs(v[7]); };
  double sigma = 0.0;
  double worst = 0.0;
  bool done = false;
  while (sigma < horizon && !done) {
    auto step = stepper.advance(sigma, z, horizon - sigma);
    if (!step) break;
    if (detail::domain_gap(dom, step->y[1]) < edge_margin || detail::domain_gap(dom, step->y[5]) < edge_margin) break;
    if (time_left(step->y) <= 0.0) {
      step = stepper.locate(sigma, z, step->h, time_left);
      done = true;
    }
    z = step->y;
    sigma = step->h >= horizon - sigma ? horizon : step->s;
    const double dist = std::hypot(z[0] - z[4], z[1] - z[5]);
    const double ddir = std::abs(dir_of(chart, z[2], z[3]) - z[6]);
    worst = std::max({worst, dist, ddir});
    const double v = dir_of(chart, z[2], z[3]);
    if (std::abs(v) > 1.0) {
      chart = chart == Chart::affine ? Chart::inverted : Chart::affine;
      z[6] = 1.0 / z[6];
      stepper = ode::make_stepper<8>(detail::JointRhs{&m, chart}, ctl);
    }
  }
  return worst;
}

/// Largest |F|/(1 + p^2) along the lifted-field curve from an isotropic jet,
/// over an auxiliary-parameter span.
inline double isotropic_invariance_residual(const MetricField& m, const JetPoint& j0, double span = 1.0,
                                            const LiftOptions& opts = {}) {
  const MetricJet j = m.jet(j0.x, j0.y);
  const double coeff = std::max({std::abs(j.a), std::abs(j.b), std::abs(j.c), 1.0});
  if (std::abs(normalized_form(j, j0.dir)) >= 1e-10 * coeff) {
    throw Error(ErrorCode::NotOnSurface, "jet is not isotropic");
  }
  const JetPath path = integrate_unparametrized(m, j0, span, opts);
  double worst = 0.0;
  for (const auto& s : path.samples) {
    worst = std::max(worst, std::abs(normalized_form(m.jet(s.x, s.y), s.dir)));
  }
  return worst;
}

}  // namespace pgeod
