#pragma once

// Two-dimensional metrics ds^2 = a dx^2 + 2b dx dy + c dy^2 that may change
// signature, and their pointwise algebra.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgeod/error.hpp"

namespace pgeod {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
};

using ScalarField = std::function<double(double, double)>;
using GradientField = std::function<Gradient(double, double)>;

enum class Symmetry { general, y_only };

/// Open strip lo < y < hi; either bound may be infinite.
struct YDomain {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double y) const { return y > lo && y < hi; }
};

/// A horizontal line with a display name (parabolic parallels, equators).
struct NamedLine {
  double y = 0.0;
  std::string name;
};

/// Coefficients and first partials at one point.
struct MetricJet {
  double a = 0.0, b = 0.0, c = 0.0;
  Gradient da, db, dc;

  double delta() const { return a * c - b * b; }

  Gradient grad_delta() const {
    return {da.dx * c + a * dc.dx - 2.0 * b * db.dx, da.dy * c + a * dc.dy - 2.0 * b * db.dy};
  }

  /// Magnitude used to make thresholds on Delta relative.
  double scale() const {
    const double m = std::max({std::abs(a), std::abs(b), std::abs(c)});
    return m * m;
  }

  double form(double vx, double vy) const { return a * vx * vx + 2.0 * b * vx * vy + c * vy * vy; }

  /// Sum of the absolute terms of form(); the reference for relative tests on L.
  double form_scale(double vx, double vy) const {
    return std::abs(a) * vx * vx + 2.0 * std::abs(b * vx * vy) + std::abs(c) * vy * vy;
  }
};

struct MetricField {
  std::string name;
  ScalarField a, b, c;
  /// Optional analytic partials; central differences are used when empty.
  GradientField da, db, dc;
  Symmetry symmetry = Symmetry::general;
  YDomain domain;
  /// Set for metrics periodic in y (the torus); paths may wrap.
  std::optional<double> y_period;
  std::vector<NamedLine> lines;
  /// Lines y = const where the coefficients are discontinuous (Klein and
  /// Grushin type metrics). Paths never cross them.
  std::vector<double> singular_lines;

  static constexpr double kFdStep = 1e-6;

  static Gradient central_difference(const ScalarField& f, double x, double y) {
    const double hx = kFdStep * std::max(1.0, std::abs(x));
    const double hy = kFdStep * std::max(1.0, std::abs(y));
    return {(f(x + hx, y) - f(x - hx, y)) / (2.0 * hx), (f(x, y + hy) - f(x, y - hy)) / (2.0 * hy)};
  }

  MetricJet jet(double x, double y) const {
    MetricJet j;
    j.a = a(x, y);
    j.b = b(x, y);
    j.c = c(x, y);
    j.da = da ? da(x, y) : central_difference(a, x, y);
    j.db = db ? db(x, y) : central_difference(b, x, y);
    j.dc = dc ? dc(x, y) : central_difference(c, x, y);
    if (symmetry == Symmetry::y_only) {
      j.da.dx = j.db.dx = j.dc.dx = 0.0;
    }
    return j;
  }

  MetricJet jet(Point q) const { return jet(q.x, q.y); }

  /// The part of the domain strip that contains y0 and no singular line.
  YDomain component(double y0) const {
    YDomain d = domain;
    for (double s : singular_lines) {
      if (s <= y0) d.lo = std::max(d.lo, s);
      if (s >= y0) d.hi = std::min(d.hi, s);
    }
    return d;
  }

  bool has_partials() const { return static_cast<bool>(da) && static_cast<bool>(db) && static_cast<bool>(dc); }

  /// Copy of this metric that ignores any analytic partials.
  MetricField without_partials() const {
    MetricField m = *this;
    m.da = nullptr;
    m.db = nullptr;
    m.dc = nullptr;
    return m;
  }

  /// Display name of the line through y, or "y=<value>".
  std::string line_label(double y) const {
    if (std::isinf(y)) return y > 0 ? "y=+inf" : "y=-inf";
    for (const auto& line : lines) {
      if (std::abs(line.y - y) <= 1e-7 * std::max(1.0, std::abs(y))) return line.name;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "y=%.6g", y);
    return buf;
  }
};

// ---------------------------------------------------------------------------
// Projective directions

enum class Chart { affine, inverted };

/// A tangent direction dy/dx in RP^1, stored in the chart where it is
/// bounded: affine p with |p| <= 1, otherwise inverted q = 1/p with |q| < 1.
class Direction {
 public:
  Direction() = default;

  static Direction from_slope(double p) {
    if (std::isinf(p)) return Direction(Chart::inverted, 0.0);
    if (std::abs(p) > 1.0) return Direction(Chart::inverted, 1.0 / p);
    return Direction(Chart::affine, p);
  }

  static Direction from_inverse_slope(double q) {
    if (std::isinf(q)) return Direction(Chart::affine, 0.0);
    if (std::abs(q) > 1.0) return Direction(Chart::affine, 1.0 / q);
    return Direction(Chart::inverted, q);
  }

  static Direction vertical() { return Direction(Chart::inverted, 0.0); }

  /// Keeps a value in the requested chart even when it exceeds 1 in modulus.
  static Direction in_chart(Chart chart, double value) { return Direction(chart, value); }

  Chart chart() const { return chart_; }
  double value() const { return value_; }

  double slope() const {
    if (chart_ == Chart::affine) return value_;
    return value_ == 0.0 ? kInf : 1.0 / value_;
  }

  double inverse_slope() const {
    if (chart_ == Chart::inverted) return value_;
    return value_ == 0.0 ? kInf : 1.0 / value_;
  }

  bool is_vertical() const { return chart_ == Chart::inverted && value_ == 0.0; }

  /// Unit tangent vector (dx, dy) representing the direction.
  std::pair<double, double> unit_vector() const {
    if (chart_ == Chart::affine) {
      const double n = std::hypot(1.0, value_);
      return {1.0 / n, value_ / n};
    }
    const double n = std::hypot(value_, 1.0);
    return {value_ / n, 1.0 / n};
  }

  /// Angular distance in RP^1 (radians, in [0, pi/2]).
  double distance(const Direction& other) const {
    auto [u1, v1] = unit_vector();
    auto [u2, v2] = other.unit_vector();
    const double cross = std::abs(u1 * v2 - v1 * u2);
    const double dot = std::abs(u1 * u2 + v1 * v2);
    return std::atan2(cross, dot);
  }

 private:
  Direction(Chart chart, double value) : chart_(chart), value_(value) {}

  Chart chart_ = Chart::affine;
  double value_ = 0.0;
};

/// Real projective roots of A p^2 + B p + C = 0 (p = infinity when A = 0).
/// Each root is reported with its multiplicity.
struct ProjectiveRoot {
  Direction dir;
  int multiplicity = 1;
};

inline std::vector<ProjectiveRoot> projective_quadratic_roots(double A, double B, double C,
                                                               double rel_tol = 1e-12) {
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0) return {};
  // Solve in the chart where the leading coefficient dominates:
  // A p^2 + B p + C = 0  <=>  C q^2 + B q + A = 0 with q = 1/p.
  const bool affine = std::abs(A) >= std::abs(C);
  const double lead = affine ? A : C;
  const double tail = affine ? C : A;
  auto make = [&](double v) {
    return affine ? Direction::from_slope(v) : Direction::from_inverse_slope(v);
  };
  if (std::abs(lead) <= rel_tol * scale) {
    // Both lead and tail vanish relative to B: roots 0 and infinity.
    if (std::abs(B) <= rel_tol * scale) return {};
    return {{Direction::from_slope(0.0), 1}, {Direction::vertical(), 1}};
  }
  const double disc = B * B - 4.0 * lead * tail;
  const double disc_tol = 1e-12 * std::max(B * B, std::abs(4.0 * lead * tail));
  if (disc < -disc_tol) return {};
  if (std::abs(disc) <= disc_tol) return {{make(-B / (2.0 * lead)), 2}};
  // Cancellation-free pair.
  const double s = std::sqrt(disc);
  const double qq = -0.5 * (B + std::copysign(s, B));
  const double r1 = qq / lead;
  const double r2 = qq != 0.0 ? tail / qq : -r1;
  return {{make(r1), 1}, {make(r2), 1}};
}

// ---------------------------------------------------------------------------
// Pointwise algebra

/// Delta = ac - b^2 at q.
inline double discriminant(const MetricField& m, Point q) {
  const double a = m.a(q.x, q.y);
  const double b = m.b(q.x, q.y);
  const double c = m.c(q.x, q.y);
  return a * c - b * b;
}

enum class PointKind { Riemannian, Lorentzian, Parabolic };

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::Riemannian: return "Riemannian";
    case PointKind::Lorentzian: return "Lorentzian";
    case PointKind::Parabolic: return "Parabolic";
  }
  return "?";
}

struct PointClass {
  PointKind kind = PointKind::Riemannian;
  std::optional<bool> transverse;
  std::vector<Direction> isotropic_dirs;
  double delta = 0.0;
  double eps_delta = 0.0;
  /// |Delta| lies within a factor 100 of the threshold.
  bool marginal = false;
  // Raw transversality quantities, filled by classify_parabolic.
  double coefficient_max = 0.0;
  double grad_delta_norm = 0.0;
  double transversality = 0.0;
};

inline constexpr double kDeltaRelTol = 1e-10;

inline double parabolic_threshold(const MetricJet& j) { return kDeltaRelTol * std::max(j.scale(), 1e-300); }

inline PointClass signature_at(const MetricField& m, Point q) {
  const MetricJet j = m.jet(q);
  PointClass pc;
  pc.delta = j.delta();
  pc.eps_delta = parabolic_threshold(j);
  pc.marginal = std::abs(pc.delta) <= 100.0 * pc.eps_delta && std::abs(pc.delta) > pc.eps_delta;

  if (std::abs(pc.delta) <= pc.eps_delta) {
    pc.kind = PointKind::Parabolic;
    // The double root of a + 2bp + cp^2, taken in the better-conditioned chart.
    if (std::abs(j.c) >= std::abs(j.a)) {
      pc.isotropic_dirs.push_back(Direction::from_slope(-j.b / j.c));
    } else {
      pc.isotropic_dirs.push_back(Direction::from_inverse_slope(-j.b / j.a));
    }
    return pc;
  }
  if (pc.delta > 0.0) {
    pc.kind = PointKind::Riemannian;
    return pc;
  }
  pc.kind = PointKind::Lorentzian;
  for (const auto& r : projective_quadratic_roots(j.c, 2.0 * j.b, j.a)) pc.isotropic_dirs.push_back(r.dir);
  return pc;
}

inline PointClass classify_parabolic(const MetricField& m, Point q) {
  PointClass pc = signature_at(m, q);
  if (pc.kind != PointKind::Parabolic) {
    throw Error(ErrorCode::NotParabolic, "point is " + std::string(to_string(pc.kind)));
  }
  const MetricJet j = m.jet(q);
  const Gradient gd = j.grad_delta();
  const double coeff = std::max({std::abs(j.a), std::abs(j.b), std::abs(j.c)});
  // Thresholds are relative to the coefficient size and its derivatives.
  const double dscale = std::max({std::abs(j.da.dx), std::abs(j.da.dy), std::abs(j.db.dx), std::abs(j.db.dy),
                                  std::abs(j.dc.dx), std::abs(j.dc.dy), 1e-300});
  const double eps = 1e-8;
  pc.coefficient_max = coeff;
  pc.grad_delta_norm = std::hypot(gd.dx, gd.dy);
  pc.transversality = j.b * gd.dx - j.a * gd.dy;
  pc.transverse = coeff > eps && pc.grad_delta_norm > eps * coeff * dscale &&
                  std::abs(pc.transversality) > eps * coeff * coeff * dscale;
  return pc;
}

// ---------------------------------------------------------------------------
// Geodesic equation ingredients

/// Right-hand sides P, R of 2(a x'' + b y'') = P, 2(b x'' + c y'') = R.
struct QuadraticTerms {
  double P = 0.0;
  double R = 0.0;
};

inline QuadraticTerms quadratic_terms(const MetricJet& j, double vx, double vy) {
  QuadraticTerms t;
  t.P = (j.dc.dx - 2.0 * j.db.dy) * vy * vy - 2.0 * j.da.dy * vx * vy - j.da.dx * vx * vx;
  t.R = (j.da.dy - 2.0 * j.db.dx) * vx * vx - 2.0 * j.dc.dx * vx * vy - j.dc.dy * vy * vy;
  return t;
}

/// Christoffel symbols of the second kind, Gamma^k_ij with i <= j.
struct Christoffel {
  double g1_11 = 0.0, g1_12 = 0.0, g1_22 = 0.0;
  double g2_11 = 0.0, g2_12 = 0.0, g2_22 = 0.0;

  /// Acceleration (x'', y'') = -Gamma^k_ij v^i v^j.
  std::pair<double, double> acceleration(double vx, double vy) const {
    return {-(g1_11 * vx * vx + 2.0 * g1_12 * vx * vy + g1_22 * vy * vy),
            -(g2_11 * vx * vx + 2.0 * g2_12 * vx * vy + g2_22 * vy * vy)};
  }
};

inline Christoffel christoffel(const MetricField& m, Point q) {
  const MetricJet j = m.jet(q);
  const double delta = j.delta();
  if (std::abs(delta) <= parabolic_threshold(j)) {
    throw Error(ErrorCode::DegenerateMetric, "Christoffel symbols undefined where Delta = 0");
  }
  const double k = 1.0 / (2.0 * delta);
  const double a = j.a, b = j.b, c = j.c;
  Christoffel g;
  g.g1_11 = k * (c * j.da.dx + b * (j.da.dy - 2.0 * j.db.dx));
  g.g1_12 = k * (c * j.da.dy - b * j.dc.dx);
  g.g1_22 = k * (c * (2.0 * j.db.dy - j.dc.dx) - b * j.dc.dy);
  g.g2_11 = -k * (a * (j.da.dy - 2.0 * j.db.dx) + b * j.da.dx);
  g.g2_12 = k * (a * j.dc.dx - b * j.da.dy);
  g.g2_22 = k * (a * j.dc.dy + b * (j.dc.dx - 2.0 * j.db.dy));
  return g;
}

}  // namespace pgeod
