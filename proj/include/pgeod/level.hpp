#pragma once

// Algebra of the energy levels of y-only metrics, shared by the shooting
// code and the symmetry analysis.

#include <cmath>
#include <vector>

#include "pgeod/metric.hpp"

namespace pgeod {

struct QuadCoeffs {
  double A = 0.0, B = 0.0, C = 0.0;
};

/// Coefficients of (b^2 - h^2 c) p^2 + 2b(a - h^2) p + a(a - h^2) = 0.
/// The level h^2 = inf gives the isotropic equation c p^2 + 2b p + a = 0.
inline QuadCoeffs level_quadratic(const MetricJet& j, double h2) {
  if (std::isinf(h2)) return {j.c, 2.0 * j.b, j.a};
  return {j.b * j.b - h2 * j.c, 2.0 * j.b * (j.a - h2), j.a * (j.a - h2)};
}

inline std::vector<ProjectiveRoot> level_slopes(const MetricJet& j, double h2) {
  const QuadCoeffs q = level_quadratic(j, h2);
  return projective_quadratic_roots(q.A, q.B, q.C);
}

/// Signed square of H = (a + bp)/sqrt(F): the sign of F is carried over, and
/// an isotropic direction gives +inf. Evaluated in the direction's own chart.
inline double signed_h2(const MetricJet& j, const Direction& d, double iso_tol = 1e-12) {
  double num = 0.0;
  double F = 0.0;
  double ref = 0.0;
  const double v = d.value();
  if (d.chart() == Chart::affine) {
    num = (j.a + j.b * v) * (j.a + j.b * v);
    F = j.a + 2.0 * j.b * v + j.c * v * v;
    ref = std::abs(j.a) + 2.0 * std::abs(j.b * v) + std::abs(j.c) * v * v;
  } else {
    num = (j.a * v + j.b) * (j.a * v + j.b);
    F = j.a * v * v + 2.0 * j.b * v + j.c;
    ref = std::abs(j.a) * v * v + 2.0 * std::abs(j.b * v) + std::abs(j.c);
  }
  if (std::abs(F) <= iso_tol * ref) return kInf;
  return num / F;
}

/// Level of the geodesics leaving a generic parabolic point along
/// x = alpha tau^3, y = Y tau^2 (Y = +1 or -1). Here dc0 = c'(y0).
inline double parabolic_launch_h2(double a0, double dc0, double alpha, double Y) {
  if (std::isinf(alpha)) return a0;
  const double c1 = 4.0 / 9.0 * dc0;
  const double num = alpha * alpha * a0 * a0;
  const double den = alpha * alpha * a0 + c1 * Y;
  if (std::abs(den) <= 1e-12 * (alpha * alpha * std::abs(a0) + std::abs(c1))) return kInf;
  return num / den;
}

/// Level of the geodesic leaving the regular line y = y0 with dx/dy = alpha.
inline double regular_launch_h2(double a0, double c0, double alpha) {
  if (std::isinf(alpha)) return a0;
  const double num = alpha * alpha * a0 * a0;
  const double den = alpha * alpha * a0 + c0;
  if (std::abs(den) <= 1e-12 * (alpha * alpha * std::abs(a0) + std::abs(c0))) return kInf;
  return num / den;
}

}  // namespace pgeod
