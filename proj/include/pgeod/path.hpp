#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pgeod/metric.hpp"

namespace pgeod {

/// A point of the tangent bundle together with its natural parameter.
struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double t = 0.0;

  Point point() const { return {x, y}; }
  bool operator==(const PhaseState&) const = default;
};

enum class StopReason { reached_tmax, hit_domain_boundary, hit_parabolic_set, step_underflow, user_event };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_tmax: return "reached_tmax";
    case StopReason::hit_domain_boundary: return "hit_domain_boundary";
    case StopReason::hit_parabolic_set: return "hit_parabolic_set";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::user_event: return "user_event";
  }
  return "?";
}

enum class CurveType { timelike, spacelike, isotropic, mixed };

inline const char* to_string(CurveType c) {
  switch (c) {
    case CurveType::timelike: return "timelike";
    case CurveType::spacelike: return "spacelike";
    case CurveType::isotropic: return "isotropic";
    case CurveType::mixed: return "mixed";
  }
  return "?";
}

struct GeodesicPath {
  std::vector<PhaseState> samples;
  StopReason stop_reason = StopReason::reached_tmax;
  CurveType type_tag = CurveType::isotropic;

  const PhaseState& front() const { return samples.front(); }
  const PhaseState& back() const { return samples.back(); }
  std::size_t size() const { return samples.size(); }
};

inline constexpr double kIsotropyRelTol = 1e-8;

/// Causal type from the sign of L = a x'^2 + 2b x'y' + c y'^2 along the samples.
/// A sample counts as isotropic when |L| <= 1e-8 of the summed magnitudes of
/// its terms.
inline CurveType curve_type(const MetricField& m, std::span<const PhaseState> samples) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : samples) {
    const MetricJet j = m.jet(s.x, s.y);
    const double L = j.form(s.vx, s.vy);
    const double tol = kIsotropyRelTol * j.form_scale(s.vx, s.vy);
    if (L > tol) pos = true;
    if (L < -tol) neg = true;
  }
  if (pos && neg) return CurveType::mixed;
  if (pos) return CurveType::timelike;
  if (neg) return CurveType::spacelike;
  return CurveType::isotropic;
}

inline CurveType curve_type(const MetricField& m, const GeodesicPath& path) {
  return curve_type(m, std::span<const PhaseState>(path.samples));
}

}  // namespace pgeod
