#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pgeod/catalog.hpp"
#include "pgeod/geodesic.hpp"

using namespace pgeod;
using std::numbers::pi;

TEST(Spray, FlatIsZero) {
  const auto [ax, ay] = spray(lookup("flat").metric, {0.1, 0.2, 0.7, -1.1, 0.0});
  EXPECT_EQ(ax, 0.0);
  EXPECT_EQ(ay, 0.0);
}

TEST(Spray, Ex22VerticalAcceleration) {
  const auto [ax, ay] = spray(lookup("ex22").metric, {0.0, 1.0, 0.0, 1.0, 0.0});
  EXPECT_NEAR(ax, 0.0, 1e-15);
  EXPECT_NEAR(ay, -0.5, 1e-15);
}

TEST(Spray, KleinUnitCircleTop) {
  // x = tanh t, y = sech t passes (0, 1) with velocity (1, 0) and y''(0) = -1.
  const auto [ax, ay] = spray(lookup("klein").metric, {0.0, 1.0, 1.0, 0.0, 0.0});
  EXPECT_NEAR(ax, 0.0, 1e-15);
  EXPECT_NEAR(ay, -1.0, 1e-15);
}

TEST(Spray, KleinSignAgreesWithIntegratedCircle) {
  const auto m = lookup("klein").metric;
  const auto path = integrate_natural(m, {0.0, 1.0, 1.0, 0.0, 0.0}, 1e-2);
  // The path bends downward: y < 1 right after the top.
  EXPECT_LT(path.back().y, 1.0);
  EXPECT_NEAR(path.back().y, 1.0 / std::cosh(1e-2), 1e-12);
}

TEST(Spray, DegenerateThrows) {
  EXPECT_THROW(spray(lookup("ex21").metric, {0.0, 0.0, 1.0, 0.0, 0.0}), Error);
}

TEST(DesingularizedField, FlatHorizontal) {
  const auto f = desingularized_field(lookup("flat").metric, {0.0, 0.0, 1.0, 0.0, 0.0});
  EXPECT_EQ(f[0], 2.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
  EXPECT_EQ(f[3], 0.0);
}

TEST(DesingularizedField, Ex21AtParabolicLine) {
  // a = 1, b = 0, c = y: P = 0, R = -c_y y'^2 = -1.
  const auto f = desingularized_field(lookup("ex21").metric, {0.0, 0.0, 0.0, 1.0, 0.0});
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
  EXPECT_DOUBLE_EQ(f[3], -1.0);
}

TEST(DesingularizedField, ZeroVelocity) {
  const auto f = desingularized_field(lookup("sphere").metric, {0.0, 0.4, 0.0, 0.0, 0.0});
  for (double v : f) EXPECT_EQ(v, 0.0);
}

TEST(IntegrateNatural, FlatStraightLine) {
  const auto m = lookup("flat").metric;
  const auto path = integrate_natural(m, {0.0, 0.0, 1.0, 2.0, 0.0}, 1.0);
  EXPECT_EQ(path.stop_reason, StopReason::reached_tmax);
  EXPECT_NEAR(path.back().x, 1.0, 1e-12);
  EXPECT_NEAR(path.back().y, 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(path.back().t, 1.0);
  for (const auto& s : path.samples) EXPECT_NEAR(m.jet(s.x, s.y).form(s.vx, s.vy), 5.0, 1e-12);
  EXPECT_EQ(path.type_tag, CurveType::timelike);
}

TEST(IntegrateNatural, Ex22ClosedForm) {
  const auto m = lookup("ex22").metric;
  const auto path = integrate_natural(m, {1.0, 1.0, 1.0, 2.0 / 3.0, 1.0}, 8.0);
  EXPECT_EQ(path.stop_reason, StopReason::reached_tmax);
  EXPECT_NEAR(path.back().x, 8.0, 1e-5);
  EXPECT_NEAR(path.back().y, 4.0, 1e-5);
}

TEST(IntegrateNatural, KleinCircle) {
  const auto m = lookup("klein").metric;
  const auto path = integrate_natural(m, {0.0, 1.0, 1.0, 0.0, 0.0}, 12.0);
  double worst = 0.0;
  for (const auto& s : path.samples) worst = std::max(worst, std::abs(std::hypot(s.x, s.y) - 1.0));
  EXPECT_LT(worst, 1e-6);
  EXPECT_GT(path.back().x, 0.99);
}

TEST(IntegrateNatural, TimeStrictlyMonotone) {
  const auto m = lookup("sphere").metric;
  const auto path = integrate_natural(m, {0.0, 0.5, 0.3, 1.0, 0.0}, 4.0);
  for (std::size_t i = 1; i < path.size(); ++i) EXPECT_GT(path.samples[i].t, path.samples[i - 1].t);
}

TEST(IntegrateNatural, BackwardRun) {
  const auto m = lookup("flat").metric;
  const auto path = integrate_natural(m, {0.0, 0.0, 1.0, 0.0, 0.0}, -2.0);
  EXPECT_NEAR(path.back().x, -2.0, 1e-12);
  for (std::size_t i = 1; i < path.size(); ++i) EXPECT_LT(path.samples[i].t, path.samples[i - 1].t);
}

TEST(IntegrateNatural, StopsAtDomainBoundary) {
  const auto m = lookup("flat").metric;
  IntegrationOptions o;
  o.window = YDomain{-1.0, 1.0};
  const auto path = integrate_natural(m, {0.0, 0.0, 0.0, 1.0, 0.0}, 5.0, o);
  EXPECT_EQ(path.stop_reason, StopReason::hit_domain_boundary);
  EXPECT_NEAR(path.back().y, 1.0, 1e-10);
  EXPECT_LT(path.back().y, 1.0);
}

TEST(IntegrateNatural, GrushinVerticalReachesLineInFiniteTime) {
  const auto m = lookup("grushin_type").metric;
  const auto path = integrate_natural(m, {0.0, 1.0, 0.0, -1.0, 0.0}, 5.0);
  EXPECT_EQ(path.stop_reason, StopReason::hit_domain_boundary);
  EXPECT_NEAR(path.back().t, 1.0, 1e-9);
}

TEST(IntegrateNatural, Ex22BackwardHitsParabolicSet) {
  const auto m = lookup("ex22").metric;
  const auto path = integrate_natural(m, {1.0, 1.0, 1.0, 2.0 / 3.0, 1.0}, -1.0);
  EXPECT_EQ(path.stop_reason, StopReason::hit_parabolic_set);
  EXPECT_NEAR(path.back().t, 0.0, 1e-6);
  EXPECT_NEAR(path.back().x, 0.0, 1e-6);
}

TEST(IntegrateNatural, InvalidStart) {
  const auto m = lookup("klein").metric;
  try {
    integrate_natural(m, {0.0, -1.0, 1.0, 0.0, 0.0}, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidStart);
  }
  EXPECT_THROW(integrate_natural(m, {0.0, 1.0, 0.0, 0.0, 0.0}, 1.0), Error);
}

TEST(IntegrateNatural, UserStopPredicate) {
  const auto m = lookup("flat").metric;
  IntegrationOptions o;
  o.stop_when = [](const PhaseState& s) { return s.x > 0.5; };
  const auto path = integrate_natural(m, {0.0, 0.0, 1.0, 0.0, 0.0}, 100.0, o);
  EXPECT_EQ(path.stop_reason, StopReason::user_event);
}

TEST(ShootFromParabolic, Ex21SemicubicBranch) {
  const auto m = lookup("ex21").metric;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 1.0, Side::plus, Branch::right);
  // x = tau^3, y = tau^2  =>  x = y^{3/2}.
  double worst = 0.0;
  for (const auto& s : path.samples) worst = std::max(worst, std::abs(s.x - std::pow(s.y, 1.5)));
  EXPECT_LT(worst, 1e-7);
}

TEST(ShootFromParabolic, AlphaZeroIsVerticalHalfLine) {
  const auto m = lookup("ex21").metric;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 0.0, Side::plus, Branch::right);
  for (const auto& s : path.samples) {
    EXPECT_EQ(s.x, 0.0);
    EXPECT_GT(s.y, 0.0);
  }
}

TEST(ShootFromParabolic, SphereIsotropicLaunch) {
  const auto m = lookup("sphere").metric;
  ShootOptions o;
  o.t_max = 1.0;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 2.0 / 3.0, Side::plus, Branch::right, o);
  EXPECT_EQ(path.type_tag, CurveType::isotropic);
}

TEST(ShootFromParabolic, LeadingTermSeedNearlyIsotropic) {
  const auto m = lookup("sphere").metric;
  ShootOptions o;
  o.t_max = 1.0;
  o.snap_to_level = false;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 2.0 / 3.0, Side::plus, Branch::right, o);
  for (const auto& s : path.samples) {
    const MetricJet j = m.jet(s.x, s.y);
    EXPECT_LT(std::abs(j.form(s.vx, s.vy)), 1e-2 * j.form_scale(s.vx, s.vy));
  }
}

TEST(ShootFromParabolic, RejectsNonTransverseAndUnnormalized) {
  const auto sq = metric_from_expressions("sq", "1", "0", "y^2");
  try {
    shoot_from_parabolic(sq, {0.0, 0.0}, 1.0, Side::plus, Branch::right);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotTransverse);
  }
  const auto sheared = metric_from_expressions("sh", "1", "1", "1");
  try {
    shoot_from_parabolic(sheared, {0.0, 0.0}, 1.0, Side::plus, Branch::right);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNormalized);
  }
}

TEST(ShootFromParabolic, RichardsonConsistency) {
  const auto m = lookup("sphere").metric;
  ShootOptions o;
  o.t_max = 0.5;
  for (double alpha : {0.3, 1.0, 2.0}) {
    EXPECT_LT(shooting_consistency(m, {0.0, 0.0}, alpha, Side::plus, Branch::right, o), 1e-8) << alpha;
    EXPECT_LT(shooting_consistency(m, {0.0, 0.0}, alpha, Side::minus, Branch::left, o), 1e-8) << alpha;
  }
}

TEST(FiniteTime, Ex22ArrivalMatchesClosedForm) {
  const auto m = lookup("ex22").metric;
  ShootOptions o;
  o.t_max = 8.0;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 1.0, Side::plus, Branch::right, o);
  const auto r = finite_time_check(path, {0.0, 0.0});
  EXPECT_TRUE(r.finite);
  EXPECT_NEAR(r.t_arrival, 0.0, 1e-4);
  // Along x = t the natural time equals x everywhere.
  for (const auto& s : path.samples) EXPECT_NEAR(s.t, s.x, 1e-6 * std::max(1.0, s.x));
}

TEST(FiniteTime, KleinIsInfinite) {
  const auto m = lookup("klein").metric;
  // y decays like exp(-t); the absolute tolerance has to sit below it.
  IntegrationOptions o;
  o.tol.abs = 1e-20;
  const auto path = integrate_natural(m, {0.0, 1.0, 0.0, -1.0, 0.0}, 30.0, o);
  const auto r = finite_time_check(path, {0.0, 0.0});
  EXPECT_FALSE(r.finite);
  EXPECT_NEAR(r.ratio, 1.0, 0.05);
}

TEST(FiniteTime, GrushinIsFinite) {
  const auto m = lookup("grushin_type").metric;
  const auto path = integrate_natural(m, {0.0, 1.0, 0.0, -1.0, 0.0}, 5.0);
  const auto r = finite_time_check(path, {0.0, 0.0});
  EXPECT_TRUE(r.finite);
  EXPECT_NEAR(r.t_arrival, 1.0, 1e-6);
}

TEST(CuspExponent, Ex21TwoThirds) {
  const auto m = lookup("ex21").metric;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 1.0, Side::plus, Branch::right);
  EXPECT_NEAR(cusp_exponent(path, {0.0, 0.0}), 2.0 / 3.0, 0.01);
}

TEST(CuspExponent, AlphaZeroHasNoExponent) {
  const auto m = lookup("ex21").metric;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 0.0, Side::plus, Branch::right);
  try {
    cusp_exponent(path, {0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
  }
}

TEST(CuspExponent, SphereNorthParallel) {
  const auto m = lookup("sphere").metric;
  ShootOptions o;
  o.t_max = 0.5;
  const auto path = shoot_from_parabolic(m, {0.0, 0.0}, 1.0, Side::plus, Branch::right, o);
  EXPECT_NEAR(cusp_exponent(path, {0.0, 0.0}), 2.0 / 3.0, 0.02);
}
