#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <numbers>
#include <random>

#include "pgeod/facts.hpp"

using namespace pgeod;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Expr, ArithmeticAndFunctions) {
  const auto n = expr::parse("2*sin(y)^2 + cos(y)^2 - x/4");
  EXPECT_NEAR(n->eval(2.0, 0.7), 1.0 + std::sin(0.7) * std::sin(0.7) - 0.5, 1e-15);
  EXPECT_TRUE(n->uses_x());
  EXPECT_FALSE(expr::parse("sqrt(y) + exp(-y) + pi")->uses_x());
  EXPECT_DOUBLE_EQ(eval_constant("-2^2"), -4.0);
  EXPECT_DOUBLE_EQ(eval_constant("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(eval_constant("rho - 1", {{"rho", 3.0}}), 2.0);
  EXPECT_TRUE(std::isinf(eval_constant("inf")));
}

TEST(Expr, DerivativesClosedForm) {
  const double x = 0.4, y = -0.9;
  const auto d = expr::parse("x*y^3 + sin(x*y) - sqrt(x)/y + exp(-y^2)")->diff(x, y);
  EXPECT_NEAR(d.dx, y * y * y + y * std::cos(x * y) - 0.5 / (std::sqrt(x) * y), 1e-14);
  EXPECT_NEAR(d.dy, 3.0 * x * y * y + x * std::cos(x * y) + std::sqrt(x) / (y * y) - 2.0 * y * std::exp(-y * y),
              1e-14);
  // Variable exponent picks up the log term.
  const auto e = expr::parse("y^x")->diff(0.5, 2.0);
  EXPECT_NEAR(e.dx, std::pow(2.0, 0.5) * std::log(2.0), 1e-15);
  EXPECT_NEAR(e.dy, 0.5 * std::pow(2.0, -0.5), 1e-15);
  EXPECT_EQ(expr::parse("y^0")->diff(0.0, 0.0).dy, 0.0);
}

TEST(Expr, DerivativesMatchDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 1.7);
  const char* texts[] = {"(1 + y^4)/y^2", "cos(2*y) - x*y", "exp(x)*sqrt(y) + y^-3", "(x + y)^2.5"};
  for (const char* t : texts) {
    const auto n = expr::parse(t);
    for (int i = 0; i < 20; ++i) {
      const double x = u(rng), y = u(rng), h = 1e-6;
      const auto d = n->diff(x, y);
      EXPECT_DOUBLE_EQ(d.v, n->eval(x, y)) << t;
      EXPECT_NEAR(d.dx, (n->eval(x + h, y) - n->eval(x - h, y)) / (2 * h), 1e-6 * std::max(1.0, std::abs(d.dx))) << t;
      EXPECT_NEAR(d.dy, (n->eval(x, y + h) - n->eval(x, y - h)) / (2 * h), 1e-6 * std::max(1.0, std::abs(d.dy))) << t;
    }
  }
}

TEST(Expr, Errors) {
  for (const char* bad : {"", "1 +", "(y", "foo(y)", "y y", "2 * * 3", "z"}) {
    try {
      expr::parse(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
  EXPECT_THROW(eval_constant("x + 1"), Error);
}

TEST(Catalog, ListingHasTenEntries) {
  const auto items = catalog_listing();
  ASSERT_EQ(items.size(), 10u);
  bool sphere = false, torus = false;
  for (const auto& it : items) {
    sphere = sphere || it.name == "sphere";
    torus = torus || it.signature == "torus(rho)";
    EXPECT_NO_THROW(lookup(it.name)) << it.name;
  }
  EXPECT_TRUE(sphere);
  EXPECT_TRUE(torus);
}

TEST(Catalog, SphereCoefficients) {
  const auto e = lookup("sphere");
  for (double y : {-1.0, 0.3, 2.0, 4.0}) {
    EXPECT_DOUBLE_EQ(e.metric.a(0.0, y), 1.0 + std::sin(y));
    EXPECT_DOUBLE_EQ(e.metric.b(0.0, y), 0.0);
    EXPECT_DOUBLE_EQ(e.metric.c(0.0, y), -std::sin(y));
  }
  EXPECT_DOUBLE_EQ(e.metric.domain.lo, -pi / 2.0);
  EXPECT_DOUBLE_EQ(e.metric.domain.hi, 3.0 * pi / 2.0);
}

TEST(Catalog, TorusAndEx34Coefficients) {
  const auto t = lookup_ref("torus:rho=2");
  EXPECT_DOUBLE_EQ(t.params.at("rho"), 2.0);
  EXPECT_DOUBLE_EQ(t.metric.a(0.0, 1.0), std::pow(2.0 + std::cos(1.0), 2.0));
  EXPECT_DOUBLE_EQ(t.metric.c(0.0, 1.0), -std::cos(2.0));
  const auto e = lookup("ex34");
  EXPECT_DOUBLE_EQ(e.metric.a(0.0, 2.0), (1.0 + 16.0) / 4.0);
  EXPECT_DOUBLE_EQ(e.metric.c(0.0, 2.0), 0.25);
  const auto k = lookup_ref("klein_type:v=1+y^4");
  EXPECT_NEAR(k.metric.a(0.0, 2.0), e.metric.a(0.0, 2.0), 1e-15);
}

TEST(Catalog, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ParseError;
  };
  EXPECT_EQ(code([] { lookup("nope"); }), ErrorCode::UnknownMetric);
  EXPECT_EQ(code([] { lookup_ref("torus:rho=1"); }), ErrorCode::BadParam);
  EXPECT_EQ(code([] { lookup_ref("torus:rho=0.5"); }), ErrorCode::BadParam);
  EXPECT_EQ(code([] { lookup_ref("sphere:rho=2"); }), ErrorCode::BadParam);
  EXPECT_EQ(code([] { lookup_ref("klein_type:v=x"); }), ErrorCode::BadParam);
}

TEST(Catalog, AnalyticPartialsMatchDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ys(0.2, 2.5);
  for (const auto& it : catalog_listing()) {
    const auto m = lookup(it.name).metric;
    if (!m.has_partials()) continue;
    const auto fd = m.without_partials();
    for (int i = 0; i < 10; ++i) {
      const double y = ys(rng);
      const MetricJet a = m.jet(0.3, y), b = fd.jet(0.3, y);
      EXPECT_NEAR(a.da.dy, b.da.dy, 1e-5 * std::max(1.0, std::abs(a.da.dy))) << it.name;
      EXPECT_NEAR(a.dc.dy, b.dc.dy, 1e-5 * std::max(1.0, std::abs(a.dc.dy))) << it.name;
    }
  }
}

TEST(Catalog, EveryFactPasses) {
  for (const auto& it : catalog_listing()) {
    const auto e = lookup(it.name);
    for (const auto& r : check_facts(e)) EXPECT_TRUE(r.pass) << it.name << ": " << r.fact.source << " " << r.detail;
  }
  for (const char* ref : {"torus:rho=3", "torus:rho=1.5"}) {
    for (const auto& r : check_facts(lookup_ref(ref))) EXPECT_TRUE(r.pass) << ref << ": " << r.fact.source << " " << r.detail;
  }
}

TEST(Catalog, FailingFactIsReported) {
  auto e = lookup("sphere");
  e.facts = parse_facts("horizontal_geodesic y=1 h2=2\nclass_count y0=0 launch=parabolic rows=9\nbogus y=1");
  for (const auto& r : check_facts(e)) EXPECT_FALSE(r.pass) << r.fact.source;
}

TEST(Config, ExpressionMetric) {
  const auto e = load_metric_config(R"(
# a Klein-like strip
name = mine
param.k = 2
a = k / y^2
c = 1 / y^2
domain = 0, inf
lines = A:0, B:1
fact = envelope y=1 h2=2
)");
  EXPECT_EQ(e.metric.name, "mine");
  EXPECT_EQ(e.metric.symmetry, Symmetry::y_only);
  EXPECT_DOUBLE_EQ(e.metric.a(0.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(e.metric.b(0.0, 2.0), 0.0);
  EXPECT_TRUE(std::isinf(e.metric.domain.hi));
  EXPECT_EQ(e.metric.line_label(1.0), "B");
  ASSERT_EQ(e.facts.size(), 1u);
  EXPECT_TRUE(check_fact(e, e.facts[0]).pass);
}

TEST(Config, BuiltinWithParams) {
  const auto e = load_metric_config("builtin = torus\nparam.rho = 3\n");
  EXPECT_DOUBLE_EQ(e.params.at("rho"), 3.0);
  EXPECT_DOUBLE_EQ(e.metric.a(0.0, 0.0), 16.0);
}

TEST(Config, Errors) {
  for (const char* bad : {"a = 1", "a = 1\nc = 1\nwhat = 3", "no equals sign", "builtin = sphere\na = 1",
                          "a = 1\nc = 1\ndomain = 2, 1", "a = 1\nc = (", "a = 1\nc = 1\nsymmetry = odd"}) {
    try {
      load_metric_config(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

#ifdef PGEOD_EXAMPLES_CFG_DIR
TEST(Config, ShippedExamplesLoadAndPass) {
  int files = 0;
  for (const auto& f : std::filesystem::directory_iterator(PGEOD_EXAMPLES_CFG_DIR)) {
    if (f.path().extension() != ".cfg") continue;
    ++files;
    std::ifstream in(f.path());
    std::stringstream text;
    text << in.rdbuf();
    const auto e = load_metric_config(text.str());
    for (const auto& r : check_facts(e)) EXPECT_TRUE(r.pass) << f.path() << ": " << r.fact.source << " " << r.detail;
  }
  EXPECT_GE(files, 3);
}
#endif
