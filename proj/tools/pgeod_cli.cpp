// pgeod: integrate, classify and draw geodesics of catalog or config metrics.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical stop
// (step_underflow).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pgeod/io.hpp"
#include "pgeod/pgeod.hpp"

using namespace pgeod;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;

struct Options {
  std::string metric;
  std::string config;
  std::string start;
  std::string alpha;
  std::string h2;
  std::string window;
  std::string out;
  std::string format;  // each command has its own default
  std::string launch;  // empty: parabolic for classify, regular elsewhere
  std::string side = "plus";
  std::string branch = "both";
  double t_max = 10.0;
  std::string y0, lo, hi;  // expressions such as 3*pi/4
  bool region = false;
  bool no_verify = false;
};

struct Window {
  double x0, x1, y0, y1;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& piece : split_top_level(text, ',')) {
    const std::string t = trim(piece);
    if (t.empty()) continue;
    out.push_back(eval_constant(t));
  }
  return out;
}

Window parse_window(const std::string& text) {
  const auto axes = split_top_level(text, ',');
  if (axes.size() != 2) throw Error(ErrorCode::ParseError, "--window wants x0:x1,y0:y1");
  Window w{};
  double* slots[2][2] = {{&w.x0, &w.x1}, {&w.y0, &w.y1}};
  for (int i = 0; i < 2; ++i) {
    const auto colon = axes[i].find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "--window wants x0:x1,y0:y1");
    *slots[i][0] = eval_constant(axes[i].substr(0, colon));
    *slots[i][1] = eval_constant(axes[i].substr(colon + 1));
    if (!(*slots[i][0] < *slots[i][1])) throw Error(ErrorCode::ParseError, "--window ranges must be increasing");
  }
  return w;
}

CatalogEntry load(const Options& o) {
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read config '" + o.config + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_metric_config(ss.str());
  }
  if (o.metric.empty()) throw Error(ErrorCode::BadParam, "give --metric or --config");
  return lookup_ref(o.metric);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::BadParam, "cannot write '" + o.out + "'");
  f << text;
}

Side parse_side(const std::string& s) {
  if (s == "plus") return Side::plus;
  if (s == "minus") return Side::minus;
  throw Error(ErrorCode::ParseError, "--side is plus or minus");
}

std::vector<Branch> parse_branches(const std::string& s) {
  if (s == "both") return {Branch::right, Branch::left};
  if (s == "right") return {Branch::right};
  if (s == "left") return {Branch::left};
  throw Error(ErrorCode::ParseError, "--branch is right, left or both");
}

std::vector<double> parse_start(const std::string& s, std::size_t want) {
  const auto v = parse_list(s);
  if (v.size() != want) {
    throw Error(ErrorCode::ParseError, "--start needs " + std::to_string(want) + " comma-separated numbers");
  }
  return v;
}

/// All shots requested by --start/--alpha/--h2 and --launch.
std::vector<GeodesicPath> shots(const CatalogEntry& e, const Options& o) {
  const MetricField& m = e.metric;
  const LaunchKind kind = parse_launch_kind(o.launch.empty() ? "regular" : o.launch);
  std::vector<GeodesicPath> out;
  IntegrationOptions io;
  if (!o.window.empty()) {
    const Window w = parse_window(o.window);
    io.window = YDomain{w.y0, w.y1};
  }
  if (kind == LaunchKind::regular && o.alpha.empty() && o.h2.empty()) {
    const auto s = parse_start(o.start, 4);
    out.push_back(integrate_natural(m, {s[0], s[1], s[2], s[3], 0.0}, o.t_max, io));
    return out;
  }
  const auto q = parse_start(o.start, 2);
  const Side side = parse_side(o.side);
  std::vector<double> alphas = parse_list(o.alpha);
  for (double h2 : parse_list(o.h2)) {
    const auto a = alpha_for_level(m, q[1], h2, kind, side);
    if (!a) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "level h2=%g is not reachable from this launch", h2);
      throw Error(ErrorCode::BadParam, buf);
    }
    alphas.push_back(*a);
  }
  if (alphas.empty()) throw Error(ErrorCode::BadParam, "give --alpha or --h2");
  ShootOptions so;
  so.t_max = o.t_max;
  so.integ = io;
  for (double alpha : alphas) {
    switch (kind) {
      case LaunchKind::parabolic:
        for (Branch b : parse_branches(o.branch)) {
          out.push_back(shoot_from_parabolic(m, {q[0], q[1]}, alpha, side, b, so));
        }
        break;
      case LaunchKind::klein:
      case LaunchKind::grushin: {
        const auto dk = kind == LaunchKind::klein ? DiscontinuityKind::klein : DiscontinuityKind::grushin;
        out.push_back(shoot_from_discontinuity(m, {q[0], q[1]}, alpha, side, dk, so));
        if (o.branch == "both") out.push_back(shoot_from_discontinuity(m, {q[0], q[1]}, -alpha, side, dk, so));
        break;
      }
      case LaunchKind::regular: {
        // alpha = dx/dy; inf launches horizontally.
        const PhaseState s = std::isinf(alpha) ? PhaseState{q[0], q[1], 1.0, 0.0, 0.0}
                                               : PhaseState{q[0], q[1], alpha, 1.0, 0.0};
        out.push_back(integrate_natural(m, s, o.t_max, io));
        out.push_back(integrate_natural(m, s, -o.t_max, io));
        break;
      }
    }
  }
  return out;
}

io::PortraitSpec portrait(const CatalogEntry& e, const Options& o, const std::vector<GeodesicPath>& paths) {
  if (o.window.empty()) throw Error(ErrorCode::BadParam, "portraits need --window");
  const Window w = parse_window(o.window);
  io::PortraitSpec spec;
  spec.title = "geodesics of " + e.metric.name;
  spec.x0 = w.x0;
  spec.x1 = w.x1;
  spec.y0 = w.y0;
  spec.y1 = w.y1;
  for (const auto& p : paths) {
    io::Polyline line;
    line.stroke = io::stroke_for(p.type_tag);
    for (const auto& s : p.samples) line.points.push_back({s.x, s.y});
    spec.curves.push_back(std::move(line));
  }
  if (e.metric.symmetry == Symmetry::y_only) {
    for (const auto& hg : horizontal_geodesics(e.metric, YDomain{w.y0, w.y1})) {
      spec.curves.push_back({{{w.x0, hg.y}, {w.x1, hg.y}}, io::Stroke::dashed});
    }
  }
  // Non-isotropic admissible directions through a parabolic launch point.
  if (o.launch == "parabolic" && !o.start.empty()) {
    const auto q = parse_start(o.start, 2);
    try {
      const double len = 0.15 * std::min(w.x1 - w.x0, w.y1 - w.y0);
      for (const auto& d : admissible_directions(e.metric, {q[0], q[1]}).directions) {
        if (d.kind != DirectionKind::nonisotropic) continue;
        const auto [ux, uy] = d.dir.unit_vector();
        const Point a{q[0] - len * ux, q[1] - len * uy}, b{q[0] + len * ux, q[1] + len * uy};
        spec.curves.push_back({{a, b}, io::Stroke::dashed});
      }
    } catch (const Error&) {
      // Degenerate or non-transverse points simply get no marks.
    }
  }
  return spec;
}

int run_list(const Options& o) {
  const auto items = catalog_listing();
  if (o.format == "json") {
    json j = json::array();
    for (const auto& it : items) j.push_back({{"name", it.name}, {"signature", it.signature}, {"summary", it.summary}});
    emit(o, j.dump(2) + "\n");
    return kExitOk;
  }
  std::string text;
  for (const auto& it : items) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %-18s %s\n", it.name.c_str(), it.signature.c_str(), it.summary.c_str());
    text += buf;
  }
  emit(o, text);
  return kExitOk;
}

int run_integrate(const Options& o) {
  const CatalogEntry e = load(o);
  const auto paths = shots(e, o);
  bool underflow = false;
  for (const auto& p : paths) underflow = underflow || p.stop_reason == StopReason::step_underflow;
  if (o.format == "svg") {
    emit(o, io::render_svg(portrait(e, o, paths)));
  } else if (paths.size() == 1) {
    emit(o, io::to_json(paths.front(), e.metric.name).dump(2) + "\n");
  } else {
    json j = json::array();
    for (const auto& p : paths) j.push_back(io::to_json(p, e.metric.name));
    emit(o, j.dump(2) + "\n");
  }
  return underflow ? kExitNumeric : kExitOk;
}

int run_admissible(const Options& o) {
  const CatalogEntry e = load(o);
  const auto q = parse_start(o.start, 2);
  const auto s = admissible_directions(e.metric, {q[0], q[1]});
  emit(o, io::to_json(s, {q[0], q[1]}, e.metric.name).dump(2) + "\n");
  return kExitOk;
}

int run_classify(const Options& o) {
  const CatalogEntry e = load(o);
  FamilyQuery q;
  q.y0 = eval_constant(o.y0);
  q.launch = parse_launch_kind(o.launch.empty() ? "parabolic" : o.launch);
  q.side = parse_side(o.side);
  if (!o.lo.empty()) q.lo = eval_constant(o.lo);
  if (!o.hi.empty()) q.hi = eval_constant(o.hi);
  q.whole_region = o.region;
  q.verify = !o.no_verify;
  const auto c = classify_family(e.metric, q);
  if (o.format == "text") {
    std::string text;
    for (const auto& r : c.rows) {
      char buf[512];
      std::snprintf(buf, sizeof buf, "%-10s %-34s %-20s %-20s %s\n", to_string(r.type), r.h2_range().c_str(),
                    r.endpoint_1.c_str(), r.endpoint_2.c_str(), r.description.c_str());
      text += buf;
    }
    emit(o, text);
  } else {
    emit(o, io::to_json(c, q, e.metric.name).dump(2) + "\n");
  }
  return kExitOk;
}

int run_portrait(const Options& o) {
  const CatalogEntry e = load(o);
  const auto paths = shots(e, o);
  emit(o, io::render_svg(portrait(e, o, paths)));
  return kExitOk;
}

int run_facts(const Options& o) {
  const CatalogEntry e = load(o);
  std::string text;
  for (const auto& r : check_facts(e)) {
    text += std::string(r.pass ? "PASS " : "FAIL ") + r.fact.source + "  (" + r.detail + ")\n";
  }
  emit(o, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesics of pseudo-Riemannian metrics in the plane"};
  app.require_subcommand(1);
  Options o;
  int (*action)(const Options&) = nullptr;

  auto metric_flags = [&](CLI::App* sub) {
    auto* metric = sub->add_option("--metric", o.metric, "Catalog metric, NAME or NAME:k=v,...");
    sub->add_option("--config", o.config, "Metric config file")->excludes(metric);
    sub->add_option("--out", o.out, "Write the result to this file instead of stdout");
  };

  auto* list = app.add_subcommand("list", "List catalog metrics");
  list->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  list->add_option("--out", o.out, "Output file");
  list->callback([&] { action = run_list; });

  auto launch_flags = [&](CLI::App* sub) {
    sub->add_option("--start", o.start, "x,y,vx,vy for a plain start, x,y for launches")->required();
    sub->add_option("--alpha", o.alpha, "Launch constants, comma-separated");
    sub->add_option("--h2", o.h2, "Energy levels, comma-separated (converted to alpha)");
    sub->add_option("--launch", o.launch, "regular, parabolic, klein or grushin")
        ->check(CLI::IsMember({"regular", "parabolic", "klein", "grushin"}));
    sub->add_option("--side", o.side, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
    sub->add_option("--branch", o.branch, "right, left or both")->check(CLI::IsMember({"right", "left", "both"}));
    sub->add_option("--t-max", o.t_max, "Natural-time horizon");
    sub->add_option("--window", o.window, "x0:x1,y0:y1; the y range also bounds integration");
  };

  auto* integ = app.add_subcommand("integrate", "Integrate geodesics, JSON (or SVG) output");
  metric_flags(integ);
  launch_flags(integ);
  integ->add_option("--format", o.format, "json or svg")->check(CLI::IsMember({"json", "svg"}));
  integ->callback([&] { action = run_integrate; });

  auto* adm = app.add_subcommand("admissible", "Admissible directions at a parabolic point");
  metric_flags(adm);
  adm->add_option("--start,--point", o.start, "x,y")->required();
  adm->callback([&] { action = run_admissible; });

  auto* cls = app.add_subcommand("classify", "Classify a launch family by energy level");
  metric_flags(cls);
  cls->add_option("--y0", o.y0, "Launch line")->required();
  cls->add_option("--launch", o.launch, "regular, parabolic, klein or grushin")
      ->check(CLI::IsMember({"regular", "parabolic", "klein", "grushin"}));
  cls->add_option("--side", o.side, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  cls->add_option("--lo", o.lo, "Lower edge of the strip");
  cls->add_option("--hi", o.hi, "Upper edge of the strip");
  cls->add_flag("--region", o.region, "Also launch from the opposite parabolic edge");
  cls->add_flag("--no-verify", o.no_verify, "Skip the representative shots");
  cls->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  cls->callback([&] { action = run_classify; });

  auto* por = app.add_subcommand("portrait", "SVG phase portrait of a launch family");
  metric_flags(por);
  launch_flags(por);
  por->callback([&] { action = run_portrait; });

  auto* facts = app.add_subcommand("facts", "Check a catalog entry's facts");
  metric_flags(facts);
  facts->callback([&] { action = run_facts; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  try {
    return action(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::StepUnderflow ? kExitNumeric : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
