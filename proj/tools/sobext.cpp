#include "sobext/boundary_param.hpp"
#include "sobext/counterexample.hpp"
#include "sobext/crosscut.hpp"
#include "sobext/error.hpp"
#include "sobext/extension.hpp"
#include "sobext/metric.hpp"
#include "sobext/report.hpp"
#include "sobext/riemann.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace sobext;

namespace {

struct Config {
  std::string domain, phi, z0 = "0,0";
  double q = 1, p = 1.5, h = 0.004;
  int neighbors = 32, n_boundary = 2048, n_max = 10, mesh_n_max = -1, depth = 4, samples = 10000, pairs = 1000;
  std::string metric = "quasihyperbolic";
  std::uint64_t seed = 1;
  double grid_h = 1e-4;
  std::string report, csv, emit, emit_phi, svg, mesh;
  bool assert_verdict = false;
};

void emit_report(const std::string &path, const json &j)
{
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json(path, j);
}

json header(const std::string &command, const json &config)
{
  json j;
  j["schema_version"] = schema_version;
  j["command"] = command;
  j["config"] = config;
  return j;
}

json criterion_json(const CriterionReport &r)
{
  json ref = json::array();
  for (auto &l : r.refinement)
    ref.push_back({{"h", l.h}, {"estimate", number_json(l.estimate)}, {"nodes", l.nodes}, {"unreached", l.unreached}});
  return {{"metric", r.metric},     {"q", r.q},           {"h", r.h}, {"estimate", number_json(r.estimate)},
          {"refinement", ref},      {"rel_diff", number_json(r.rel_diff)}, {"converged", r.converged}};
}

void check_common(const Config &c, bool need_domain)
{
  if (need_domain && c.domain.empty()) fail_validation("--domain is required");
  if (!(c.h > 0)) fail_validation("--h must be positive");
  if (!(c.q >= 1)) fail_validation("--q must be at least 1");
  if (!(c.p >= 1 && c.p < 2)) fail_validation("--p must lie in [1, 2)");
}

int run_metric(const Config &c)
{
  check_common(c, true);
  auto dom = JordanDomain::load(c.domain);
  Point z0 = parse_point(c.z0);
  MetricGrid grid(dom, c.h);
  auto field = quasihyperbolic_field(grid, z0, c.neighbors);
  if (!c.csv.empty()) write_field_csv(field, c.csv);
  json j = header("metric", {{"domain", c.domain}, {"z0", point_json(z0)}, {"h", c.h}, {"neighbors", c.neighbors}});
  double vmax = 0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (field.reached[k]) vmax = std::max(vmax, field.values[k]);
  j["nodes"] = grid.size();
  j["fringe_nodes"] = grid.fringe_count();
  j["reached"] = field.reached_count();
  j["max_value"] = vmax;
  emit_report(c.report, j);
  return 0;
}

int run_criterion(const Config &c)
{
  check_common(c, true);
  auto dom = JordanDomain::load(c.domain);
  Point z0 = parse_point(c.z0);
  MetricGrid grid(dom, c.h);
  CriterionReport rep;
  json cfg = {{"domain", c.domain}, {"z0", point_json(z0)}, {"q", c.q}, {"h", c.h}, {"metric", c.metric}};
  if (c.metric == "quasihyperbolic") {
    cfg["neighbors"] = c.neighbors;
    auto field = quasihyperbolic_field(grid, z0, c.neighbors);
    rep = integrate_criterion(field, c.q, c.neighbors);
  } else if (c.metric == "hyperbolic") {
    cfg["n_boundary"] = c.n_boundary;
    auto map = compute_riemann_map(dom, z0, c.n_boundary);
    auto field = hyperbolic_field(grid, map, z0);
    rep = integrate_hyperbolic_criterion(field, map, c.q);
  } else {
    fail_validation("--metric must be quasihyperbolic or hyperbolic");
  }
  json j = header("criterion", cfg);
  j.update(criterion_json(rep));
  emit_report(c.report, j);
  if (c.assert_verdict && !rep.converged) return exit_code(ErrorKind::inconclusive);
  return 0;
}

int run_riemann(const Config &c)
{
  check_common(c, true);
  auto dom = JordanDomain::load(c.domain);
  Point z0 = parse_point(c.z0);
  auto map = compute_riemann_map(dom, z0, c.n_boundary);
  if (!c.emit.empty()) map.save(c.emit);
  auto kr = verify_koebe(map, (std::size_t)c.pairs, c.seed);
  auto cr = check_conformality(map, 200, c.seed);
  json j = header("riemann", {{"domain", c.domain},
                              {"z0", point_json(z0)},
                              {"n_boundary", c.n_boundary},
                              {"pairs", c.pairs},
                              {"seed", c.seed}});
  j["samples"] = map.samples();
  j["derivative_at_center"] = map.derivative(0.0);
  j["koebe"] = {{"pairs", kr.pairs},
                {"violations", kr.violations},
                {"excluded", kr.excluded},
                {"min_margin", kr.min_margin},
                {"mean_margin", kr.mean_margin},
                {"max_abs_log_ratio", kr.max_abs_log_ratio}};
  j["conformality"] = {{"points", cr.points}, {"max_cr_residual", cr.max_cr_residual}, {"max_roundtrip", cr.max_roundtrip}};
  emit_report(c.report, j);
  if (c.assert_verdict && kr.violations > 0) return exit_code(ErrorKind::inconclusive);
  return 0;
}

int run_extend(const Config &c)
{
  check_common(c, true);
  auto dom = JordanDomain::load(c.domain);
  Point z0 = parse_point(c.z0);
  auto map = compute_riemann_map(dom, z0, c.n_boundary);
  BoundaryParam phi = c.phi.empty() ? BoundaryParam::radial(dom, z0) : BoundaryParam::load(c.phi, dom);
  auto n0 = select_n0(phi, map, uniform_cycle(16));
  if (c.n_max < n0.n0 || c.n_max > 16) fail_validation("--nmax must lie in [n0, 16]");
  DyadicFamily fam{n0.n0, c.n_max, 0.0};
  auto sys = build_crosscuts(fam, phi, map);
  auto dis = check_disjointness(sys);
  auto series = series_check(sys, c.p);
  int mesh_level = c.mesh_n_max < 0 ? c.n_max : std::min(c.mesh_n_max, c.n_max);
  auto mesh = build_extension(sys, mesh_level);
  if (!c.mesh.empty()) write_mesh_csv(mesh, c.mesh);
  json j = header("extend", {{"domain", c.domain},
                             {"phi", c.phi.empty() ? json("radial") : json(c.phi)},
                             {"z0", point_json(z0)},
                             {"p", c.p},
                             {"n_max", c.n_max},
                             {"mesh_n_max", mesh_level},
                             {"n_boundary", c.n_boundary}});
  j["n0"] = to_json(n0);
  j["disjointness"] = to_json(dis);
  j["series"] = to_json(series);
  j["mesh"] = to_json(mesh);
  j["energy"] = number_json(sobolev_energy(mesh, c.p));
  j["degenerate_cells"] = mesh.cells.size() - mesh.positive_cells();
  if (!c.svg.empty()) {
    Box b = dom.box();
    double pad = 0.05 * std::max(b.width(), b.height());
    SvgCanvas svg({b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad});
    svg.polygon(dom.vertices(), "#eef3f8", "#1f4e79", 1.0);
    for (auto &lev : sys.levels)
      for (auto &cc : lev) svg.polyline(cc.path, ramp_color((double)(cc.n - fam.n0) / std::max(1, fam.n_max - fam.n0)), 0.5);
    svg.save(c.svg);
  }
  emit_report(c.report, j);
  if (c.assert_verdict && series.verdict != "convergent") return exit_code(ErrorKind::inconclusive);
  return 0;
}

int run_counterexample(const Config &c)
{
  int K = c.depth;
  if (K < 1 || K > 8) fail_validation("--depth must lie in [1, 8]");
  if (!(c.grid_h > 0)) fail_validation("--grid-h must be positive");
  auto tree = build_tree_curve(std::max(K, 2));
  auto tc = verify_tree(tree);
  int M = choose_M(K);
  auto dom = assemble_domain(tree, M, K);
  auto param = build_boundary_param(dom, tree.svc);
  if (!c.emit.empty()) dom.domain.save(c.emit);
  if (!c.emit_phi.empty()) {
    json pj;
    pj["schema_version"] = schema_version;
    pj["kind"] = "table";
    auto cp = param.circle_param();
    pj["theta"] = cp.theta();
    pj["arclength"] = cp.arclength();
    json an = json::array();
    for (auto &a : param.anchors())
      an.push_back({{"sigma", a.sigma}, {"k", a.anchor.k}, {"j", a.anchor.j}, {"side", a.anchor.side}, {"rule", a.rule},
                    {"point", point_json(a.anchor.point)}});
    pj["anchors"] = an;
    write_json(c.emit_phi, pj);
  }
  if (!c.svg.empty()) save_domain_svg(dom, tree, c.svg);

  auto integ = verify_integrability(dom, tree, c.grid_h);
  auto blow = blowup_report(tree, M, K);
  auto finger = offset_finger(tree, branch_sequence(K, 1), M, K);
  auto off = verify_offset_distance(finger, (std::size_t)c.samples, c.seed);

  json j = header("counterexample",
                  {{"depth", K}, {"grid_h", c.grid_h}, {"samples", c.samples}, {"seed", c.seed}, {"M", M}});
  j["tree"] = to_json(tc);
  j["domain"] = {{"vertices", dom.domain.size()},
                 {"area", dom.domain.area()},
                 {"area_bound", dom.area_bound},
                 {"perimeter", dom.domain.perimeter()},
                 {"p0", point_json(dom.p0)}};
  j["svc"] = {{"removed_measure", tree.svc.removed_measure()},
              {"closed_form", svc_removed_closed_form(tree.svc.depth)},
              {"cantor_parameter_measure", param.cantor_measure()}};
  j["parametrization"] = {{"anchors", param.anchors().size()}, {"mismatches", param.anchor_mismatches()}};
  j["integrability"] = to_json(integ);
  j["blowup"] = to_json(blow);
  j["offset_distance"] = to_json(off);
  emit_report(c.report, j);
  return 0;
}

void diagnostic(const std::string &kind, const std::string &msg)
{
  json d = {{"schema_version", schema_version}, {"error", kind}, {"message", msg}};
  std::cerr << d.dump() << '\n';
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Sobolev extension toolkit: metrics, criterion, conformal maps, extensions, counterexample"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Config c;

  auto add_domain = [&](CLI::App *s) {
    s->add_option("--domain", c.domain, "domain JSON file")->required();
    s->add_option("--z0", c.z0, "base point x,y")->capture_default_str();
  };
  auto add_report = [&](CLI::App *s) { s->add_option("--report", c.report, "JSON report path (stdout when omitted)"); };

  auto *metric = app.add_subcommand("metric", "quasihyperbolic field dump");
  add_domain(metric);
  metric->add_option("--h", c.h, "grid spacing")->capture_default_str();
  metric->add_option("--neighbors", c.neighbors, "stencil size 8, 16 or 32")->capture_default_str();
  metric->add_option("--csv", c.csv, "field CSV path");
  add_report(metric);

  auto *crit = app.add_subcommand("criterion", "L^q integral of the metric from z0");
  add_domain(crit);
  crit->add_option("--q", c.q, "exponent q >= 1")->capture_default_str();
  crit->add_option("--h", c.h, "grid spacing")->capture_default_str();
  crit->add_option("--metric", c.metric, "quasihyperbolic or hyperbolic (conformal pullback)")->capture_default_str();
  crit->add_option("--neighbors", c.neighbors, "stencil size")->capture_default_str();
  crit->add_option("--nboundary", c.n_boundary, "zipper boundary samples")->capture_default_str();
  crit->add_flag("--assert", c.assert_verdict, "exit 4 when the refinement check fails");
  add_report(crit);

  auto *riem = app.add_subcommand("riemann", "conformal map and Koebe check");
  add_domain(riem);
  riem->add_option("--nboundary", c.n_boundary, "zipper boundary samples")->capture_default_str();
  riem->add_option("--pairs", c.pairs, "Koebe sample pairs")->capture_default_str();
  riem->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  riem->add_option("--emit", c.emit, "map JSON path");
  riem->add_flag("--assert", c.assert_verdict, "exit 4 on Koebe violations");
  add_report(riem);

  auto *ext = app.add_subcommand("extend", "dyadic crosscuts, series and extension mesh");
  add_domain(ext);
  ext->add_option("--phi", c.phi, "boundary parametrization JSON (radial from z0 when omitted)");
  ext->add_option("--p", c.p, "Sobolev exponent in [1, 2)")->capture_default_str();
  ext->add_option("--nmax", c.n_max, "deepest crosscut level")->capture_default_str();
  ext->add_option("--mesh-nmax", c.mesh_n_max, "deepest mesh level (nmax when omitted)");
  ext->add_option("--nboundary", c.n_boundary, "zipper boundary samples")->capture_default_str();
  ext->add_option("--mesh", c.mesh, "mesh CSV path");
  ext->add_option("--svg", c.svg, "crosscut picture");
  ext->add_flag("--assert", c.assert_verdict, "exit 4 unless the series verdict is convergent");
  add_report(ext);

  auto *ce = app.add_subcommand("counterexample", "tree-like Jordan domain and its verification");
  ce->add_option("--depth", c.depth, "truncation depth K")->capture_default_str();
  ce->add_option("--emit", c.emit, "domain JSON path");
  ce->add_option("--emit-phi", c.emit_phi, "boundary parametrization JSON path");
  ce->add_option("--svg", c.svg, "domain picture");
  ce->add_option("--grid-h", c.grid_h, "grid spacing for the integrability check")->capture_default_str();
  ce->add_option("--samples", c.samples, "offset-distance samples")->capture_default_str();
  ce->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  add_report(ce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::validation);
  }

  try {
    if (*metric) return run_metric(c);
    if (*crit) return run_criterion(c);
    if (*riem) return run_riemann(c);
    if (*ext) return run_extend(c);
    if (*ce) return run_counterexample(c);
  } catch (const Error &e) {
    const char *names[] = {"validation", "numerical", "inconclusive"};
    diagnostic(names[(int)e.kind()], e.what());
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    diagnostic("numerical", e.what());
    return exit_code(ErrorKind::numerical);
  }
  return 0;
}
