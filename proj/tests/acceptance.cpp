#include "sobext/counterexample.hpp"
#include "sobext/crosscut.hpp"
#include "sobext/error.hpp"
#include "sobext/extension.hpp"
#include "sobext/hyperbolic.hpp"
#include "sobext/metric.hpp"
#include "sobext/riemann.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace sobext;

namespace {

const double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a)
{
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

// euclidean length of the disk geodesic over an arc of angular width delta
double geodesic_length(double delta) { return std::tan(delta / 2) * (pi - delta); }

JordanDomain lshape() { return JordanDomain({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, 0.01); }

Outcome exact_metric()
{
  double e1 = 0, e2 = 0, e3 = 0;
  for (int i = 1; i <= 9; ++i) {
    double r = i / 10.0;
    e1 = std::max(e1, std::abs(hyperbolic_dist_disk(0.0, {r, 0}) - std::log((1 + r) / (1 - r))));
  }
  for (double y : {1e-3, 0.1, 0.5, 2.0, 7.0, 100.0})
    e2 = std::max(e2, std::abs(hyperbolic_dist_halfplane({0, 1}, {0, y}) - std::abs(std::log(y))));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto T = mobius_for_endpoints(std::polar(1.0, 0.7));
  for (int i = 0; i < 1000; ++i) {
    Point z = std::polar(0.95 * std::sqrt(U(rng)), 2 * pi * U(rng));
    Point w = std::polar(0.95 * std::sqrt(U(rng)), 2 * pi * U(rng));
    double d = hyperbolic_dist_disk(z, w);
    e3 = std::max(e3, std::abs(hyperbolic_dist_halfplane(T(z), T(w)) - d) / std::max(1.0, d));
  }
  return {e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-9,
          "disk radial err " + fmt("%.1e", e1) + ", half-plane vertical err " + fmt("%.1e", e2) +
              ", Mobius max err " + fmt("%.1e", e3) + " over 1000 pairs"};
}

Outcome quasihyperbolic_disk()
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 512);
  MetricGrid g(disk, 1.0 / 512), gf(disk, 1.0 / 1024);
  auto f = quasihyperbolic_field(g, 0.0), ff = quasihyperbolic_field(gf, 0.0);
  double err = 0;
  for (int i = 1; i <= 19; ++i)
    for (int a = 0; a < 16; ++a) {
      double r = 0.05 * i;
      double ex = -std::log1p(-r);
      err = std::max(err, std::abs(f.value_at(std::polar(r, a * pi / 8 + 0.1)) - ex) / ex);
    }
  double self = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    double r = std::abs(g.position(k));
    if (r < 0.05 || r > 0.95) continue;
    auto kf = gf.node(2 * g.col(k), 2 * g.row(k));
    if (kf < 0) continue;
    self = std::max(self, std::abs(f.values[k] - ff.values[(std::size_t)kf]) / ff.values[(std::size_t)kf]);
  }
  return {err <= 0.03 && self <= 0.05,
          "max radial rel err " + fmt("%.4f", err) + " at h=1/512, self-convergence " + fmt("%.4f", self)};
}

Outcome criterion_disk()
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 256);
  MetricGrid g(disk, 1.0 / 256);
  auto rep = integrate_criterion(quasihyperbolic_field(g, 0.0), 1.0);
  double rel = std::abs(rep.estimate - 1.5 * pi) / (1.5 * pi);
  return {rel <= 0.02, "estimate " + fmt("%.5f", rep.estimate) + " vs 3pi/2, rel err " + fmt("%.4f", rel) +
                           ", refinement " + fmt("%.5f", rep.refinement.back().estimate)};
}

Outcome koebe()
{
  struct Case {
    const char *name;
    JordanDomain d;
    Point c;
  };
  std::vector<Case> cases = {{"disk", make_regular_polygon(256, 1.0, 0.0, 0.01), 0.0},
                             {"square", make_rectangle(1, 1, {0, 0}, 0.01), {0.5, 0.5}},
                             {"L-shape", lshape(), {0.5, 0.5}}};
  std::size_t viol = 0;
  std::string detail;
  for (auto &c : cases) {
    auto m = compute_riemann_map(c.d, c.c, 2048);
    auto r = verify_koebe(m, 1000, 1);
    viol += r.violations;
    detail += std::string(c.name) + " " + std::to_string(r.violations) + "/" + std::to_string(r.pairs) +
              " (min margin " + fmt("%.4f", r.min_margin) + ") ";
  }
  return {viol == 0, detail + "violations"};
}

struct Chain {
  JordanDomain dom;
  RiemannMap map;
  BoundaryParam phi;
  CrosscutSystem sys;
};

void build_chain(Chain &c, JordanDomain dom, Point z0, int n_max, int n_boundary = 2048)
{
  c.dom = std::move(dom);
  c.map = compute_riemann_map(c.dom, z0, n_boundary);
  c.phi = BoundaryParam::radial(c.dom, z0);
  int n0 = select_n0(c.phi, c.map, uniform_cycle(16)).n0;
  c.sys = build_crosscuts(DyadicFamily{n0, n_max, 0}, c.phi, c.map);
}

Outcome series_disk()
{
  Chain c;
  build_chain(c, make_regular_polygon(256, 1.0, 0.0, 0.01), 0.0, 10);
  bool ok = true;
  std::string detail;
  for (double p : {1.0, 1.5, 1.9}) {
    auto r = series_check(c.sys, p);
    double dev = 0, dev_exact = 0;
    for (auto &L : r.levels) {
      double pattern = std::pow(2 * pi, p) * std::exp2(-L.n);
      double exact = std::exp2((p - 2) * L.n) * std::exp2(L.n) * std::pow(geodesic_length(2 * pi / std::exp2(L.n)), p);
      dev = std::max(dev, std::abs(L.term - pattern) / pattern);
      dev_exact = std::max(dev_exact, std::abs(L.term - exact) / exact);
    }
    ok = ok && dev <= 0.10 && r.verdict == "convergent";
    detail += "p=" + fmt("%.1f", p) + ": " + r.verdict + ", dev from (2pi)^p 2^-n " + fmt("%.3f", dev) +
              ", dev from exact geodesic terms " + fmt("%.4f", dev_exact) + "; ";
  }
  return {ok, detail};
}

Outcome extension_convex()
{
  struct Case {
    const char *name;
    JordanDomain d;
    Point c;
  };
  std::vector<Case> cases = {{"disk", make_regular_polygon(256, 1.0, 0.0, 0.01), 0.0},
                             {"square", make_rectangle(1, 1, {0, 0}, 0.01), {0.5, 0.5}},
                             {"rectangle", make_rectangle(2, 1, {0, 0}, 0.01), {1, 0.5}}};
  bool ok = true;
  std::string detail;
  for (auto &cs : cases) {
    Chain c;
    build_chain(c, cs.d, cs.c, 9);
    auto a = build_extension(c.sys, 8), b = build_extension(c.sys, 9);
    auto e = energy_refinement(a, b, 1.5);
    bool pos = a.positive_cells() == a.cells.size();
    ok = ok && pos && a.boundary_trace_error == 0.0 && e.drift <= 0.05;
    detail += std::string(cs.name) + " " + std::to_string(a.positive_cells()) + "/" + std::to_string(a.cells.size()) +
              " positive, trace " + fmt("%.1e", a.boundary_trace_error) + ", drift " + fmt("%.1e", e.drift) + "; ";
  }
  return {ok, detail};
}

Outcome lemma()
{
  struct Case {
    const char *name;
    std::function<JordanDomain(double)> make;
    Point c;
  };
  std::vector<Case> cases = {
      {"disk", [](double s) { return make_regular_polygon(256, s, 0.0, 0.01 * s); }, 0.0},
      {"square", [](double s) { return make_rectangle(s, s, {0, 0}, 0.01 * s); }, {0.5, 0.5}},
      {"L-shape",
       [](double s) {
         return JordanDomain({{0, 0}, {2 * s, 0}, {2 * s, s}, {s, s}, {s, 2 * s}, {0, 2 * s}}, 0.01 * s);
       },
       {0.5, 0.5}}};
  bool ok = true;
  std::size_t arcs = 0, held = 0;
  double worst = 0, scale = 0;
  for (auto &cs : cases) {
    Chain a, b;
    build_chain(a, cs.make(1.0), cs.c, 7, 1024);
    build_chain(b, cs.make(2.0), 2.0 * cs.c, 7, 1024);
    int n0 = a.sys.family.n0;
    if (b.sys.family.n0 != n0) ok = false;
    // eight arcs per level, spread around the circle
    for (int n = n0; n <= std::min(n0 + 2, 7); ++n)
      for (std::size_t j = 0; j < DyadicFamily::count(n); j += DyadicFamily::count(n) / 8) {
        auto ra = lemma21_check(a.sys, n, j, 2.0, 1.0 / 64);
        auto rb = lemma21_check(b.sys, n, j, 2.0, 2.0 / 64);
        ++arcs;
        if (ra.holds && rb.holds) ++held;
        worst = std::max(worst, ra.ratio / ra.c_q);
        scale = std::max(scale, std::abs(rb.ratio - ra.ratio) / ra.ratio);
      }
  }
  ok = ok && held == arcs && scale <= 0.01;
  return {ok, std::to_string(held) + "/" + std::to_string(arcs) + " arcs satisfy l^2 <= c(2) int, max l^2/(c int) " +
                  fmt("%.2e", worst) + ", doubling changes the ratio by " + fmt("%.4f", scale)};
}

Outcome coexistence()
{
  auto tree = build_tree_curve(7);
  int M = choose_M(6);
  auto dom = assemble_domain(tree, M, 6);
  auto ir = verify_integrability(dom, tree, 1e-4);
  auto b6 = blowup_report(tree, M, 6);
  auto b7 = blowup_report(tree, M, 7);
  double gain = b7.min_certified - b6.min_certified;
  bool ok = ir.ratios_ok && ir.bounded && b6.min_certified >= 5 && gain >= 1 - 1e-12;
  std::string ratios;
  for (auto &s : ir.shells)
    if (s.k > 1) ratios += fmt("%.3f", s.ratio) + (s.k < (int)ir.shells.size() ? "," : "");
  return {ok, "shell ratios [" + ratios + "] (max " + fmt("%.3f", ir.max_ratio) + ", k>=3 max " +
                  fmt("%.3f", ir.tail_max_ratio) + "), cumulative " + fmt("%.4f", ir.cumulative) + " vs cap " +
                  fmt("%.4f", ir.cap) + ", certified path K=6 " + fmt("%.5f", b6.min_certified) + ", K=7 gain " +
                  fmt("%.5f", gain)};
}

Outcome svc_exactness()
{
  double err = 0, lim = 0;
  for (int d = 0; d <= 20; ++d) {
    double series = 0;
    for (int n = 1; n <= d; ++n) series += std::exp2(n - 1) * std::pow(4.0, -n);
    double removed = build_svc(d).removed_measure();
    err = std::max(err, std::abs(removed - series));
    // the tail beyond depth d is 2^{-d-1}
    lim = std::max(lim, std::abs(0.5 - removed - std::exp2(-d - 1)));
  }
  return {err <= 1e-12 && lim <= 1e-12, "max |removed - series| " + fmt("%.1e", err) + " over d <= 20, |1/2 - removed - tail| " +
                                            fmt("%.1e", lim)};
}

Outcome geometry_soundness()
{
  auto tree = build_tree_curve(6);
  std::size_t checked = 0, bad = 0;
  std::string detail;
  for (int K = 1; K <= 6; ++K) {
    int M = choose_M(K);
    auto dom = assemble_domain(tree, M, K); // throws when Jordan validation fails
    auto par = build_boundary_param(dom, tree.svc);
    auto tip = [&](int k, int j, int side) -> const BoundaryAnchor * {
      for (auto &a : dom.anchors)
        if (a.k == k && a.j == j && a.side == side) return &a;
      return nullptr;
    };
    auto check = [&](double sigma, int k, int j, int side) {
      ++checked;
      const BoundaryAnchor *a = tip(k, j, side);
      if (!a) {
        ++bad;
        return;
      }
      Point r = tree.branch(k, j).r;
      bool at_tip = std::abs(std::abs(a->point - r) - rendered_width(k, M)) <= 1e-12;
      if (par(sigma) != a->point || !at_tip) ++bad;
    };
    for (int k = 1; k <= K; ++k) {
      check(-std::exp2(-k), k, 1, +1);
      check(1 + std::exp2(-k), k, 1 << k, -1);
    }
    for (int k = 1; k <= K; ++k)
      for (int j = 1; j <= (1 << (k - 1)); ++j)
        for (int n = 1; k + n - 1 <= K; ++n) {
          double off = (1 - std::exp2(-n)) * SVCSet::radius(k);
          int kk = k + n - 1, jj = (1 << (n - 1)) * (2 * j - 1);
          check(tree.svc.center(k, j) - off, kk, jj, -1);
          check(tree.svc.center(k, j) + off, kk, jj + 1, +1);
        }
    if (K == 6) detail = std::to_string(dom.domain.size()) + " vertices at K=6";
  }
  auto f = offset_finger(tree, branch_sequence(6, 1), choose_M(6), 6);
  auto od = verify_offset_distance(f, 10000, 1);
  bool ok = bad == 0 && od.outside_band == 0 && od.min_ratio >= 0.125 && od.max_ratio <= 8;
  return {ok, "Omega_K valid for K=1..6 (" + detail + "), anchor equalities " + std::to_string(checked - bad) + "/" +
                  std::to_string(checked) + " exact, offset ratios [" + fmt("%.6f", od.min_ratio) + ", " +
                  fmt("%.6f", od.max_ratio) + "] on " + std::to_string(od.samples) + " samples"};
}

} // namespace

int main(int argc, char **argv)
{
  struct Criterion {
    int id;
    const char *name;
    double budget;
    Outcome (*run)();
  };
  std::vector<Criterion> all = {{1, "exact metric oracles", 1, exact_metric},
                                {2, "quasihyperbolic solver on the disk", 30, quasihyperbolic_disk},
                                {3, "criterion integral on the disk", 30, criterion_disk},
                                {4, "Koebe distortion on three domains", 60, koebe},
                                {5, "crosscut series on the disk", 60, series_disk},
                                {6, "extension homeomorphy on convex domains", 120, extension_convex},
                                {7, "crosscut length inequality", 60, lemma},
                                {8, "counterexample coexistence at K=6", 300, coexistence},
                                {9, "SVC exactness", 1, svc_exactness},
                                {10, "counterexample geometry soundness", 120, geometry_soundness}};
  // optional criterion numbers select a subset
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (auto &c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget;
    bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %d %s: %s [%.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
