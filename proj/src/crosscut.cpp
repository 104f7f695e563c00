#include "sobext/crosscut.hpp"
#include "sobext/error.hpp"
#include "sobext/hyperbolic.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace sobext {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2 * pi;
const double gap_limit = 4 * pi / (1 + pi * pi);
const double nan = std::numeric_limits<double>::quiet_NaN();
const double inf = std::numeric_limits<double>::infinity();

double wrap(double t)
{
  t = std::fmod(t, two_pi);
  return t < 0 ? t + two_pi : t;
}
} // namespace

double DyadicFamily::angle(int n, std::size_t j) const { return offset + two_pi * (double)j / (double)count(n); }

std::size_t DyadicFamily::arc_of(int n, double theta) const
{
  double t = wrap(theta - offset);
  auto j = (std::size_t)std::floor(t * (double)count(n) / two_pi);
  return std::min(j, count(n) - 1);
}

Cycle::Cycle(std::vector<Point> pts, double tol) : pts_(std::move(pts))
{
  if (pts_.size() < 2) fail_validation("a cycle needs at least two points");
  double prev = 0;
  for (std::size_t k = 0; k < pts_.size(); ++k) {
    if (std::abs(std::abs(pts_[k]) - 1) > tol) fail_validation("cycle point off the unit circle");
    if (k == 0) continue;
    double t = wrap(std::arg(pts_[k]) - std::arg(pts_[0]));
    if (!(t > prev)) fail_validation("cycle angles not strictly increasing at point " + std::to_string(k));
    prev = t;
  }
}

double Cycle::max_step() const
{
  double m = 0;
  for (std::size_t k = 0; k < pts_.size(); ++k) m = std::max(m, std::abs(pts_[(k + 1) % pts_.size()] - pts_[k]));
  return m;
}

Cycle uniform_cycle(int n)
{
  std::vector<Point> p;
  for (int j = 0; j < n; ++j) p.push_back(std::polar(1.0, two_pi * (j + 0.5) / n));
  return Cycle(std::move(p));
}

double xi_angle(const BoundaryParam &phi, const RiemannMap &map, double theta)
{
  return map.angle_of_arclength(phi.arclength_at(theta));
}

N0Report select_n0(const BoundaryParam &phi, const RiemannMap &map, const Cycle &seed, int cap)
{
  N0Report rep;
  rep.gap_bound = gap_limit;
  rep.cycle_step = seed.max_step();
  if (rep.cycle_step > 2 * pi / (1 + pi * pi) + 1e-12)
    fail_validation("seed cycle steps exceed 2 pi / (1 + pi^2)");
  for (Point P : seed.points()) rep.y.push_back(phi.angle_of_arclength(map.arclength_of_angle(std::arg(P))));

  DyadicFamily fam;
  int n = 1;
  for (;; ++n) {
    if (n > cap) fail_numerical("no level up to " + std::to_string(cap) + " separates the cycle images");
    std::map<std::size_t, int> hits;
    bool ok = true;
    for (double y : rep.y)
      if (++hits[fam.arc_of(n, y)] > 1) ok = false;
    if (ok) break;
  }
  rep.separating_level = n;
  for (;; ++n) {
    if (n > cap) fail_numerical("xi gap bound not reached up to level " + std::to_string(cap));
    std::size_t m = DyadicFamily::count(n);
    double gap = 0;
    Point first = std::polar(1.0, xi_angle(phi, map, fam.angle(n, 0))), prev = first;
    for (std::size_t j = 1; j <= m; ++j) {
      Point cur = j == m ? first : std::polar(1.0, xi_angle(phi, map, fam.angle(n, j)));
      gap = std::max(gap, std::abs(cur - prev));
      prev = cur;
    }
    rep.max_gap = gap;
    if (gap <= gap_limit) break;
  }
  rep.n0 = n;
  return rep;
}

CrosscutSystem build_crosscuts(const DyadicFamily &family, const BoundaryParam &phi, const RiemannMap &map,
                               int samples)
{
  if (family.n0 < 1 || family.n_max < family.n0) fail_validation("need 1 <= n0 <= n_max");
  if (family.n_max > 16) fail_validation("n_max above 16 is not supported");
  if (samples < 3) fail_validation("crosscuts need at least 3 samples");
  CrosscutSystem sys;
  sys.family = family;
  sys.phi = &phi;
  sys.map = &map;
  for (int n = family.n0; n <= family.n_max; ++n) {
    std::size_t m = DyadicFamily::count(n);
    std::vector<double> xa(m + 1);
    for (std::size_t j = 0; j <= m; ++j) xa[j] = j == m ? xa[0] : xi_angle(phi, map, family.angle(n, j));
    std::vector<Crosscut> level(m);
    for (std::size_t j = 0; j < m; ++j) {
      Crosscut &c = level[j];
      c.n = n;
      c.j = j;
      c.theta1 = family.angle(n, j);
      c.theta2 = family.angle(n, j + 1);
      c.xi1 = std::polar(1.0, xa[j]);
      c.xi2 = std::polar(1.0, xa[j + 1]);
      sys.max_xi_gap = std::max(sys.max_xi_gap, std::abs(c.xi2 - c.xi1));
      DiskGeodesic g(c.xi1, c.xi2);
      auto pts = g.sample(samples);
      c.path.resize(pts.size());
      c.path.front() = phi(c.theta1);
      c.path.back() = phi(c.theta2);
      for (std::size_t k = 1; k + 1 < pts.size(); ++k) c.path[k] = map.forward(pts[k]);
      c.length = polyline_length(c.path);
    }
    sys.levels.push_back(std::move(level));
  }
  return sys;
}

DisjointnessReport check_disjointness(const CrosscutSystem &sys)
{
  DisjointnessReport rep;
  double floor_r = 1e-6 * sys.map->domain().diameter();
  std::vector<const Crosscut *> cuts;
  std::vector<Segment> segs;
  std::vector<std::uint32_t> owner;
  std::vector<double> contact;
  for (auto &lvl : sys.levels)
    for (auto &c : lvl) {
      auto id = (std::uint32_t)cuts.size();
      cuts.push_back(&c);
      std::size_t k = c.path.size();
      double end_len = std::max(std::abs(c.path[1] - c.path[0]), std::abs(c.path[k - 1] - c.path[k - 2]));
      contact.push_back(std::max(floor_r, 2 * end_len));
      for (std::size_t s = 0; s + 1 < k; ++s) {
        segs.push_back({c.path[s], c.path[s + 1]});
        owner.push_back(id);
      }
    }
  rep.crosscuts = cuts.size();
  rep.segments = segs.size();
  SegmentIndex idx(segs, 1.0);
  std::set<std::pair<std::size_t, std::size_t>> bad;
  idx.for_each_close_pair([&](std::size_t a, std::size_t b) {
    std::uint32_t oa = owner[a], ob = owner[b];
    if (oa == ob) return true;
    const Segment &sa = segs[a], &sb = segs[b];
    if (!segments_intersect(sa.a, sa.b, sb.a, sb.b, 0.0)) return true;
    const Crosscut &ca = *cuts[oa], &cb = *cuts[ob];
    double r = std::max(contact[oa], contact[ob]);
    Point ea[2] = {ca.path.front(), ca.path.back()}, eb[2] = {cb.path.front(), cb.path.back()};
    for (Point e : ea)
      for (Point f : eb)
        if (std::abs(e - f) <= floor_r && point_segment_distance(e, sa.a, sa.b) <= r &&
            point_segment_distance(e, sb.a, sb.b) <= r)
          return true;
    auto key = std::make_pair(std::min<std::size_t>(oa, ob), std::max<std::size_t>(oa, ob));
    if (bad.insert(key).second && rep.first_offender.empty()) {
      rep.first_offender = "crosscut (" + std::to_string(ca.n) + "," + std::to_string(ca.j) + ") meets (" +
                           std::to_string(cb.n) + "," + std::to_string(cb.j) + ")";
    }
    return true;
  });
  rep.crossings = bad.size();
  return rep;
}

double lemma21_constant(double q)
{
  if (!(q > 1)) fail_validation("the crosscut constant needs q > 1");
  double c1sq = 72 * pi * std::exp(6 * std::sqrt(2.0) * pi) / std::pow(std::log(2.0), q);
  return 4 * c1sq * boost::math::zeta(q);
}

Lemma21Report lemma21_check(const CrosscutSystem &sys, int n, std::size_t j, double q, double h_main)
{
  if (!(h_main > 0)) fail_validation("grid spacing must be positive");
  const Crosscut &c = sys.at(n, j);
  const JordanDomain &dom = sys.phi->domain();
  const RiemannMap &map = *sys.map;
  Lemma21Report rep;
  rep.n = n;
  rep.j = j;
  rep.q = q;
  rep.c_q = lemma21_constant(q);
  rep.xi_gap = std::abs(c.xi2 - c.xi1);
  rep.hypothesis = rep.xi_gap <= gap_limit;
  rep.length = c.length;

  double P = dom.perimeter();
  double sa = sys.phi->arclength_at(c.theta1), sb = sys.phi->arclength_at(c.theta2);
  while (sb <= sa) sb += P;
  std::vector<std::pair<double, Point>> between;
  for (std::size_t i = 0; i < dom.size(); ++i)
    for (double s : {dom.vertex_arclength(i), dom.vertex_arclength(i) + P, dom.vertex_arclength(i) - P})
      if (s > sa && s < sb) between.push_back({s, dom.vertices()[i]});
  std::sort(between.begin(), between.end(), [](auto &x, auto &y) { return x.first < y.first; });
  std::vector<Point> delta;
  delta.push_back(c.path.front());
  for (auto &b : between) delta.push_back(b.second);
  for (std::size_t k = c.path.size() - 1; k >= 1; --k) delta.push_back(c.path[k]);

  double area = std::abs(signed_area(delta));
  rep.spacing = std::min(h_main / 4, std::sqrt(area) / 32);
  Box bx = bounding_box(delta);
  long double acc = 0;
  if (rep.spacing > 0) {
    int ni = (int)std::ceil(bx.width() / rep.spacing), nj = (int)std::ceil(bx.height() / rep.spacing);
    for (int jj = 0; jj < nj; ++jj)
      for (int ii = 0; ii < ni; ++ii) {
        Point z{bx.x0 + (ii + 0.5) * rep.spacing, bx.y0 + (jj + 0.5) * rep.spacing};
        if (!crossing_test(delta, z)) continue;
        double r = std::abs(map.inverse(z));
        if (!(r < 1)) continue;
        double h = std::log((1 + r) / (1 - r));
        acc += std::pow((long double)h, (long double)q);
        ++rep.nodes;
      }
  }
  rep.integral = (double)(acc * (long double)(rep.spacing * rep.spacing));
  rep.inconclusive = rep.nodes < 16;
  rep.ratio = rep.integral > 0 ? rep.length * rep.length / rep.integral : inf;
  rep.holds = !rep.inconclusive && rep.length * rep.length <= rep.c_q * rep.integral;
  return rep;
}

SeriesReport series_from_lengths(int n0, const std::vector<std::vector<double>> &lengths, double p)
{
  if (!(p >= 1 && p < 2)) fail_validation("series exponent p must lie in [1, 2)");
  SeriesReport rep;
  rep.p = p;
  double cum = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    SeriesLevel L;
    L.n = n0 + (int)i;
    long double sp = 0, s2 = 0;
    for (double l : lengths[i]) {
      sp += std::pow((long double)l, (long double)p);
      s2 += (long double)l * l;
    }
    L.sum_lp = (double)sp;
    L.sum_l2 = (double)s2;
    L.term = std::exp2((p - 2) * L.n) * L.sum_lp;
    cum += L.term;
    L.cumulative = cum;
    L.ratio = i ? L.term / rep.levels.back().term : nan;
    rep.levels.push_back(L);
    rep.holder_m = std::max(rep.holder_m, L.sum_l2);
  }
  std::size_t k = rep.levels.size();
  rep.verdict = "inconclusive";
  rep.tail_bound = inf;
  if (k >= 4) {
    double rmax = 0, rmin = inf;
    for (std::size_t i = k - 3; i < k; ++i) {
      rmax = std::max(rmax, rep.levels[i].ratio);
      rmin = std::min(rmin, rep.levels[i].ratio);
    }
    rep.rate = rmax;
    if (rmax < 1) {
      rep.verdict = "convergent";
      rep.tail_bound = rep.levels.back().term * rmax / (1 - rmax);
    } else if (rmin >= 1) {
      rep.verdict = "divergent_trend";
    }
  }
  rep.total_bound = cum + rep.tail_bound;
  double hs = 0;
  for (auto &L : rep.levels) {
    double t = std::exp2(L.n * (p / 2 - 1)) * std::pow(rep.holder_m, p / 2);
    rep.holder_terms.push_back(t);
    hs += t;
  }
  double g = std::exp2(p / 2 - 1);
  if (!rep.holder_terms.empty()) hs += rep.holder_terms.back() * g / (1 - g);
  rep.holder_sum = hs;
  return rep;
}

SeriesReport series_check(const CrosscutSystem &sys, double p)
{
  std::vector<std::vector<double>> len;
  for (auto &lvl : sys.levels) {
    len.emplace_back();
    for (auto &c : lvl) len.back().push_back(c.length);
  }
  return series_from_lengths(sys.family.n0, len, p);
}

json to_json(const N0Report &r)
{
  return {{"n0", r.n0},
          {"separating_level", r.separating_level},
          {"y", r.y},
          {"max_xi_gap", r.max_gap},
          {"gap_bound", r.gap_bound},
          {"cycle_step", r.cycle_step}};
}

json to_json(const Lemma21Report &r)
{
  return {{"n", r.n},           {"j", r.j},
          {"q", r.q},           {"xi_gap", r.xi_gap},
          {"hypothesis", r.hypothesis}, {"length", r.length},
          {"length_sq", r.length * r.length}, {"integral", r.integral},
          {"c_q", r.c_q},       {"ratio", number_json(r.ratio)},
          {"nodes", r.nodes},   {"spacing", r.spacing},
          {"inconclusive", r.inconclusive}, {"holds", r.holds}};
}

json to_json(const SeriesReport &r)
{
  json lv = json::array();
  for (auto &L : r.levels)
    lv.push_back({{"n", L.n},
                  {"sum_lp", L.sum_lp},
                  {"sum_l2", L.sum_l2},
                  {"term", L.term},
                  {"cumulative", L.cumulative},
                  {"ratio", number_json(L.ratio)}});
  return {{"p", r.p},
          {"levels", lv},
          {"verdict", r.verdict},
          {"rate", r.rate},
          {"tail_bound", number_json(r.tail_bound)},
          {"total_bound", number_json(r.total_bound)},
          {"holder", {{"M", r.holder_m}, {"terms", r.holder_terms}, {"sum", r.holder_sum}}}};
}

json to_json(const DisjointnessReport &r)
{
  return {{"crosscuts", r.crosscuts},
          {"segments", r.segments},
          {"crossings", r.crossings},
          {"first_offender", r.first_offender}};
}

} // namespace sobext
