#include "sobext/counterexample.hpp"

#include "sobext/error.hpp"
#include "sobext/metric.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sobext {

namespace {

constexpr double pi = 3.14159265358979323846;

Point right_normal(Point d) { return {d.imag(), -d.real()}; }

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

int two_adic(unsigned v)
{
  int n = 0;
  while ((v & 1u) == 0) {
    v >>= 1;
    ++n;
  }
  return n;
}

} // namespace

// ---------------------------------------------------------------- SVC

double SVCSet::radius(int k) { return std::ldexp(0.5, -2 * k); }

double SVCSet::center(int k, int j) const { return interval(k - 1, j).mid(); }

double SVCSet::removed_measure() const
{
  double s = 0;
  for (int n = 1; n <= depth; ++n)
    for (std::size_t i = 0; i + 1 < levels[n].size(); i += 2) s += levels[n][i + 1].a - levels[n][i].b;
  return s;
}

SVCSet build_svc(int depth)
{
  if (depth < 0 || depth > 20) fail_validation("SVC depth must lie in [0, 20], got " + std::to_string(depth));
  SVCSet s;
  s.depth = depth;
  s.levels.push_back({{0.0, 1.0}});
  for (int n = 1; n <= depth; ++n) {
    std::vector<Interval1> next;
    next.reserve(2 * s.levels.back().size());
    double r = SVCSet::radius(n);
    for (auto &I : s.levels.back()) {
      double R = I.mid();
      next.push_back({I.a, R - r});
      next.push_back({R + r, I.b});
    }
    s.levels.push_back(std::move(next));
  }
  return s;
}

double svc_removed_closed_form(int depth)
{
  // sum 2^{n-1} 4^{-n} = sum 2^{-n-1}
  return 0.5 * (1.0 - std::ldexp(1.0, -depth));
}

// ---------------------------------------------------------------- pieces and branches

Point CorePiece::chord(double u1, double u2) const { return step(u1, u2 - u1); }

Point CorePiece::step(double u1, double d) const
{
  if (curvature == 0) return dir * d;
  Point t1 = dir * std::polar(1.0, curvature * u1);
  return t1 * std::polar(d * sinc(0.5 * curvature * d), 0.5 * curvature * d);
}

Point CorePiece::position(double u) const { return a + chord(0.0, u); }

Point CorePiece::tangent(double u) const { return curvature == 0 ? dir : dir * std::polar(1.0, curvature * u); }

double rounding_radius(int k) { return std::ldexp(1.0, -2 * k - 3); }

std::size_t Branch::piece_at(double u) const
{
  std::size_t lo = 0, hi = pieces.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (pieces[mid].u0 <= u)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

Point Branch::position(double u) const
{
  if (u <= 0) return start;
  if (u >= length) return r;
  auto &pc = pieces[piece_at(u)];
  return pc.position(u - pc.u0);
}

Point Branch::tangent(double u) const
{
  if (u <= 0) return pieces.front().dir;
  if (u >= length) return {0.0, -1.0};
  auto &pc = pieces[piece_at(u)];
  return pc.tangent(u - pc.u0);
}

std::vector<double> Branch::samples(double u0, double u1, int arc_samples, double max_step) const
{
  std::vector<double> out{u0};
  for (auto &pc : pieces) {
    double a = pc.u0, b = pc.u0 + pc.length;
    if (b <= u0 || a >= u1) continue;
    int n = pc.curvature == 0 ? std::max(1, (int)std::ceil(pc.length / max_step))
                              : std::max(1, (int)std::ceil(arc_samples * pc.length * std::abs(pc.curvature) / (0.5 * pi) - 1e-9));
    for (int i = 0; i <= n; ++i) {
      double u = i == n ? b : a + pc.length * i / n;
      if (u > u0 && u < u1) out.push_back(u);
    }
  }
  out.push_back(u1);
  std::sort(out.begin(), out.end());
  // merge values closer than a rounding error of the branch parameter
  std::vector<double> res;
  for (double u : out)
    if (res.empty() || u - res.back() > 1e-13) res.push_back(u);
  if (res.back() != u1) res.back() = u1;
  return res;
}

std::vector<Point> Branch::polyline(int arc_samples) const
{
  std::vector<Point> pts;
  for (double u : samples(0.0, length, arc_samples)) pts.push_back(position(u));
  return pts;
}

namespace {

Branch make_branch(const SVCSet &svc, int k, int j, Point p0)
{
  Branch b;
  b.k = k;
  b.j = j;
  const Interval1 &I = svc.interval(k, j);
  double m = I.mid();
  double yp = std::ldexp(1.0, -k), yq = std::ldexp(1.0, -k - 1);
  double rho = rounding_radius(k), s = 2 * rho;
  int N = 1 << (k + 1);
  b.p = {m, yp};
  b.q = {m, yq};
  b.r = b.q + Point(0.0, rho);
  b.half_width = 0.5 * I.length();
  b.raw_length = std::ldexp(1.0, -k - 1) + 2 * b.half_width * (N - 2);

  std::vector<Point> V;
  std::vector<double> rad;
  double mpar, A;
  if (k == 1) {
    mpar = p0.real();
    b.start = p0;
    V = {p0};
    A = std::abs(m - mpar) - rho;
  } else {
    mpar = svc.interval(k - 1, (j + 1) / 2).mid();
    double rp = rounding_radius(k - 1);
    Point qpar{mpar, yp};
    b.start = qpar + Point(0.0, rp);
    V = {b.start, qpar};
    rad = {rp};
    A = 0.5 * pi * rp + std::abs(m - mpar) - rp - rho;
  }
  double e = m < mpar ? -1.0 : 1.0;
  // unit length fixes the push
  double P = (1.0 - A - 0.5 * pi * rho * (2 * N - 1) + 2 * rho * (N - 1)) / (2.0 * (N - 2));
  if (!(P >= 2 * rho) || !(P < b.half_width))
    fail_numerical("snake push " + std::to_string(P) + " for branch (" + std::to_string(k) + "," + std::to_string(j) +
                   ") leaves [2 rho, half width)");
  b.push = P;
  auto x = [&](int i) { return (i == 1 || i == N) ? 0.0 : (i % 2 == 0 ? e : -e) * P; };
  V.push_back(b.p);
  rad.push_back(rho);
  for (int i = 1; i < N; ++i) {
    double y = yp - i * s;
    V.push_back({m + x(i), y});
    rad.push_back(rho);
    V.push_back({m + x(i + 1), y});
    rad.push_back(rho);
  }
  V.push_back(b.r);

  Point cur = V.front();
  double u = 0;
  auto add = [&](Point a, Point dir, double len, double curv) {
    b.pieces.push_back({a, dir, len, curv, u});
    u += len;
  };
  for (std::size_t i = 1; i + 1 < V.size(); ++i) {
    Point din = V[i] - V[i - 1], dout = V[i + 1] - V[i];
    din /= std::abs(din);
    dout /= std::abs(dout);
    double rc = rad[i - 1];
    Point t1 = V[i] - rc * din;
    double len = std::abs(t1 - cur);
    if (len > 1e-14) add(cur, din, len, 0.0);
    add(t1, din, 0.5 * pi * rc, (cross(din, dout) > 0 ? 1.0 : -1.0) / rc);
    cur = V[i] + rc * dout;
  }
  double len = std::abs(V.back() - cur);
  if (len > 1e-14) add(cur, (V.back() - cur) / len, len, 0.0);
  b.length = u;
  return b;
}

} // namespace

TreeCurve build_tree_curve(int depth)
{
  if (depth < 1 || depth > 10) fail_validation("tree depth must lie in [1, 10], got " + std::to_string(depth));
  TreeCurve t;
  t.depth = depth;
  t.svc = build_svc(depth);
  t.p0 = {0.5, 0.5};
  for (int k = 1; k <= depth; ++k) {
    std::vector<Branch> lev;
    for (int j = 1; j <= (1 << k); ++j) lev.push_back(make_branch(t.svc, k, j, t.p0));
    t.levels.push_back(std::move(lev));
  }
  return t;
}

TreeCheck verify_tree(const TreeCurve &tree, int arc_samples)
{
  TreeCheck c;
  c.raw_length_min = std::numeric_limits<double>::infinity();
  std::vector<Segment> segs;
  std::vector<std::uint32_t> owner, local;
  std::uint32_t id = 0;
  for (auto &lev : tree.levels)
    for (auto &b : lev) {
      c.max_length_error = std::max(c.max_length_error, std::abs(b.length - 1.0));
      c.sampled_length_error = std::max(c.sampled_length_error, std::abs(polyline_length(b.polyline(12)) - 1.0));
      c.raw_length_min = std::min(c.raw_length_min, b.raw_length);
      c.raw_length_max = std::max(c.raw_length_max, b.raw_length);
      c.max_branch_offset = std::max(c.max_branch_offset, std::abs(b.r - b.q) / rounding_radius(b.k));
      auto pl = b.polyline(arc_samples);
      for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
        segs.push_back({pl[i], pl[i + 1]});
        owner.push_back(id);
        local.push_back((std::uint32_t)i);
      }
      ++id;
    }
  c.segments = segs.size();
  SegmentIndex idx(segs);
  std::size_t first_i = segs.size(), first_j = 0;
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  idx.for_each_close_pair([&](std::size_t i, std::size_t j) {
    if (owner[i] == owner[j] && (local[i] + 1 == local[j] || local[j] + 1 == local[i])) return true;
    auto &a = segs[i], &b = segs[j];
    // branches meet only at shared endpoints
    if (a.a == b.a || a.a == b.b || a.b == b.a || a.b == b.b) return true;
    if (segments_intersect(a.a, a.b, b.a, b.b, 0.0)) {
      seen.push_back({std::min(i, j), std::max(i, j)});
      if (first_i == segs.size()) {
        first_i = i;
        first_j = j;
      }
    }
    return true;
  });
  std::sort(seen.begin(), seen.end());
  c.crossings = (std::size_t)(std::unique(seen.begin(), seen.end()) - seen.begin());
  if (c.crossings > 0) {
    Point at = segs[first_i].a;
    fail_validation("tree core crosses itself near (" + std::to_string(at.real()) + ", " + std::to_string(at.imag()) +
                    "), segments " + std::to_string(first_i) + " and " + std::to_string(first_j));
  }
  return c;
}

// ---------------------------------------------------------------- widths and fingers

int choose_M(int depth)
{
  if (depth < 1) fail_validation("choose_M needs depth >= 1");
  for (int M = 1;; ++M) {
    bool ok = true;
    for (int k = 1; k <= depth + 1 && ok; ++k) ok = -M - std::exp(k - 1.0) <= -(2.0 * k + 6.0) * std::log(2.0);
    if (ok) return M;
  }
}

double finger_width(double t, double M) { return std::exp(-M - std::exp(t)); }

double rendered_width(double t, double M) { return std::max(finger_width(t, M), std::exp2(-(2 * t + 12))); }

std::vector<int> branch_sequence(int K, int j)
{
  if (K < 1 || j < 1 || j > (1 << K)) fail_validation("leaf (" + std::to_string(K) + "," + std::to_string(j) + ") does not exist");
  std::vector<int> J(K);
  J[K - 1] = j;
  for (int k = K - 1; k >= 1; --k) J[k - 1] = (J[k] + 1) / 2;
  return J;
}

namespace {

struct Locus {
  int k;
  double u;
};

Locus locate(const Finger &f, double t)
{
  int k = std::clamp((int)std::ceil(t), 1, f.K);
  return {k, (t - (k - 1)) * f.branch(k).length};
}

// displacement and end tangent after moving dt along the core from t
std::pair<Point, Point> advance(const Finger &f, double t, double dt)
{
  Locus L = locate(f, t);
  const Branch *b = &f.branch(L.k);
  std::size_t pi_ = b->piece_at(L.u);
  double u = L.u, rem = dt;
  Point disp = 0;
  for (int guard = 0; guard < 1 << 20; ++guard) {
    const CorePiece &pc = b->pieces[pi_];
    double lo = pc.u0, hi = pc.u0 + pc.length;
    double target = u + rem;
    if ((rem >= 0 && target <= hi) || (rem < 0 && target >= lo) || (rem >= 0 && pi_ + 1 == b->pieces.size() && L.k == f.K) ||
        (rem < 0 && pi_ == 0 && L.k == 1)) {
      disp += pc.step(u - lo, rem);
      return {disp, pc.tangent(u - lo + rem)};
    }
    double edge = rem >= 0 ? hi : lo;
    disp += pc.chord(u - lo, edge - lo);
    rem -= edge - u;
    if (rem >= 0) {
      if (pi_ + 1 < b->pieces.size())
        ++pi_;
      else {
        ++L.k;
        b = &f.branch(L.k);
        pi_ = 0;
      }
      u = b->pieces[pi_].u0;
    } else {
      if (pi_ > 0)
        --pi_;
      else {
        --L.k;
        b = &f.branch(L.k);
        pi_ = b->pieces.size() - 1;
      }
      u = b->pieces[pi_].u0 + b->pieces[pi_].length;
    }
  }
  fail_numerical("core walk did not terminate");
}

} // namespace

Point Finger::core(double t) const
{
  Locus L = locate(*this, t);
  return branch(L.k).position(L.u);
}

Point Finger::tangent(double t) const
{
  Locus L = locate(*this, t);
  return branch(L.k).tangent(L.u);
}

double Finger::curvature(double t) const
{
  Locus L = locate(*this, t);
  auto &b = branch(L.k);
  return b.pieces[b.piece_at(L.u)].curvature;
}

Point Finger::displacement(double t, double dt) const { return advance(*this, t, dt).first; }

Finger offset_finger(const TreeCurve &tree, const std::vector<int> &J, double M, int K, bool verify)
{
  if (K < 1 || K > tree.depth) fail_validation("finger depth " + std::to_string(K) + " exceeds the tree depth");
  if ((int)J.size() < K) fail_validation("branch sequence shorter than the finger depth");
  if (J[0] < 1 || J[0] > 2) fail_validation("j_1 must be 1 or 2");
  for (int k = 1; k < K; ++k)
    if (J[k - 1] != (J[k] + 1) / 2 || J[k] < 1 || J[k] > (1 << (k + 1)))
      fail_validation("branch sequence is not consistent at level " + std::to_string(k + 1));
  Finger f;
  f.J.assign(J.begin(), J.begin() + K);
  f.M = M;
  f.K = K;
  f.tree = &tree;
  for (int k = 1; k <= K; ++k) {
    auto &b = f.branch(k);
    auto us = b.samples(0.0, b.length);
    for (std::size_t i = (k == 1 ? 0 : 1); i < us.size(); ++i) {
      double t = i + 1 == us.size() ? (double)k : (k - 1) + us[i] / b.length;
      FingerSample s{t, b.position(us[i]), b.tangent(us[i])};
      f.samples.push_back(s);
      double w = rendered_width(t, M);
      f.x1.push_back(s.core + w * right_normal(s.tangent));
      f.x2.push_back(s.core - w * right_normal(s.tangent));
    }
  }
  if (verify) {
    std::vector<Segment> segs;
    std::size_t n = f.x1.size();
    for (std::size_t i = 0; i + 1 < n; ++i) segs.push_back({f.x1[i], f.x1[i + 1]});
    for (std::size_t i = 0; i + 1 < n; ++i) segs.push_back({f.x2[i], f.x2[i + 1]});
    SegmentIndex idx(segs);
    std::size_t m = n - 1, bad = segs.size();
    idx.for_each_close_pair([&](std::size_t i, std::size_t j) {
      if (j == i + 1 && (i + 1) % m != 0) return true;
      auto &a = segs[i], &b = segs[j];
      if (segments_intersect(a.a, a.b, b.a, b.b, 0.0)) {
        bad = std::min(i, j);
        return false;
      }
      return true;
    });
    if (bad < segs.size()) {
      std::size_t s = bad % m;
      fail_validation("finger offsets intersect for t in [" + std::to_string(f.samples[s].t) + ", " +
                      std::to_string(f.samples[s + 1].t) + "]");
    }
  }
  return f;
}

// ---------------------------------------------------------------- assembly

namespace {

struct Assembler {
  const TreeCurve &tree;
  double M;
  int K;
  std::vector<Point> out;
  std::vector<BoundaryAnchor> anchors;
  std::vector<double> tau; // crotch time offset below the children of level k

  void push(Point p)
  {
    if (!out.empty() && std::abs(p - out.back()) <= 1e-13) return;
    out.push_back(p);
  }

  Point side_point(const Branch &b, double u, double t, int side) const
  {
    double w = rendered_width(t, M);
    return b.position(u) + side * w * right_normal(b.tangent(u));
  }

  // samples of branch b over global times [ta, tb]
  std::vector<std::pair<double, double>> times(const Branch &b, double ta, double tb) const
  {
    double k0 = b.k - 1;
    auto us = b.samples((ta - k0) * b.length, (tb - k0) * b.length);
    std::vector<std::pair<double, double>> r;
    for (std::size_t i = 0; i < us.size(); ++i) {
      double t = i == 0 ? ta : i + 1 == us.size() ? tb : k0 + us[i] / b.length;
      double u = t == b.k ? b.length : us[i];
      r.push_back({u, t});
    }
    return r;
  }

  Point crotch(const Branch &b) const
  {
    double rho = rounding_radius(b.k), w = rendered_width(b.k + tau[b.k], M);
    return {b.q.real(), b.r.imag() - std::sqrt((rho + w) * (rho + w) - rho * rho)};
  }

  void walk(int k, int j, double t_from, double t_to, bool crotch_start, bool crotch_end)
  {
    const Branch &b = tree.branch(k, j);
    auto plus = times(b, t_from, k);
    for (std::size_t i = 0; i < plus.size(); ++i) {
      if (i == 0 && crotch_start)
        push(crotch(tree.branch(k - 1, (j + 1) / 2)));
      else
        push(side_point(b, plus[i].first, plus[i].second, 1));
    }
    anchors.push_back({k, j, 1, out.size() - 1, out.back()});
    if (k < K) {
      double tc = k + tau[k];
      walk(k + 1, 2 * j - 1, k, tc, false, true);
      walk(k + 1, 2 * j, tc, k, true, false);
    }
    auto minus = times(b, t_to, k);
    for (std::size_t i = minus.size(); i-- > 0;) {
      if (i == 0 && crotch_end)
        push(crotch(tree.branch(k - 1, (j + 1) / 2)));
      else
        push(side_point(b, minus[i].first, minus[i].second, -1));
      if (i + 1 == minus.size()) anchors.push_back({k, j, -1, out.size() - 1, out.back()});
    }
  }
};

} // namespace

CounterexampleDomain assemble_domain(const TreeCurve &tree, double M, int K, bool validate)
{
  if (K < 1 || K > tree.depth) fail_validation("truncation depth must lie in [1, tree depth]");
  Assembler as{tree, M, K, {}, {}, std::vector<double>(K + 1, 0.0)};
  for (int k = 1; k < K; ++k) {
    double rho = rounding_radius(k), tc = 0;
    for (int it = 0; it < 60; ++it) tc = rho * std::acos(rho / (rho + rendered_width(k + tc, M)));
    as.tau[k] = tc;
  }
  as.walk(1, 1, 0.0, 0.0, false, false);
  as.walk(1, 2, 0.0, 0.0, false, false);
  if (std::abs(as.out.back() - as.out.front()) <= 1e-13) as.out.pop_back();

  CounterexampleDomain d;
  d.K = K;
  d.M = M;
  d.p0 = tree.p0;
  d.p0_plus = as.out.front();
  d.anchors.push_back({0, 0, 0, 0, d.p0_plus});
  for (auto &a : as.anchors) d.anchors.push_back(a);
  for (int k = 1; k <= K; ++k) d.area_bound += std::ldexp(2.0 * rendered_width(k - 1, M), k);
  d.domain = JordanDomain(std::move(as.out), 2 * rendered_width(K, M), validate);
  if (!d.domain.contains(d.p0)) fail_validation("assembled domain does not contain p0");
  return d;
}

// ---------------------------------------------------------------- parametrization

CounterexampleParam::CounterexampleParam(const CounterexampleDomain &dom, const SVCSet &svc) : dom_(&dom)
{
  int K = dom.K;
  if (svc.depth < K) fail_validation("SVC depth " + std::to_string(svc.depth) + " is below the truncation depth");
  auto sigma_of = [&](const BoundaryAnchor &a, std::string &rule) -> double {
    if (a.side == 0) {
      rule = "root";
      return -1.0;
    }
    unsigned i = (unsigned)a.j;
    if (a.side > 0 && i == 1) {
      rule = "(1)";
      return -std::ldexp(1.0, -a.k);
    }
    if (a.side < 0 && i == (1u << a.k)) {
      rule = "(2)";
      return 1.0 + std::ldexp(1.0, -a.k);
    }
    unsigned v = a.side > 0 ? i - 1 : i;
    int n = two_adic(v) + 1;
    int jj = (int)(((v >> (n - 1)) + 1) / 2);
    int kk = a.k - n + 1;
    rule = "(3)";
    double off = (1.0 - std::ldexp(1.0, -n)) * SVCSet::radius(kk);
    return svc.center(kk, jj) + (a.side > 0 ? off : -off);
  };
  for (auto &a : dom.anchors) {
    ParamAnchor pa;
    pa.anchor = a;
    pa.sigma = sigma_of(a, pa.rule);
    pa.s = dom.domain.vertex_arclength(a.vertex);
    // designated tip from the SVC data: r_{k,j} = q_{k,j} + (0, rho_k), moved across the finger
    if (a.side == 0) {
      pa.designated = dom.p0 + rendered_width(0.0, dom.M) * Point(0.0, 1.0);
    } else {
      Point r = Point(svc.interval(a.k, a.j).mid(), std::ldexp(1.0, -a.k - 1)) + Point(0.0, rounding_radius(a.k));
      pa.designated = r + a.side * rendered_width(a.k, dom.M) * Point(-1.0, -0.0);
    }
    if (!anchors_.empty() && !(pa.sigma > anchors_.back().sigma && pa.s > anchors_.back().s))
      fail_numerical("anchor parameters overlap at level " + std::to_string(a.k) + ", j = " + std::to_string(a.j));
    anchors_.push_back(pa);
  }
  ParamAnchor end = anchors_.front();
  end.sigma = 2.0;
  end.s = dom.domain.perimeter();
  end.rule = "root";
  anchors_.push_back(end);
  for (auto &I : svc.levels[K]) cantor_measure_ += I.length();
}

Point CounterexampleParam::operator()(double sigma) const
{
  if (!(sigma >= -1.0 && sigma <= 2.0)) fail_validation("parameter outside [-1, 2]");
  auto it = std::upper_bound(anchors_.begin(), anchors_.end(), sigma,
                             [](double s, const ParamAnchor &a) { return s < a.sigma; });
  auto &a = *(it - 1);
  if (sigma == a.sigma) return a.anchor.point;
  auto &b = *it;
  double s = a.s + (sigma - a.sigma) / (b.sigma - a.sigma) * (b.s - a.s);
  return dom_->domain.point_at(s);
}

BoundaryParam CounterexampleParam::circle_param() const
{
  std::vector<double> th, s;
  for (std::size_t i = 0; i + 1 < anchors_.size(); ++i) {
    th.push_back(angle_of_parameter(anchors_[i].sigma));
    s.push_back(anchors_[i].s);
  }
  return BoundaryParam(dom_->domain, th, s, "counterexample");
}

std::size_t CounterexampleParam::anchor_mismatches() const
{
  std::size_t bad = 0;
  for (auto &a : anchors_)
    if ((*this)(a.sigma) != a.designated) ++bad;
  return bad;
}

CounterexampleParam build_boundary_param(const CounterexampleDomain &dom, const SVCSet &svc)
{
  return CounterexampleParam(dom, svc);
}

// ---------------------------------------------------------------- integrability

double model_shell_integral(int k, double M)
{
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [](double t) {
    double et = std::exp(t);
    if (et - 1.0 <= 0) return 0.0;
    auto f = [et](double u) { return std::exp(-u) / (et - u); };
    return 2.0 * gauss_kronrod<double, 31>::integrate(f, 0.0, et - 1.0, 12, 1e-12);
  };
  auto shell = [&](double t) { return inner(t) + 2.0 * finger_width(t, M); };
  return gauss_kronrod<double, 31>::integrate(shell, k - 1.0, (double)k, 12, 1e-11);
}

IntegrabilityReport verify_integrability(const CounterexampleDomain &dom, const TreeCurve &tree, double h, int neighbors)
{
  if (!(h > 0)) fail_validation("grid spacing must be positive");
  IntegrabilityReport rep;
  rep.h = h;
  int K = dom.K;
  // a shell is resolved when its thinnest finger spans 8 grid steps
  while (rep.resolvable_depth < K && 2 * finger_width(rep.resolvable_depth + 1.0, dom.M) >= 8 * h) ++rep.resolvable_depth;

  std::vector<double> grid_total(K + 1, 0.0);
  std::vector<std::size_t> grid_nodes(K + 1, 0);
  if (rep.resolvable_depth > 0) {
    // shells past the resolvable depth come from the model, so the grid may under-resolve them
    JordanDomain coarse(dom.domain.vertices(), h, false);
    MetricGrid grid(coarse, h);
    auto field = quasihyperbolic_field(grid, dom.p0, neighbors);
    rep.grid_nodes = grid.size();
    // depth of a node = core time of the nearest core point
    std::vector<Segment> segs;
    std::vector<std::pair<double, double>> ts;
    for (int k = 1; k <= K; ++k)
      for (auto &b : tree.levels[k - 1]) {
        auto us = b.samples(0.0, b.length, 6);
        for (std::size_t i = 0; i + 1 < us.size(); ++i) {
          segs.push_back({b.position(us[i]), b.position(us[i + 1])});
          ts.push_back({k - 1 + us[i] / b.length, k - 1 + us[i + 1] / b.length});
        }
      }
    SegmentIndex core(segs);
    std::vector<long double> acc(K + 1, 0.0L);
    for (std::size_t n = 0; n < grid.size(); ++n) {
      if (!field.reached[n]) continue;
      auto hit = core.nearest(grid.position(n));
      double t = ts[hit.seg].first + hit.t * (ts[hit.seg].second - ts[hit.seg].first);
      int k = std::clamp((int)std::ceil(t), 1, K);
      acc[k] += field.values[n];
      grid_nodes[k]++;
    }
    for (int k = 1; k <= K; ++k) grid_total[k] = (double)(acc[k] * h * h);
  }
  double prev = 0;
  for (int k = 1; k <= K; ++k) {
    ShellTotal s;
    s.k = k;
    if (k <= rep.resolvable_depth) {
      s.source = "grid";
      s.total = grid_total[k];
      s.nodes = grid_nodes[k];
    } else {
      s.source = "model";
      s.total = std::ldexp(model_shell_integral(k, dom.M), k);
    }
    s.ratio = k == 1 ? 0.0 : s.total / prev;
    prev = s.total;
    rep.shells.push_back(s);
  }
  double q = 2.0 / std::exp(1.0);
  for (auto &s : rep.shells) {
    rep.cumulative += s.total;
    rep.series_constant = std::max(rep.series_constant, s.total / std::pow(q, s.k));
    if (s.k >= 2) rep.max_ratio = std::max(rep.max_ratio, s.ratio);
    if (s.k >= 3) rep.tail_max_ratio = std::max(rep.tail_max_ratio, s.ratio);
  }
  rep.cap = rep.series_constant * 2.0 / (std::exp(1.0) - 2.0);
  rep.ratios_ok = rep.max_ratio <= 0.8;
  rep.bounded = rep.cumulative <= rep.cap;
  return rep;
}

// ---------------------------------------------------------------- blow-up

BlowupReport blowup_report(const TreeCurve &tree, double M, int K, int u_levels)
{
  if (K < 1 || K > tree.depth) fail_validation("blow-up depth must lie in [1, tree depth]");
  if (u_levels < 3 || u_levels % 2 == 0) fail_validation("u_levels must be odd and at least 3");
  using boost::math::quadrature::gauss;
  BlowupReport rep;
  rep.K = K;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lam(u_levels);
  for (int i = 0; i < u_levels; ++i) lam[i] = -1.0 + 2.0 * i / (u_levels - 1);
  for (int leaf = 1; leaf <= (1 << K); ++leaf) {
    auto J = branch_sequence(K, leaf);
    BlowupTarget tg;
    tg.j = leaf;
    std::vector<double> dp(u_levels, inf), nx(u_levels);
    dp[u_levels / 2] = 0;
    double t_prev = 0;
    for (int k = 1; k <= K; ++k) {
      const Branch &b = tree.branch(k, J[k - 1]);
      for (auto &pc : b.pieces) {
        double t0 = k - 1 + pc.u0 / b.length, span = pc.length / b.length;
        double kap = std::abs(pc.curvature);
        auto gs = [&](double s) { return finger_width(t0 + s / b.length, M); };
        tg.certified += pc.length - (kap > 0 ? kap * gauss<double, 15>::integrate(gs, 0.0, pc.length) : 0.0);
        int n = kap > 0 ? 8 : std::max(1, (int)std::ceil(pc.length * 64));
        double ds = pc.length / n, sg = pc.curvature > 0 ? 1.0 : -1.0;
        for (int i = 1; i <= n; ++i) {
          double t1 = t0 + span * i / n;
          double ga = finger_width(t_prev, M), gb = finger_width(t1, M);
          for (int bi = 0; bi < u_levels; ++bi) {
            double best = inf, ub = gb * lam[bi];
            for (int ai = 0; ai < u_levels; ++ai) {
              if (dp[ai] == inf) continue;
              double ua = ga * lam[ai], c;
              if (kap == 0) {
                c = std::hypot(ds, ub - ua);
              } else {
                double A = 1.0 / kap + sg * ua, B = 1.0 / kap + sg * ub, sh = std::sin(0.5 * kap * ds);
                c = std::sqrt((A - B) * (A - B) + 4 * A * B * sh * sh);
              }
              best = std::min(best, dp[ai] + c);
            }
            nx[bi] = best;
          }
          dp.swap(nx);
          t_prev = t1;
        }
      }
    }
    tg.tube_path = *std::min_element(dp.begin(), dp.end());
    rep.targets.push_back(tg);
  }
  rep.min_certified = inf;
  rep.min_tube_path = inf;
  for (auto &t : rep.targets) {
    if (t.certified < rep.min_certified) {
      rep.min_certified = t.certified;
      rep.argmin = t.j;
    }
    rep.min_tube_path = std::min(rep.min_tube_path, t.tube_path);
  }
  return rep;
}

// ---------------------------------------------------------------- offset distance

OffsetDistanceReport verify_offset_distance(const Finger &f, std::size_t samples, std::uint64_t seed, double c_star)
{
  OffsetDistanceReport rep;
  rep.samples = samples;
  rep.c_star = c_star;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (std::size_t n = 0; n < samples; ++n) {
    double t = f.K * U(rng), lam = 2 * U(rng) - 1;
    double g = finger_width(t, f.M), r = lam * g, et = std::exp(t);
    if (g < 1e-290) {
      ++rep.skipped;
      continue;
    }
    Point n0 = right_normal(f.tangent(t));
    auto dist = [&](double sg, double dt) {
      auto [disp, tan] = advance(f, t, dt);
      double gd = g * std::exp(-et * std::expm1(dt));
      return std::abs(disp + sg * gd * right_normal(tan) - r * n0);
    };
    double lo = std::max(-t, -3 * g), hi = std::min(f.K - t, 3 * g);
    double d = std::numeric_limits<double>::infinity();
    for (double sg : {1.0, -1.0}) {
      const int m = 128;
      double step = (hi - lo) / m, best = 0, bv = std::numeric_limits<double>::infinity();
      for (int i = 0; i <= m; ++i) {
        double x = lo + step * i, v = dist(sg, x);
        if (v < bv) {
          bv = v;
          best = x;
        }
      }
      double a = std::max(lo, best - step), b = std::min(hi, best + step);
      const double gr = 0.5 * (std::sqrt(5.0) - 1);
      for (int it = 0; it < 60; ++it) {
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        if (dist(sg, x1) < dist(sg, x2))
          b = x2;
        else
          a = x1;
      }
      d = std::min({d, bv, dist(sg, 0.5 * (a + b))});
    }
    double ratio = d / (g - std::abs(r));
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio < 1.0 / c_star || ratio > c_star) ++rep.outside_band;
  }
  return rep;
}

// ---------------------------------------------------------------- output

json to_json(const IntegrabilityReport &r)
{
  json j;
  j["h"] = r.h;
  j["resolvable_depth"] = r.resolvable_depth;
  j["grid_nodes"] = r.grid_nodes;
  json sh = json::array();
  for (auto &s : r.shells)
    sh.push_back({{"k", s.k}, {"source", s.source}, {"total", number_json(s.total)}, {"ratio", number_json(s.ratio)},
                  {"nodes", s.nodes}});
  j["shells"] = sh;
  j["cumulative"] = number_json(r.cumulative);
  j["series_constant"] = number_json(r.series_constant);
  j["cap"] = number_json(r.cap);
  j["max_ratio"] = number_json(r.max_ratio);
  j["tail_max_ratio"] = number_json(r.tail_max_ratio);
  j["ratios_ok"] = r.ratios_ok;
  j["bounded"] = r.bounded;
  return j;
}

json to_json(const BlowupReport &r)
{
  json j;
  j["K"] = r.K;
  j["min_certified"] = number_json(r.min_certified);
  j["min_tube_path"] = number_json(r.min_tube_path);
  j["argmin_leaf"] = r.argmin;
  json t = json::array();
  for (auto &x : r.targets)
    t.push_back({{"leaf", x.j}, {"certified", number_json(x.certified)}, {"tube_path", number_json(x.tube_path)}});
  j["targets"] = t;
  return j;
}

json to_json(const OffsetDistanceReport &r)
{
  return {{"samples", r.samples},
          {"c_star", r.c_star},
          {"min_ratio", number_json(r.min_ratio)},
          {"max_ratio", number_json(r.max_ratio)},
          {"outside_band", r.outside_band},
          {"skipped", r.skipped}};
}

json to_json(const TreeCheck &r)
{
  return {{"segments", r.segments},
          {"crossings", r.crossings},
          {"max_length_error", r.max_length_error},
          {"sampled_length_error", r.sampled_length_error},
          {"raw_length_min", r.raw_length_min},
          {"raw_length_max", r.raw_length_max},
          {"max_branch_offset", r.max_branch_offset}};
}

void save_domain_svg(const CounterexampleDomain &dom, const TreeCurve &tree, const std::string &path)
{
  Box b = dom.domain.box();
  double pad = 0.03;
  Box view{b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad};
  const double px = 1000;
  SvgCanvas svg(view, px);
  double tol = 0.4 * (view.x1 - view.x0) / px;
  auto thin = [&](const std::vector<Point> &pts) {
    std::vector<Point> out;
    for (auto &p : pts)
      if (out.empty() || std::abs(p - out.back()) > tol) out.push_back(p);
    return out;
  };
  svg.polygon(thin(dom.domain.vertices()), "#c9dcef", "#1f4e79", 0.6);
  for (int k = 1; k <= dom.K; ++k)
    for (auto &br : tree.levels[k - 1]) svg.polyline(thin(br.polyline(4)), "#b03a2e", 0.4);
  svg.circle(dom.p0, 3, "#000000");
  svg.text(dom.p0 + Point(0.01, 0.01), "p0", 12);
  svg.save(path);
}

} // namespace sobext
