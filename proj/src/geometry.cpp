#include "sobext/geometry.hpp"
#include "sobext/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace sobext {

double point_segment_distance(Point p, Point a, Point b, double *t)
{
  Point d = b - a;
  double l2 = std::norm(d);
  double s = 0;
  if (l2 > 0) s = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
  if (t) *t = s;
  return std::abs(p - (a + s * d));
}

double segment_segment_distance(Point a, Point b, Point c, Point d)
{
  double o1 = cross(b - a, c - a), o2 = cross(b - a, d - a);
  double o3 = cross(d - c, a - c), o4 = cross(d - c, b - c);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
    return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

bool segments_intersect(Point a, Point b, Point c, Point d, double eps)
{
  return segment_segment_distance(a, b, c, d) <= eps;
}

double polyline_length(const std::vector<Point> &pts)
{
  double L = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) L += std::abs(pts[i] - pts[i - 1]);
  return L;
}

double signed_area(const std::vector<Point> &poly)
{
  // shoelace relative to the first vertex to limit cancellation
  long double s = 0;
  Point o = poly.empty() ? Point{} : poly[0];
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Point a = poly[i] - o, b = poly[(i + 1) % poly.size()] - o;
    s += (long double)cross(a, b);
  }
  return (double)(s / 2);
}

bool crossing_test(const std::vector<Point> &poly, Point p)
{
  bool in = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Point a = poly[i], b = poly[j];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < x) in = !in;
    }
  }
  return in;
}

Box bounding_box(const std::vector<Point> &pts)
{
  Box b;
  b.x0 = b.y0 = std::numeric_limits<double>::infinity();
  b.x1 = b.y1 = -std::numeric_limits<double>::infinity();
  for (auto p : pts) {
    b.x0 = std::min(b.x0, p.real());
    b.x1 = std::max(b.x1, p.real());
    b.y0 = std::min(b.y0, p.imag());
    b.y1 = std::max(b.y1, p.imag());
  }
  return b;
}

// ---------------------------------------------------------------- SegmentIndex

SegmentIndex::SegmentIndex(std::vector<Segment> segs, double cells_per_segment) : segs_(std::move(segs))
{
  std::vector<Point> pts;
  pts.reserve(2 * segs_.size());
  for (auto &s : segs_) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  if (pts.empty()) return;
  box_ = bounding_box(pts);
  double w = std::max(box_.width(), 1e-300), h = std::max(box_.height(), 1e-300);
  double target = std::clamp(cells_per_segment * (double)segs_.size(), 1.0, 4.0e6);
  cs_ = std::sqrt(w * h / target);
  cs_ = std::max({cs_, w / 4096.0, h / 4096.0});
  nx_ = std::max(1, (int)std::ceil(w / cs_));
  ny_ = std::max(1, (int)std::ceil(h / cs_));
  std::size_t nc = (std::size_t)nx_ * ny_;
  std::vector<std::uint32_t> count(nc + 1, 0);
  auto span = [&](const Segment &s, int &i0, int &i1, int &j0, int &j1) {
    i0 = cx(std::min(s.a.real(), s.b.real()));
    i1 = cx(std::max(s.a.real(), s.b.real()));
    j0 = cy(std::min(s.a.imag(), s.b.imag()));
    j1 = cy(std::max(s.a.imag(), s.b.imag()));
  };
  for (auto &s : segs_) {
    int i0, i1, j0, j1;
    span(s, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) count[(std::size_t)j * nx_ + i + 1]++;
  }
  for (std::size_t c = 0; c < nc; ++c) count[c + 1] += count[c];
  start_ = count;
  items_.resize(start_.back());
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t k = 0; k < segs_.size(); ++k) {
    int i0, i1, j0, j1;
    span(segs_[k], i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) items_[fill[(std::size_t)j * nx_ + i]++] = (std::uint32_t)k;
  }
}

int SegmentIndex::cx(double x) const { return std::clamp((int)std::floor((x - box_.x0) / cs_), 0, nx_ - 1); }
int SegmentIndex::cy(double y) const { return std::clamp((int)std::floor((y - box_.y0) / cs_), 0, ny_ - 1); }

SegmentIndex::Hit SegmentIndex::nearest(Point p) const
{
  Hit best;
  best.dist = std::numeric_limits<double>::infinity();
  if (segs_.empty()) return best;
  int ci = cx(p.real()), cj = cy(p.imag());
  int rmax = std::max(nx_, ny_);
  for (int r = 0; r <= rmax; ++r) {
    for (int j = cj - r; j <= cj + r; ++j) {
      if (j < 0 || j >= ny_) continue;
      bool edge_row = (j == cj - r || j == cj + r);
      for (int i = ci - r; i <= ci + r; ++i) {
        if (i < 0 || i >= nx_) continue;
        if (!edge_row && i != ci - r && i != ci + r) continue;
        std::size_t c = (std::size_t)j * nx_ + i;
        for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) {
          double t;
          double d = point_segment_distance(p, segs_[items_[k]].a, segs_[items_[k]].b, &t);
          if (d < best.dist || (d == best.dist && items_[k] < best.seg)) {
            best.dist = d;
            best.seg = items_[k];
            best.t = t;
          }
        }
      }
    }
    // lower bound for anything outside the visited square
    double x0 = box_.x0 + (ci - r) * cs_, x1 = box_.x0 + (ci + r + 1) * cs_;
    double y0 = box_.y0 + (cj - r) * cs_, y1 = box_.y0 + (cj + r + 1) * cs_;
    double lb = 0;
    if (p.real() >= x0 && p.real() <= x1 && p.imag() >= y0 && p.imag() <= y1)
      lb = std::min({p.real() - x0, x1 - p.real(), p.imag() - y0, y1 - p.imag()});
    if (best.dist <= lb) break;
  }
  return best;
}

void SegmentIndex::for_each_close_pair(const std::function<bool(std::size_t, std::size_t)> &fn) const
{
  std::size_t nc = (std::size_t)nx_ * ny_;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::uint32_t a = start_[c]; a < start_[c + 1]; ++a)
      for (std::uint32_t b = a + 1; b < start_[c + 1]; ++b) {
        std::size_t i = items_[a], j = items_[b];
        if (!fn(std::min(i, j), std::max(i, j))) return;
      }
}

void SegmentIndex::query(const Box &b, std::vector<std::size_t> &out) const
{
  out.clear();
  if (segs_.empty()) return;
  int i0 = cx(b.x0), i1 = cx(b.x1), j0 = cy(b.y0), j1 = cy(b.y1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      std::size_t c = (std::size_t)j * nx_ + i;
      for (std::uint32_t k = start_[c]; k < start_[c + 1]; ++k) out.push_back(items_[k]);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

// ---------------------------------------------------------------- JordanDomain

void validate_simple_ccw(const std::vector<Point> &v, double eps)
{
  std::size_t n = v.size();
  if (n < 3) fail_validation("domain needs at least 3 vertices, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
      fail_validation("vertex " + std::to_string(i) + " is not finite");
    if (v[i] == v[(i + 1) % n])
      fail_validation("consecutive vertices " + std::to_string(i) + " and " + std::to_string((i + 1) % n) +
                      " coincide");
  }
  std::vector<Segment> segs(n);
  for (std::size_t i = 0; i < n; ++i) segs[i] = {v[i], v[(i + 1) % n]};
  SegmentIndex idx(segs);
  std::size_t bad_i = n, bad_j = n;
  idx.for_each_close_pair([&](std::size_t i, std::size_t j) {
    if (j == i + 1 || (i == 0 && j == n - 1)) {
      // adjacent edges may only share their common vertex
      std::size_t a = (j == i + 1) ? i : j, b = (j == i + 1) ? j : i;
      Point s0 = segs[a].a, s1 = segs[a].b, t1 = segs[b].b;
      Point d0 = s1 - s0, d1 = t1 - s1;
      if (std::abs(cross(d0, d1)) <= 1e-15 * std::abs(d0) * std::abs(d1) && dot(d0, d1) < 0) {
        bad_i = i;
        bad_j = j;
        return false;
      }
      return true;
    }
    if (segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b, eps)) {
      if (i < bad_i || (i == bad_i && j < bad_j)) {
        bad_i = i;
        bad_j = j;
      }
      return false;
    }
    return true;
  });
  if (bad_i < n)
    fail_validation("edges " + std::to_string(bad_i) + " and " + std::to_string(bad_j) + " intersect");
  double a = signed_area(v);
  if (!(a > 0)) fail_validation("polygon is not counterclockwise (signed area " + std::to_string(a) + ")");
}

JordanDomain::JordanDomain(std::vector<Point> vertices, double resolution_hint, bool validate, double eps)
    : v_(std::move(vertices)), hint_(resolution_hint)
{
  if (validate) validate_simple_ccw(v_, eps);
  if (v_.size() < 3) fail_validation("domain needs at least 3 vertices");
  std::size_t n = v_.size();
  cum_.assign(n + 1, 0.0);
  std::vector<Segment> segs(n);
  for (std::size_t i = 0; i < n; ++i) {
    segs[i] = {v_[i], v_[(i + 1) % n]};
    cum_[i + 1] = cum_[i] + std::abs(segs[i].b - segs[i].a);
  }
  area_ = signed_area(v_);
  box_ = bounding_box(v_);
  if (!(hint_ > 0)) hint_ = std::max(box_.width(), box_.height());
  idx_ = SegmentIndex(std::move(segs));
}

double JordanDomain::diameter() const { return std::hypot(box_.width(), box_.height()); }

bool JordanDomain::contains(Point p, double eps) const
{
  if (p.real() <= box_.x0 || p.real() >= box_.x1 || p.imag() <= box_.y0 || p.imag() >= box_.y1) return false;
  if (idx_.nearest(p).dist <= eps) return false;
  return crossing_test(v_, p);
}

double JordanDomain::dist_to_boundary(Point p) const { return idx_.nearest(p).dist; }

double JordanDomain::arclength_of(Point p) const
{
  auto h = idx_.nearest(p);
  return cum_[h.seg] + h.t * (cum_[h.seg + 1] - cum_[h.seg]);
}

Point JordanDomain::point_at(double s) const
{
  double L = perimeter();
  s = std::fmod(s, L);
  if (s < 0) s += L;
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = (std::size_t)std::max<std::ptrdiff_t>(0, (it - cum_.begin()) - 1);
  if (i >= v_.size()) i = v_.size() - 1;
  double len = cum_[i + 1] - cum_[i];
  double t = len > 0 ? (s - cum_[i]) / len : 0.0;
  if (t <= 0) return v_[i];
  return v_[i] + t * (edge_end(i) - v_[i]);
}

JordanDomain JordanDomain::scaled(double factor) const
{
  std::vector<Point> w(v_);
  for (auto &p : w) p *= factor;
  return JordanDomain(std::move(w), hint_ * factor, false);
}

JordanDomain JordanDomain::load(const std::string &path)
{
  std::ifstream in(path);
  if (!in) fail_validation("cannot open domain file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception &e) {
    fail_validation("domain file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("vertices") || !j["vertices"].is_array()) fail_validation("domain file lacks a vertices array");
  std::vector<Point> v;
  for (auto &p : j["vertices"]) {
    if (!p.is_array() || p.size() != 2) fail_validation("vertex entries must be [x, y]");
    v.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  double hint = j.value("resolution_hint", 0.0);
  if (j.contains("resolution_hint") && !(hint > 0)) fail_validation("resolution_hint must be positive");
  return JordanDomain(std::move(v), hint);
}

void JordanDomain::save(const std::string &path) const
{
  nlohmann::json j;
  j["schema_version"] = 1;
  j["resolution_hint"] = hint_;
  auto &arr = j["vertices"] = nlohmann::json::array();
  for (auto p : v_) arr.push_back({p.real(), p.imag()});
  std::ofstream out(path);
  if (!out) fail_validation("cannot write " + path);
  out << j.dump() << "\n";
}

JordanDomain make_regular_polygon(int n, double radius, Point center, double hint)
{
  std::vector<Point> v(n);
  for (int k = 0; k < n; ++k) v[k] = center + std::polar(radius, 2 * std::numbers::pi * k / n);
  return JordanDomain(std::move(v), hint);
}

JordanDomain make_rectangle(double w, double h, Point ll, double hint)
{
  return JordanDomain({ll, ll + Point(w, 0), ll + Point(w, h), ll + Point(0, h)}, hint);
}

Point parse_point(const std::string &s)
{
  auto c = s.find(',');
  if (c == std::string::npos) fail_validation("point must be given as x,y: '" + s + "'");
  try {
    return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
  } catch (const std::exception &) {
    fail_validation("cannot parse point '" + s + "'");
  }
}

} // namespace sobext
