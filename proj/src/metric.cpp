#include "sobext/metric.hpp"
#include "sobext/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>

namespace sobext {

MetricGrid::MetricGrid(const JordanDomain &dom, double h, GridOptions opt) : dom_(&dom), h_(h)
{
  if (!(h > 0)) fail_validation("grid spacing must be positive");
  const auto &v = dom.vertices();
  std::size_t n = v.size();
  Box b = dom.box();
  j0_ = (int)std::ceil(b.y0 / h);
  int j1 = (int)std::floor(b.y1 / h);
  int rows = std::max(0, j1 - j0_ + 1);

  struct Edge {
    double ymin, ymax;
    std::size_t k;
  };
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point a = v[k], c = v[(k + 1) % n];
    if (a.imag() == c.imag()) continue;
    edges.push_back({std::min(a.imag(), c.imag()), std::max(a.imag(), c.imag()), k});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge &x, const Edge &y) { return x.ymin < y.ymin; });

  row_begin_.assign(rows + 1, 0);
  std::vector<std::size_t> active;
  std::size_t next = 0;
  std::vector<double> xs;
  for (int r = 0; r < rows; ++r) {
    double y = (j0_ + r) * h;
    while (next < edges.size() && edges[next].ymin <= y) active.push_back(next++);
    xs.clear();
    std::size_t keep = 0;
    for (std::size_t a : active) {
      const Edge &e = edges[a];
      if (e.ymax < y) continue;
      active[keep++] = a;
      Point p = v[e.k], q = v[(e.k + 1) % n];
      if ((p.imag() > y) != (q.imag() > y))
        xs.push_back(p.real() + (y - p.imag()) * (q.real() - p.real()) / (q.imag() - p.imag()));
    }
    active.resize(keep);
    std::sort(xs.begin(), xs.end());
    for (std::size_t t = 0; t + 1 < xs.size(); t += 2) {
      int i0 = (int)std::floor(xs[t] / h) + 1;
      int i1 = (int)std::ceil(xs[t + 1] / h) - 1;
      for (int i = i0; i <= i1; ++i) {
        Point p{i * h, y};
        double d = dom.dist_to_boundary(p);
        if (!(d > opt.eps)) continue;
        bool fr = d <= h * std::sqrt(0.5);
        if (fr && !opt.keep_fringe) continue;
        if (!intervals_.empty() && row_begin_[r] < intervals_.size() && intervals_.back().i1 == i - 1 &&
            jj_.back() == j0_ + r) {
          intervals_.back().i1 = i;
        } else {
          intervals_.push_back({i, i, (std::uint32_t)d_.size()});
        }
        ii_.push_back(i);
        jj_.push_back(j0_ + r);
        d_.push_back(d);
        fringe_.push_back(fr ? 1 : 0);
      }
    }
    row_begin_[r + 1] = (std::uint32_t)intervals_.size();
  }
  if (d_.empty()) fail_validation("no interior nodes at spacing " + std::to_string(h));
  if (h > dom.resolution_hint() * (1 + 1e-12))
    fail_validation("grid spacing " + std::to_string(h) + " exceeds the domain resolution hint");
}

std::size_t MetricGrid::fringe_count() const
{
  return (std::size_t)std::count(fringe_.begin(), fringe_.end(), (std::uint8_t)1);
}

std::int64_t MetricGrid::node(int i, int j) const
{
  int r = j - j0_;
  if (r < 0 || r + 1 >= (int)row_begin_.size()) return -1;
  auto b = intervals_.begin() + row_begin_[r], e = intervals_.begin() + row_begin_[r + 1];
  auto it = std::upper_bound(b, e, i, [](int x, const Interval &iv) { return x < iv.i0; });
  if (it == b) return -1;
  --it;
  if (i > it->i1) return -1;
  return (std::int64_t)it->offset + (i - it->i0);
}

std::vector<std::pair<int, int>> stencil_offsets(int neighbors)
{
  std::vector<std::pair<int, int>> base;
  if (neighbors != 8 && neighbors != 16 && neighbors != 32) fail_validation("stencil must have 8, 16 or 32 neighbors");
  base = {{1, 0}, {1, 1}};
  if (neighbors >= 16) base.push_back({2, 1});
  if (neighbors >= 32) {
    base.push_back({3, 1});
    base.push_back({3, 2});
  }
  std::vector<std::pair<int, int>> out;
  for (auto [a, b] : base) {
    std::vector<std::pair<int, int>> c = {{a, b}, {-a, b}, {a, -b}, {-a, -b}, {b, a}, {-b, a}, {b, -a}, {-b, -a}};
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

std::size_t MetricField::reached_count() const
{
  return (std::size_t)std::count(reached.begin(), reached.end(), (std::uint8_t)1);
}

double MetricField::value_at(Point p) const
{
  const MetricGrid &g = *grid;
  double h = g.spacing();
  double fx = p.real() / h, fy = p.imag() / h;
  int i = (int)std::floor(fx), j = (int)std::floor(fy);
  double u = fx - i, w = fy - j;
  std::int64_t c[4] = {g.node(i, j), g.node(i + 1, j), g.node(i, j + 1), g.node(i + 1, j + 1)};
  bool all = true;
  for (auto k : c)
    if (k < 0 || !reached[(std::size_t)k]) all = false;
  if (all)
    return (1 - u) * (1 - w) * values[c[0]] + u * (1 - w) * values[c[1]] + (1 - u) * w * values[c[2]] +
           u * w * values[c[3]];
  double dp = g.domain().dist_to_boundary(p);
  double best = unreached_value;
  for (int dj = -1; dj <= 2; ++dj)
    for (int di = -1; di <= 2; ++di) {
      auto k = g.node(i + di, j + dj);
      if (k < 0 || !reached[(std::size_t)k]) continue;
      double len = std::abs(g.position((std::size_t)k) - p);
      if (dp + g.dist((std::size_t)k) <= len) continue;
      best = std::min(best, values[(std::size_t)k] + len * 2.0 / (dp + g.dist((std::size_t)k)));
    }
  return best;
}

MetricField quasihyperbolic_field(const MetricGrid &grid, Point z0, int neighbors)
{
  const JordanDomain &dom = grid.domain();
  if (!dom.contains(z0)) fail_validation("source point lies outside the domain");
  double h = grid.spacing();
  double d0 = dom.dist_to_boundary(z0);

  // nearest node reachable by a straight admissible segment
  int ci = (int)std::lround(z0.real() / h), cj = (int)std::lround(z0.imag() / h);
  std::int64_t src = -1;
  double best = 0;
  for (int r = 0; r <= 3 && src < 0; ++r)
    for (int j = cj - r; j <= cj + r; ++j)
      for (int i = ci - r; i <= ci + r; ++i) {
        auto k = grid.node(i, j);
        if (k < 0) continue;
        double len = std::abs(grid.position((std::size_t)k) - z0);
        if (d0 + grid.dist((std::size_t)k) <= len) continue;
        if (src < 0 || len < best || (len == best && k < src)) {
          src = k;
          best = len;
        }
      }
  if (src < 0) fail_validation("source lies in a masked-out pocket of the grid");

  MetricField f;
  f.grid = &grid;
  f.source = z0;
  f.source_node = (std::size_t)src;
  f.values.assign(grid.size(), unreached_value);
  f.reached.assign(grid.size(), 0);
  auto offs = stencil_offsets(neighbors);
  std::vector<double> lens(offs.size());
  for (std::size_t s = 0; s < offs.size(); ++s) lens[s] = h * std::hypot(offs[s].first, offs[s].second);

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  f.values[src] = best * 2.0 / (d0 + grid.dist((std::size_t)src));
  pq.push({f.values[src], (std::uint32_t)src});
  while (!pq.empty()) {
    auto [val, u] = pq.top();
    pq.pop();
    if (f.reached[u]) continue;
    f.reached[u] = 1;
    if (grid.fringe(u)) continue;
    int i = grid.col(u), j = grid.row(u);
    double du = grid.dist(u);
    for (std::size_t s = 0; s < offs.size(); ++s) {
      auto k = grid.node(i + offs[s].first, j + offs[s].second);
      if (k < 0 || f.reached[(std::size_t)k]) continue;
      double dv = grid.dist((std::size_t)k);
      if (du + dv <= lens[s]) continue;
      double nv = val + lens[s] * 2.0 / (du + dv);
      if (nv < f.values[(std::size_t)k]) {
        f.values[(std::size_t)k] = nv;
        pq.push({nv, (std::uint32_t)k});
      }
    }
  }
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!f.reached[k]) f.values[k] = unreached_value;
  return f;
}

double integrate_field(const MetricField &field, double q)
{
  if (q < 1) fail_validation("criterion exponent q must be >= 1");
  long double s = 0;
  for (std::size_t k = 0; k < field.values.size(); ++k)
    if (field.reached[k]) s += std::pow((long double)field.values[k], (long double)q);
  double h = field.grid->spacing();
  return (double)(s * (long double)(h * h));
}

CriterionReport integrate_criterion(const MetricField &field, double q, int neighbors, double tolerance)
{
  CriterionReport rep;
  rep.q = q;
  rep.h = field.grid->spacing();
  rep.estimate = integrate_field(field, q);
  rep.refinement.push_back({rep.h, rep.estimate, field.grid->size(), field.grid->size() - field.reached_count()});
  MetricGrid fine(field.grid->domain(), rep.h / 2);
  MetricField ff = quasihyperbolic_field(fine, field.source, neighbors);
  double e2 = integrate_field(ff, q);
  rep.refinement.push_back({rep.h / 2, e2, fine.size(), fine.size() - ff.reached_count()});
  rep.rel_diff = std::abs(e2 - rep.estimate) / std::max(std::abs(rep.estimate), 1e-300);
  rep.converged = rep.rel_diff <= tolerance;
  return rep;
}

void write_field_csv(const MetricField &field, const std::string &path)
{
  std::ofstream out(path);
  if (!out) fail_validation("cannot write " + path);
  out.precision(17);
  out << "x,y,d_boundary,k_value,reached\n";
  const MetricGrid &g = *field.grid;
  for (std::size_t k = 0; k < g.size(); ++k) {
    Point p = g.position(k);
    out << p.real() << ',' << p.imag() << ',' << g.dist(k) << ',';
    if (field.reached[k])
      out << field.values[k];
    else
      out << "inf";
    out << ',' << (field.reached[k] ? 1 : 0) << '\n';
  }
}

} // namespace sobext
