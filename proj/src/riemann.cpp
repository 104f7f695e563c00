#include "sobext/riemann.hpp"
#include "sobext/error.hpp"
#include "sobext/hyperbolic.hpp"
#include "sobext/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sobext {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;
const Point I{0, 1};

// side of the real axis holding the processed part of the boundary
constexpr double omega_side = -1.0;

struct SlitParams {
  double b;  // real pole of the normalizing Mobius map, inf when Re a = 0
  double c;  // height of the straightened slit
};

SlitParams slit_params(Point a)
{
  double m = std::norm(a);
  return {a.real() != 0 ? m / a.real() : std::numeric_limits<double>::infinity(), m / a.imag()};
}

Point slit_forward(Point z, const SlitParams &p)
{
  Point h = std::isfinite(p.b) ? z / (1.0 - z / p.b) : z;
  return I * std::sqrt(-(h * h + p.c * p.c));
}

double slit_forward_real(double x, const SlitParams &p)
{
  double h;
  if (std::isinf(x))
    h = std::isfinite(p.b) ? -p.b : x;
  else
    h = std::isfinite(p.b) ? x / (1.0 - x / p.b) : x;
  if (std::isinf(h)) return h;
  double s = h > 0 ? 1.0 : (h < 0 ? -1.0 : omega_side);
  return s * std::sqrt(h * h + p.c * p.c);
}

} // namespace

std::vector<Point> zipper_samples(const JordanDomain &dom, int n_boundary, std::vector<double> *arclength)
{
  if (n_boundary < 64) fail_validation("n_boundary must be at least 64");
  const auto &v = dom.vertices();
  double step = dom.perimeter() / n_boundary;
  std::vector<Point> out;
  if (arclength) arclength->clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    Point a = dom.edge_start(i), b = dom.edge_end(i);
    double len = std::abs(b - a);
    int m = std::max(1, (int)std::ceil(len / step - 1e-9));
    for (int k = 0; k < m; ++k) {
      out.push_back(a + (b - a) * ((double)k / m));
      if (arclength) arclength->push_back(dom.vertex_arclength(i) + len * k / m);
    }
  }
  return out;
}

Point RiemannMap::to_halfplane(Point z) const
{
  Point z0 = zs_[0], z1 = zs_[1];
  Point w = I * std::sqrt((z - z1) / (z - z0));
  for (Point a : steps_) w = slit_forward(w, slit_params(a));
  Point u = winf_infinite_ ? w : w / (1.0 - w / winf_);
  Point F = u * u;
  return second_quadrant_ ? -F : F;
}

Point RiemannMap::from_halfplane(Point F, Point *df) const
{
  Point u = second_quadrant_ ? I * std::sqrt(F) : std::sqrt(F);
  Point d = (second_quadrant_ ? -1.0 : 1.0) / (2.0 * u);
  Point w = u;
  if (!winf_infinite_) {
    Point q = 1.0 + u / winf_;
    w = u / q;
    d /= q * q;
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    SlitParams p = slit_params(*it);
    Point h = I * std::sqrt(-(w * w - p.c * p.c));
    d *= w / h;
    if (std::isfinite(p.b)) {
      Point q = 1.0 + h / p.b;
      w = h / q;
      d /= q * q;
    } else {
      w = h;
    }
  }
  Point s = -w * w;
  d *= -2.0 * w * (zs_[1] - zs_[0]) / ((s - 1.0) * (s - 1.0));
  if (df) *df = d;
  return (s * zs_[0] - zs_[1]) / (s - 1.0);
}

Point RiemannMap::forward(Point w) const
{
  if (std::norm(w) >= 1) fail_validation("forward map needs |w| < 1");
  Point F = (w * std::conj(wc_) - wc_) / (w - 1.0);
  return from_halfplane(F);
}

Point RiemannMap::forward(Point w, Point &df) const
{
  if (std::norm(w) >= 1) fail_validation("forward map needs |w| < 1");
  Point F = (w * std::conj(wc_) - wc_) / (w - 1.0);
  Point dF = (wc_ - std::conj(wc_)) / ((w - 1.0) * (w - 1.0));
  Point z = from_halfplane(F, &df);
  df *= dF;
  return z;
}

Point RiemannMap::inverse(Point z) const
{
  Point F = to_halfplane(z);
  return (F - wc_) / (F - std::conj(wc_));
}

std::array<double, 4> RiemannMap::jacobian(Point w) const
{
  double d = 1e-5 * std::max(1e-3, 1 - std::abs(w));
  Point fu = (forward(w + d) - forward(w - d)) / (2 * d);
  Point fv = (forward(w + I * d) - forward(w - I * d)) / (2 * d);
  return {fu.real(), fv.real(), fu.imag(), fv.imag()};
}

double RiemannMap::derivative(Point w) const
{
  auto j = jacobian(w);
  // mean of |f_u| and |f_v|; equal for a conformal map
  return 0.5 * (std::hypot(j[0], j[2]) + std::hypot(j[1], j[3]));
}

double RiemannMap::arclength_of_angle(double theta) const
{
  double P = dom_.perimeter();
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  auto it = std::upper_bound(theta_.begin(), theta_.end(), t);
  std::size_t k = (std::size_t)(it - theta_.begin()) - 1;
  double t0 = theta_[k], s0 = arc_[k];
  double t1 = k + 1 < theta_.size() ? theta_[k + 1] : two_pi;
  double s1 = k + 1 < arc_.size() ? arc_[k + 1] : P;
  double u = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  return s0 + u * (s1 - s0);
}

double RiemannMap::angle_of_arclength(double s) const
{
  double P = dom_.perimeter();
  s = std::fmod(s, P);
  if (s < 0) s += P;
  auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  std::size_t k = (std::size_t)(it - arc_.begin()) - 1;
  double t0 = theta_[k], s0 = arc_[k];
  double t1 = k + 1 < theta_.size() ? theta_[k + 1] : two_pi;
  double s1 = k + 1 < arc_.size() ? arc_[k + 1] : P;
  double u = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
  return t0 + u * (t1 - t0);
}

Point RiemannMap::boundary_image(double theta) const { return dom_.point_at(arclength_of_angle(theta)); }

Point RiemannMap::boundary_image(Point xi) const { return boundary_image(std::arg(xi)); }

void RiemannMap::build_table()
{
  std::size_t n = zs_.size();
  Point z0 = zs_[0], z1 = zs_[1];
  std::vector<Point> cur(n);
  std::vector<double> re(n, 0.0);
  double winf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < n; ++k) cur[k] = I * std::sqrt((zs_[k] - z1) / (zs_[k] - z0));
  Point wc = I * std::sqrt((center_ - z1) / (center_ - z0));

  steps_.clear();
  for (std::size_t k = 2; k < n; ++k) {
    Point a = cur[k];
    if (!(a.imag() > 0)) {
      fail_numerical("zipper lost the upper half-plane at sample " + std::to_string(k) +
                     " (Im a = " + std::to_string(a.imag()) + ")");
    }
    steps_.push_back(a);
    SlitParams p = slit_params(a);
    for (std::size_t j = 1; j < k; ++j) re[j] = slit_forward_real(re[j], p);
    winf = slit_forward_real(winf, p);
    re[k] = 0;
    for (std::size_t j = k + 1; j < n; ++j) cur[j] = slit_forward(cur[j], p);
    wc = slit_forward(wc, p);
  }
  winf_infinite_ = std::isinf(winf);
  winf_ = winf_infinite_ ? 0.0 : winf;
  Point uc = winf_infinite_ ? wc : wc / (1.0 - wc / winf_);
  second_quadrant_ = uc.real() < 0;
  wc_ = second_quadrant_ ? -uc * uc : uc * uc;
  if (!(wc_.imag() > 0)) fail_numerical("center image left the upper half-plane");

  theta_.assign(n, 0.0);
  arc_ = sarc_;
  for (std::size_t j = 1; j < n; ++j) {
    double u = winf_infinite_ ? re[j] : re[j] / (1.0 - re[j] / winf_);
    double F = second_quadrant_ ? -u * u : u * u;
    Point w = (F - wc_) / (F - std::conj(wc_));
    double t = std::arg(w);
    if (t < 0) t += two_pi;
    theta_[j] = t;
  }
  for (std::size_t j = 1; j < n; ++j) {
    double prev = theta_[j - 1];
    if (!(theta_[j] > prev)) {
      fail_numerical("boundary correspondence not monotone at sample " + std::to_string(j) + " (theta " +
                     std::to_string(theta_[j]) + " after " + std::to_string(prev) + ")");
    }
  }
}

RiemannMap compute_riemann_map(const JordanDomain &dom, Point z0, int n_boundary)
{
  if (!dom.contains(z0)) fail_validation("map center lies outside the domain");
  RiemannMap m;
  m.dom_ = dom;
  m.center_ = z0;
  m.zs_ = zipper_samples(dom, n_boundary, &m.sarc_);
  m.build_table();
  Point back = m.forward(0.0);
  double res = std::abs(back - z0);
  if (res > 1e-6 * dom.diameter()) fail_numerical("f(0) misses the center by " + std::to_string(res));
  return m;
}

void RiemannMap::save(const std::string &path) const
{
  json j;
  j["schema_version"] = schema_version;
  j["kind"] = "geodesic_zipper";
  json verts = json::array();
  for (auto p : dom_.vertices()) verts.push_back(point_json(p));
  j["domain"] = {{"vertices", verts}, {"resolution_hint", dom_.resolution_hint()}};
  j["center"] = point_json(center_);
  json zs = json::array(), steps = json::array();
  for (auto p : zs_) zs.push_back(point_json(p));
  for (auto p : steps_) steps.push_back(point_json(p));
  j["samples"] = zs;
  j["sample_arclength"] = sarc_;
  j["steps"] = steps;
  j["center_image"] = point_json(wc_);
  j["w_inf"] = winf_infinite_ ? json(nullptr) : json(winf_);
  j["second_quadrant"] = second_quadrant_;
  j["table"] = {{"theta", theta_}, {"arclength", arc_}};
  write_json(path, j);
}

RiemannMap RiemannMap::load(const std::string &path)
{
  auto j = read_json(path);
  RiemannMap m;
  try {
    std::vector<Point> v;
    for (auto &p : j.at("domain").at("vertices")) v.push_back(json_point(p));
    m.dom_ = JordanDomain(std::move(v), j["domain"].value("resolution_hint", 0.0));
    m.center_ = json_point(j.at("center"));
    for (auto &p : j.at("samples")) m.zs_.push_back(json_point(p));
    m.sarc_ = j.at("sample_arclength").get<std::vector<double>>();
    for (auto &p : j.at("steps")) m.steps_.push_back(json_point(p));
    m.wc_ = json_point(j.at("center_image"));
    m.winf_infinite_ = j.at("w_inf").is_null();
    m.winf_ = m.winf_infinite_ ? 0.0 : j["w_inf"].get<double>();
    m.second_quadrant_ = j.at("second_quadrant").get<bool>();
    m.theta_ = j.at("table").at("theta").get<std::vector<double>>();
    m.arc_ = j.at("table").at("arclength").get<std::vector<double>>();
  } catch (const nlohmann::json::exception &e) {
    fail_validation("malformed map file " + path + ": " + e.what());
  }
  if (m.zs_.size() < 3 || m.steps_.size() + 2 != m.zs_.size() || m.theta_.size() != m.zs_.size() ||
      m.arc_.size() != m.zs_.size())
    fail_validation("inconsistent map file " + path);
  return m;
}

double hyperbolic_dist_via_map(const RiemannMap &map, Point z, Point w)
{
  Point a = map.inverse(z), b = map.inverse(w);
  if (!(std::abs(a) < 1) || !(std::abs(b) < 1)) {
    fail_numerical("inverse map left the disk (|f^-1(z)| = " + std::to_string(std::abs(a)) +
                   ", |f^-1(w)| = " + std::to_string(std::abs(b)) + ")");
  }
  return hyperbolic_dist_disk(a, b);
}

KoebeReport verify_koebe(const RiemannMap &map, std::size_t pairs, std::uint64_t seed, double r_max, double h_max)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  KoebeReport rep;
  double sum_margin = 0;
  rep.min_margin = std::numeric_limits<double>::infinity();
  while (rep.pairs < pairs) {
    Point z = std::polar(r_max * std::sqrt(U(rng)), two_pi * U(rng));
    double d = h_max * U(rng);
    Point u = std::polar(std::tanh(d / 2), two_pi * U(rng));
    Point w = (u + z) / (1.0 + std::conj(z) * u);
    if (std::abs(w) > 0.99) {
      ++rep.excluded;
      continue;
    }
    double h = hyperbolic_dist_disk(z, w);
    double lr = std::log(map.derivative(z) / map.derivative(w));
    // slack for the finite-difference derivative
    double margin = 3 * h - std::abs(lr);
    if (margin < -1e-6) ++rep.violations;
    rep.min_margin = std::min(rep.min_margin, margin);
    rep.max_abs_log_ratio = std::max(rep.max_abs_log_ratio, std::abs(lr));
    sum_margin += margin;
    ++rep.pairs;
  }
  rep.mean_margin = rep.pairs ? sum_margin / rep.pairs : 0.0;
  return rep;
}

ConformalityReport check_conformality(const RiemannMap &map, std::size_t points, std::uint64_t seed, double r_max)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  ConformalityReport rep;
  for (std::size_t k = 0; k < points; ++k) {
    Point w = std::polar(r_max * std::sqrt(U(rng)), two_pi * U(rng));
    auto j = map.jacobian(w);
    double num = std::hypot(j[0] - j[3], j[1] + j[2]);
    double den = std::sqrt(j[0] * j[0] + j[1] * j[1] + j[2] * j[2] + j[3] * j[3]);
    rep.max_cr_residual = std::max(rep.max_cr_residual, num / den);
    rep.max_roundtrip = std::max(rep.max_roundtrip, std::abs(map.inverse(map.forward(w)) - w));
    ++rep.points;
  }
  return rep;
}

} // namespace sobext

namespace sobext {

MetricField hyperbolic_field(const MetricGrid &grid, const RiemannMap &map, Point z0)
{
  MetricField f;
  f.grid = &grid;
  f.source = z0;
  Point a = map.inverse(z0);
  if (!(std::abs(a) < 1)) fail_numerical("source point maps outside the disk");
  f.values.assign(grid.size(), unreached_value);
  f.reached.assign(grid.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Point z = grid.position(k);
    Point w = map.inverse(z);
    if (!(std::abs(w) < 1)) continue;
    f.values[k] = hyperbolic_dist_disk(a, w);
    f.reached[k] = 1;
    double d = std::abs(z - z0);
    if (d < best) {
      best = d;
      f.source_node = k;
    }
  }
  return f;
}

CriterionReport integrate_hyperbolic_criterion(const MetricField &field, const RiemannMap &map, double q, double tolerance)
{
  CriterionReport rep;
  rep.q = q;
  rep.metric = "hyperbolic";
  rep.h = field.grid->spacing();
  rep.estimate = integrate_field(field, q);
  rep.refinement.push_back({rep.h, rep.estimate, field.grid->size(), field.grid->size() - field.reached_count()});
  MetricGrid fine(field.grid->domain(), rep.h / 2);
  MetricField ff = hyperbolic_field(fine, map, field.source);
  double e2 = integrate_field(ff, q);
  rep.refinement.push_back({rep.h / 2, e2, fine.size(), fine.size() - ff.reached_count()});
  rep.rel_diff = std::abs(e2 - rep.estimate) / std::max(std::abs(rep.estimate), 1e-300);
  rep.converged = rep.rel_diff <= tolerance;
  return rep;
}

} // namespace sobext
