#include "sobext/boundary_param.hpp"
#include "sobext/error.hpp"
#include "sobext/report.hpp"
#include "sobext/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sobext {

namespace {
constexpr double two_pi = 2 * std::numbers::pi;
}

BoundaryParam::BoundaryParam(const JordanDomain &dom, std::vector<double> theta, std::vector<double> s,
                             std::string kind)
    : dom_(&dom), theta_(std::move(theta)), s_(std::move(s)), kind_(std::move(kind))
{
  if (theta_.size() < 2 || theta_.size() != s_.size()) fail_validation("boundary table needs matching columns");
  for (std::size_t k = 0; k < theta_.size(); ++k) {
    if (!(theta_[k] >= 0 && theta_[k] < two_pi)) fail_validation("boundary table angles must lie in [0, 2pi)");
    if (k && !(theta_[k] > theta_[k - 1] && s_[k] > s_[k - 1]))
      fail_validation("boundary table not strictly increasing at row " + std::to_string(k));
  }
  if (!(s_.back() - s_.front() < dom.perimeter())) fail_validation("boundary table wraps more than once");
}

BoundaryParam BoundaryParam::radial(const JordanDomain &dom, Point center)
{
  if (!dom.contains(center)) fail_validation("radial parametrization center lies outside the domain");
  const auto &v = dom.vertices();
  std::size_t n = v.size();
  std::vector<double> ang(n);
  for (std::size_t i = 0; i < n; ++i) {
    ang[i] = std::arg(v[i] - center);
    if (ang[i] < 0) ang[i] += two_pi;
  }
  std::size_t start = (std::size_t)(std::min_element(ang.begin(), ang.end()) - ang.begin());
  std::vector<double> th, s;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = (start + k) % n;
    double si = dom.vertex_arclength(i);
    if (i < start) si += dom.perimeter();
    if (!th.empty() && !(ang[i] > th.back()))
      fail_validation("domain is not star-shaped about the radial center (vertex " + std::to_string(i) + ")");
    th.push_back(ang[i]);
    s.push_back(si);
  }
  return BoundaryParam(dom, std::move(th), std::move(s), "radial");
}

BoundaryParam BoundaryParam::conformal(const RiemannMap &map)
{
  return BoundaryParam(map.domain(), map.table_theta(), map.table_arclength(), "conformal");
}

BoundaryParam BoundaryParam::load(const std::string &path, const JordanDomain &dom)
{
  auto j = read_json(path);
  if (j.value("kind", std::string()) == "radial") {
    if (!j.contains("center")) fail_validation("radial parametrization needs a center");
    return radial(dom, json_point(j["center"]));
  }
  if (!j.contains("theta") || !j.contains("arclength")) fail_validation(path + " lacks theta/arclength columns");
  return BoundaryParam(dom, j["theta"].get<std::vector<double>>(), j["arclength"].get<std::vector<double>>());
}

void BoundaryParam::save(const std::string &path) const
{
  json j;
  j["schema_version"] = schema_version;
  j["kind"] = kind_;
  j["theta"] = theta_;
  j["arclength"] = s_;
  write_json(path, j);
}

double BoundaryParam::arclength_at(double theta) const
{
  double t = std::fmod(theta, two_pi);
  if (t < 0) t += two_pi;
  if (t < theta_.front()) t += two_pi;
  auto it = std::upper_bound(theta_.begin(), theta_.end(), t);
  std::size_t k = (std::size_t)(it - theta_.begin()) - 1;
  double t0 = theta_[k], s0 = s_[k];
  bool last = k + 1 == theta_.size();
  double t1 = last ? theta_.front() + two_pi : theta_[k + 1];
  double s1 = last ? s_.front() + dom_->perimeter() : s_[k + 1];
  return s0 + (t - t0) / (t1 - t0) * (s1 - s0);
}

double BoundaryParam::angle_of_arclength(double s) const
{
  double P = dom_->perimeter();
  double u = std::fmod(s - s_.front(), P);
  if (u < 0) u += P;
  u += s_.front();
  auto it = std::upper_bound(s_.begin(), s_.end(), u);
  std::size_t k = (std::size_t)(it - s_.begin()) - 1;
  double t0 = theta_[k], s0 = s_[k];
  bool last = k + 1 == s_.size();
  double t1 = last ? theta_.front() + two_pi : theta_[k + 1];
  double s1 = last ? s_.front() + P : s_[k + 1];
  double t = t0 + (u - s0) / (s1 - s0) * (t1 - t0);
  return t >= two_pi ? t - two_pi : t;
}

double BoundaryParam::angle_of(Point p) const { return angle_of_arclength(dom_->arclength_of(p)); }

} // namespace sobext
