#pragma once

#include "sobext/geometry.hpp"

#include <string>
#include <vector>

namespace sobext {

class RiemannMap;

// homeomorphism of the unit circle onto the domain boundary, stored as a monotone
// table of (angle, arclength) pairs and interpolated linearly in between
class BoundaryParam {
public:
  BoundaryParam() = default;
  // theta sorted in [0, 2pi); s strictly increasing and spanning less than one perimeter
  BoundaryParam(const JordanDomain &dom, std::vector<double> theta, std::vector<double> s, std::string kind = "table");

  // vertices seen from a star center; exact at vertices, arclength-linear along edges
  static BoundaryParam radial(const JordanDomain &dom, Point center);
  // boundary values of the conformal map itself
  static BoundaryParam conformal(const RiemannMap &map);
  // {"kind": "radial", "center": [x, y]} or {"theta": [...], "arclength": [...]}
  static BoundaryParam load(const std::string &path, const JordanDomain &dom);
  void save(const std::string &path) const;

  const std::string &kind() const { return kind_; }
  const JordanDomain &domain() const { return *dom_; }
  const std::vector<double> &theta() const { return theta_; }
  const std::vector<double> &arclength() const { return s_; }

  double arclength_at(double theta) const;
  Point operator()(double theta) const { return dom_->point_at(arclength_at(theta)); }
  // inverse on the boundary, result in [0, 2pi)
  double angle_of_arclength(double s) const;
  double angle_of(Point boundary_point) const;

private:
  const JordanDomain *dom_ = nullptr;
  std::vector<double> theta_, s_;
  std::string kind_ = "table";
};

} // namespace sobext
