#pragma once

#include "sobext/geometry.hpp"

#include <vector>

namespace sobext {

// T(z) = a(1 - z)/(1 + z), mapping the disk onto the upper half-plane
class MobiusTransform {
public:
  MobiusTransform() = default;
  explicit MobiusTransform(Point a) : a_(a) {}
  Point a() const { return a_; }
  // returns infinity components for z = -1
  Point operator()(Point z) const;
  Point inverse(Point w) const;

private:
  Point a_{0, 1};
};

// normalization with T(xi1) = 1, T(conj xi1) = -1, T(1) = 0
MobiusTransform mobius_for_endpoints(Point xi1, double tol = default_eps);

double hyperbolic_dist_disk(Point z, Point w);
double hyperbolic_dist_halfplane(Point z, Point w);

// disk automorphism z -> (z - a)/(1 - conj(a) z)
Point disk_automorphism(Point a, Point z);

class DiskGeodesic {
public:
  DiskGeodesic(Point xi1, Point xi2, double tol = default_eps);

  Point xi1() const { return x1_; }
  Point xi2() const { return x2_; }
  bool is_diameter() const { return diameter_; }
  Point center() const { return c_; }
  double radius() const { return r_; }
  double length() const;
  // n >= 2 points from xi1 to xi2, uniform in the arc parameter
  std::vector<Point> sample(int n) const;
  Point at(double s) const; // s in [0,1]
  // distance from 0 along the ray of direction u (|u| = 1) to the geodesic; <0 when the ray misses
  double ray_hit(Point u) const;

private:
  Point x1_, x2_, c_;
  double r_ = 0, a1_ = 0, da_ = 0;
  bool diameter_ = false;
};

} // namespace sobext
