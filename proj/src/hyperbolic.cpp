#include "sobext/hyperbolic.hpp"
#include "sobext/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sobext {

Point MobiusTransform::operator()(Point z) const
{
  Point den = 1.0 + z;
  if (den == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  return a_ * (1.0 - z) / den;
}

Point MobiusTransform::inverse(Point w) const { return (a_ - w) / (a_ + w); }

MobiusTransform mobius_for_endpoints(Point xi1, double tol)
{
  if (std::abs(std::abs(xi1) - 1.0) > tol) fail_validation("xi1 must lie on the unit circle");
  if (std::abs(xi1 - 1.0) < 1e-6 || std::abs(xi1 + 1.0) < 1e-6) fail_validation("xi1 too close to +-1");
  if (!(xi1.imag() > 0 && xi1.real() > 0)) fail_validation("xi1 must lie in the open first quadrant");
  Point a = (1.0 + xi1) / (1.0 - xi1);
  return MobiusTransform(Point(0.0, a.imag()));
}

double hyperbolic_dist_disk(Point z, Point w)
{
  if (!(std::abs(z) < 1) || !(std::abs(w) < 1)) fail_validation("hyperbolic_dist_disk: point outside the open disk");
  double q = std::abs(z - w) / std::abs(1.0 - std::conj(w) * z);
  return 2.0 * std::atanh(q);
}

double hyperbolic_dist_halfplane(Point z, Point w)
{
  if (!(z.imag() > 0) || !(w.imag() > 0)) fail_validation("hyperbolic_dist_halfplane: point not in upper half-plane");
  return 2.0 * std::asinh(std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

Point disk_automorphism(Point a, Point z) { return (z - a) / (1.0 - std::conj(a) * z); }

DiskGeodesic::DiskGeodesic(Point xi1, Point xi2, double tol) : x1_(xi1), x2_(xi2)
{
  if (std::abs(std::abs(xi1) - 1) > tol || std::abs(std::abs(xi2) - 1) > tol)
    fail_validation("geodesic endpoints must lie on the unit circle");
  if (std::abs(xi1 - xi2) <= tol) fail_validation("geodesic endpoints coincide");
  Point s = xi1 + xi2;
  if (std::abs(s) < 1e-12) {
    diameter_ = true;
    return;
  }
  c_ = 2.0 * s / std::norm(s);
  r_ = std::abs(xi1 - c_);
  a1_ = std::arg(xi1 - c_);
  da_ = std::remainder(std::arg(xi2 - c_) - a1_, 2 * std::numbers::pi);
}

double DiskGeodesic::length() const { return diameter_ ? 2.0 : r_ * std::abs(da_); }

Point DiskGeodesic::at(double s) const
{
  if (diameter_) return x1_ + s * (x2_ - x1_);
  if (s <= 0) return x1_;
  if (s >= 1) return x2_;
  return c_ + std::polar(r_, a1_ + s * da_);
}

std::vector<Point> DiskGeodesic::sample(int n) const
{
  std::vector<Point> out(n);
  for (int k = 0; k < n; ++k) out[k] = at((double)k / (n - 1));
  return out;
}

double DiskGeodesic::ray_hit(Point u) const
{
  if (diameter_) return -1;
  double uc = dot(u, c_);
  double disc = uc * uc - (std::norm(c_) - r_ * r_);
  if (uc <= 0 || disc < 0) return -1;
  // smaller root, written to avoid cancellation
  return (std::norm(c_) - r_ * r_) / (uc + std::sqrt(disc));
}

} // namespace sobext
