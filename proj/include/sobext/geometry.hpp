#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sobext {

using Point = std::complex<double>;

constexpr double default_eps = 1e-9;

inline double dot(Point a, Point b) { return a.real() * b.real() + a.imag() * b.imag(); }
inline double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

struct Segment {
  Point a, b;
};

// distance from p to segment [a,b]; t receives the projection parameter in [0,1]
double point_segment_distance(Point p, Point a, Point b, double *t = nullptr);

// closed segments closer than eps count as intersecting
bool segments_intersect(Point a, Point b, Point c, Point d, double eps = default_eps);

double segment_segment_distance(Point a, Point b, Point c, Point d);

double polyline_length(const std::vector<Point> &pts);

double signed_area(const std::vector<Point> &poly);

// even-odd test, boundary behaviour unspecified (callers check distance separately)
bool crossing_test(const std::vector<Point> &poly, Point p);

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

Box bounding_box(const std::vector<Point> &pts);

// uniform bucket grid over segments; used for nearest queries and pair tests
class SegmentIndex {
public:
  SegmentIndex() = default;
  explicit SegmentIndex(std::vector<Segment> segs, double cells_per_segment = 2.0);

  struct Hit {
    double dist = 0;
    std::size_t seg = 0;
    double t = 0;
  };

  std::size_t size() const { return segs_.size(); }
  const Segment &segment(std::size_t i) const { return segs_[i]; }
  Hit nearest(Point p) const;

  // visits every pair (i < j) sharing a bucket; a pair may be visited more than once
  void for_each_close_pair(const std::function<bool(std::size_t, std::size_t)> &fn) const;

  // segments whose bucket overlaps the box
  void query(const Box &b, std::vector<std::size_t> &out) const;

private:
  std::vector<Segment> segs_;
  Box box_;
  double cs_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;

  int cx(double x) const;
  int cy(double y) const;
};

class JordanDomain {
public:
  JordanDomain() = default;
  // validates simplicity and orientation unless validate is false
  JordanDomain(std::vector<Point> vertices, double resolution_hint, bool validate = true,
               double eps = default_eps);

  static JordanDomain load(const std::string &path);
  void save(const std::string &path) const;

  const std::vector<Point> &vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  double resolution_hint() const { return hint_; }
  double area() const { return area_; }
  double perimeter() const { return cum_.back(); }
  double diameter() const;
  Box box() const { return box_; }
  Point edge_start(std::size_t i) const { return v_[i]; }
  Point edge_end(std::size_t i) const { return v_[(i + 1) % v_.size()]; }

  bool contains(Point p, double eps = default_eps) const;
  double dist_to_boundary(Point p) const;

  // arclength position of the nearest boundary point
  double arclength_of(Point p) const;
  Point point_at(double s) const;
  double vertex_arclength(std::size_t i) const { return cum_[i]; }
  const SegmentIndex &index() const { return idx_; }

  JordanDomain scaled(double factor) const;

private:
  std::vector<Point> v_;
  std::vector<double> cum_;
  double hint_ = 0;
  double area_ = 0;
  Box box_;
  SegmentIndex idx_;
};

// throws Error(validation) naming the offending pair
void validate_simple_ccw(const std::vector<Point> &v, double eps = default_eps);

JordanDomain make_regular_polygon(int n, double radius = 1.0, Point center = 0.0, double hint = 0.0);
JordanDomain make_rectangle(double w, double h, Point lower_left = 0.0, double hint = 0.0);

Point parse_point(const std::string &s);

} // namespace sobext
