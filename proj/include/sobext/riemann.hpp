#pragma once

#include "sobext/geometry.hpp"
#include "sobext/metric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sobext {

// Conformal map f: D -> Omega with f(0) = center, built by the geodesic zipper.
// Angle 0 corresponds to the first domain vertex.
class RiemannMap {
public:
  RiemannMap() = default;

  const JordanDomain &domain() const { return dom_; }
  Point center() const { return center_; }
  std::size_t samples() const { return zs_.size(); }

  // boundary correspondence: theta_k in [0, 2pi), arclength position s_k on the domain polygon
  const std::vector<double> &table_theta() const { return theta_; }
  const std::vector<double> &table_arclength() const { return arc_; }

  Point forward(Point w) const;   // f, |w| < 1
  // f(w) together with f'(w) by the chain rule through the zipper steps
  Point forward(Point w, Point &df) const;
  Point inverse(Point z) const;   // f^{-1}, z in Omega
  double derivative(Point w) const; // |f'(w)| by centered differences
  // 2x2 Jacobian of f as a real map, centered differences; {dx/du, dx/dv, dy/du, dy/dv}
  std::array<double, 4> jacobian(Point w) const;

  Point boundary_image(double theta) const;
  Point boundary_image(Point xi) const;
  double arclength_of_angle(double theta) const;
  // inverse of the correspondence, theta in [0, 2pi)
  double angle_of_arclength(double s) const;

  void save(const std::string &path) const;
  static RiemannMap load(const std::string &path);

  friend RiemannMap compute_riemann_map(const JordanDomain &dom, Point z0, int n_boundary);

private:
  JordanDomain dom_;
  Point center_;
  std::vector<Point> zs_;      // boundary samples, zs_[0] is the first vertex
  std::vector<double> sarc_;   // their arclength positions
  std::vector<Point> steps_;   // zipper points a_k after the first slit
  Point wc_;                   // image of the center before the Cayley map
  double winf_ = 0;            // image of zs_[0] before the final step
  bool winf_infinite_ = false;
  bool second_quadrant_ = false;
  std::vector<double> theta_, arc_;

  Point to_halfplane(Point z) const;
  Point from_halfplane(Point F, Point *df = nullptr) const;
  void build_table();
};

RiemannMap compute_riemann_map(const JordanDomain &dom, Point z0, int n_boundary = 2048);

// boundary samples used by the zipper: every vertex plus uniform subdivision of long edges
std::vector<Point> zipper_samples(const JordanDomain &dom, int n_boundary, std::vector<double> *arclength = nullptr);

double hyperbolic_dist_via_map(const RiemannMap &map, Point z, Point w);

// h_Omega(z0, .) at every grid node, pulled back through the map; nodes whose preimage
// leaves the open disk stay unreached
MetricField hyperbolic_field(const MetricGrid &grid, const RiemannMap &map, Point z0);
// criterion integral of the pulled-back field plus a rebuilt field at h/2
CriterionReport integrate_hyperbolic_criterion(const MetricField &field, const RiemannMap &map, double q,
                                               double tolerance = 0.05);

struct KoebeReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::size_t excluded = 0;
  double min_margin = 0;  // min over pairs of the log-distance to the nearer bound, in units of h_D
  double mean_margin = 0;
  double max_abs_log_ratio = 0;
};

// random pairs with |z|, |w| <= r_max and h_D(z, w) <= h_max
KoebeReport verify_koebe(const RiemannMap &map, std::size_t pairs, std::uint64_t seed, double r_max = 0.95,
                         double h_max = 2.0);

struct ConformalityReport {
  std::size_t points = 0;
  double max_cr_residual = 0; // relative Cauchy-Riemann residual
  double max_roundtrip = 0;   // |f^{-1}(f(w)) - w|
};

ConformalityReport check_conformality(const RiemannMap &map, std::size_t points, std::uint64_t seed, double r_max = 0.95);

} // namespace sobext
