#pragma once

#include "sobext/boundary_param.hpp"
#include "sobext/geometry.hpp"
#include "sobext/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sobext {

// ---------------------------------------------------------------- Smith-Volterra-Cantor set

struct Interval1 {
  double a = 0, b = 0;
  double length() const { return b - a; }
  double mid() const { return 0.5 * (a + b); }
};

struct SVCSet {
  int depth = 0;
  std::vector<std::vector<Interval1>> levels; // levels[n][j-1] = I_{n,j}, n = 0..depth

  const Interval1 &interval(int n, int j) const { return levels[n][j - 1]; }
  static double radius(int k);                // r_k = 4^{-k}/2
  double center(int k, int j) const;          // R_{k,j}, 1 <= j <= 2^{k-1}
  double removed_measure() const;             // summed over the removed intervals
};

SVCSet build_svc(int depth);
// sum_{n <= d} 2^{n-1} 4^{-n}
double svc_removed_closed_form(int depth);

// ---------------------------------------------------------------- tree core

// straight piece (curvature 0) or circular arc; positive curvature turns left
struct CorePiece {
  Point a;
  Point dir; // unit tangent at a
  double length = 0;
  double curvature = 0;
  double u0 = 0; // arclength offset inside the branch

  Point position(double u) const; // u measured from the piece start
  Point tangent(double u) const;
  // position(u2) - position(u1) computed without cancellation
  Point chord(double u1, double u2) const;
  // position(u1 + d) - position(u1), exact for increments below the resolution of u1
  Point step(double u1, double d) const;
};

// gamma_{k,j}: from r_{k-1,ceil(j/2)} (p0 when k = 1) to r_{k,j}
struct Branch {
  int k = 0, j = 0;
  Point start, p, q, r;
  double push = 0;        // snake offset from the centre line of I_{k,j}
  double half_width = 0;  // |I_{k,j}|/2
  double length = 0;      // exact length of the rounded curve
  double raw_length = 0;  // unrounded snake pushed to the rectangle sides, p to q
  std::vector<CorePiece> pieces;

  // u in [0, length]
  std::size_t piece_at(double u) const;
  Point position(double u) const;
  Point tangent(double u) const;
  // sample u values: piece ends plus arc_samples per quarter turn and straight steps of at most max_step
  std::vector<double> samples(double u0, double u1, int arc_samples = 12, double max_step = 1.0 / 64) const;
  std::vector<Point> polyline(int arc_samples = 12) const;
};

double rounding_radius(int k); // 2^{-2(k+1)-1}

struct TreeCurve {
  int depth = 0;
  SVCSet svc;
  Point p0;
  std::vector<std::vector<Branch>> levels; // levels[k-1][j-1]

  const Branch &branch(int k, int j) const { return levels[k - 1][j - 1]; }
  double rounding(int k) const { return rounding_radius(k); }
};

TreeCurve build_tree_curve(int depth);

struct TreeCheck {
  std::size_t segments = 0;
  std::size_t crossings = 0;
  double max_length_error = 0; // |length - 1| relative
  double sampled_length_error = 0;
  double raw_length_min = 0, raw_length_max = 0;
  double max_branch_offset = 0; // |r_{k,j} - q_{k,j}| / rounding radius
};
// pairwise segment tests over all branch polylines; throws Error(validation) naming the first crossing
TreeCheck verify_tree(const TreeCurve &tree, int arc_samples = 6);

// ---------------------------------------------------------------- fingers

int choose_M(int depth);
double finger_width(double t, double M);   // g(t) = e^{-M} exp(-exp(t))
// width used for rendered polygons: g floored at 2^{-(2t+12)} so that offsets stay representable
double rendered_width(double t, double M);

struct FingerSample {
  double t;
  Point core, tangent;
};

struct Finger {
  std::vector<int> J; // j_1 .. j_K
  double M = 0;
  int K = 0;
  const TreeCurve *tree = nullptr;
  std::vector<FingerSample> samples;
  std::vector<Point> x1, x2; // rendered offsets, + side (right of the core) and - side

  const Branch &branch(int k) const { return tree->branch(k, J[k - 1]); }
  Point core(double t) const;
  Point tangent(double t) const;
  double curvature(double t) const;
  // alpha(t + dt) - alpha(t) in local terms, valid for small |dt|
  Point displacement(double t, double dt) const;
};

// J consistent means j_k = ceil(j_{k+1}/2); throws Error(validation) otherwise or on offset crossings
Finger offset_finger(const TreeCurve &tree, const std::vector<int> &J, double M, int K, bool verify = true);
// branch sequence of the finger ending at leaf (K, j)
std::vector<int> branch_sequence(int K, int j);

// ---------------------------------------------------------------- assembled domain

struct BoundaryAnchor {
  int k = 0, j = 0;
  int side = 0;       // +1 for r^+_{k,j}, -1 for r^-_{k,j}, 0 for the root point
  std::size_t vertex = 0;
  Point point;
};

struct CounterexampleDomain {
  int K = 0;
  double M = 0;
  Point p0;
  Point p0_plus; // boundary point above p0, where the parametrization starts and ends
  JordanDomain domain;
  std::vector<BoundaryAnchor> anchors; // traversal order, root first
  double area_bound = 0;               // sum_k 2^k * 2 max W over [k-1,k]
};

CounterexampleDomain assemble_domain(const TreeCurve &tree, double M, int K, bool validate = true);

// ---------------------------------------------------------------- parametrization

struct ParamAnchor {
  double sigma = 0; // parameter in [-1, 2]
  double s = 0;     // boundary arclength from p0_plus
  BoundaryAnchor anchor;
  Point designated; // tip named by the anchor equality, rebuilt from the SVC data
  std::string rule; // which anchor equality fixed sigma
};

class CounterexampleParam {
public:
  CounterexampleParam() = default;
  CounterexampleParam(const CounterexampleDomain &dom, const SVCSet &svc);

  const std::vector<ParamAnchor> &anchors() const { return anchors_; }
  Point operator()(double sigma) const; // phi on [-1, 2]
  static double angle_of_parameter(double sigma) { return 2.0 * 3.14159265358979323846 * (sigma + 1.0) / 3.0; }
  static double parameter_of_angle(double theta) { return 3.0 * theta / (2.0 * 3.14159265358979323846) - 1.0; }
  // phi composed with the affine angle map, as a BoundaryParam on the circle
  BoundaryParam circle_param() const;
  // parameter measure of C' at truncation: sum of |I_{K,j}|
  double cantor_measure() const { return cantor_measure_; }
  // number of anchors whose phi value differs from the designated tip (0 when exact)
  std::size_t anchor_mismatches() const;

private:
  const CounterexampleDomain *dom_ = nullptr;
  std::vector<ParamAnchor> anchors_;
  double cantor_measure_ = 0;
};

CounterexampleParam build_boundary_param(const CounterexampleDomain &dom, const SVCSet &svc);

// ---------------------------------------------------------------- verification

struct ShellTotal {
  int k = 0;
  std::string source; // "grid" or "model"
  double total = 0;   // level total over the 2^k shells
  double ratio = 0;   // total / previous total, 0 for k = 1
  std::size_t nodes = 0;
};

struct IntegrabilityReport {
  double h = 0;
  int resolvable_depth = 0;
  std::size_t grid_nodes = 0;
  std::vector<ShellTotal> shells;
  double cumulative = 0;
  double series_constant = 0; // max_k total_k / (2/e)^k
  double cap = 0;             // series_constant * 2/(e-2)
  double max_ratio = 0;       // over all successive shells
  double tail_max_ratio = 0;  // over shells k >= 3
  bool ratios_ok = false;     // every successive ratio <= 0.8
  bool bounded = false;       // cumulative <= cap
};

// model shell integral int_{k-1}^{k} [2 int_0^t g(t)/g(s) ds + 2 g(t)] dt
double model_shell_integral(int k, double M);

IntegrabilityReport verify_integrability(const CounterexampleDomain &dom, const TreeCurve &tree, double h,
                                         int neighbors = 32);

struct BlowupTarget {
  int j = 0;
  double certified = 0; // int_0^K (1 - g |kappa|) dt
  double tube_path = 0; // shortest path on the (t, u) tube graph
};

struct BlowupReport {
  int K = 0;
  std::vector<BlowupTarget> targets;
  double min_certified = 0, min_tube_path = 0;
  int argmin = 0;
};

BlowupReport blowup_report(const TreeCurve &tree, double M, int K, int u_levels = 9);

struct OffsetDistanceReport {
  std::size_t samples = 0;
  double c_star = 8;
  double min_ratio = 0, max_ratio = 0;
  std::size_t outside_band = 0;
  std::size_t skipped = 0; // samples where g(t) underflows double precision
};

// d(x, side curves) / (g(t) - |r|) for random (t, r) in the finger, with the true width g
OffsetDistanceReport verify_offset_distance(const Finger &finger, std::size_t samples, std::uint64_t seed,
                                            double c_star = 8.0);

// ---------------------------------------------------------------- output

json to_json(const IntegrabilityReport &r);
json to_json(const BlowupReport &r);
json to_json(const OffsetDistanceReport &r);
json to_json(const TreeCheck &r);
void save_domain_svg(const CounterexampleDomain &dom, const TreeCurve &tree, const std::string &path);

} // namespace sobext
