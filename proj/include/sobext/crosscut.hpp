#pragma once

#include "sobext/boundary_param.hpp"
#include "sobext/geometry.hpp"
#include "sobext/report.hpp"
#include "sobext/riemann.hpp"

#include <string>
#include <vector>

namespace sobext {

// arcs I_{n,j} = [offset + 2 pi j / 2^n, offset + 2 pi (j+1) / 2^n)
struct DyadicFamily {
  int n0 = 1;
  int n_max = 10;
  double offset = 0;

  static std::size_t count(int n) { return std::size_t(1) << n; }
  double angle(int n, std::size_t j) const;
  // half-open arcs, so an endpoint belongs to the arc on its counterclockwise side
  std::size_t arc_of(int n, double theta) const;
};

// points on the unit circle in strictly increasing angular order from the first one
class Cycle {
public:
  explicit Cycle(std::vector<Point> pts, double tol = default_eps);
  const std::vector<Point> &points() const { return pts_; }
  double max_step() const;

private:
  std::vector<Point> pts_;
};

// N points at angles 2 pi (j + 1/2) / N
Cycle uniform_cycle(int n);

// xi-angle of the boundary point phi(theta): arg f^{-1}(phi(e^{i theta}))
double xi_angle(const BoundaryParam &phi, const RiemannMap &map, double theta);

struct N0Report {
  int n0 = 0;
  int separating_level = 0; // first level with at most one y_j per arc
  std::vector<double> y;    // phi^{-1}(f(P_j)) as angles
  double max_gap = 0;       // max |xi_{j+1} - xi_j| over level-n0 endpoints
  double gap_bound = 0;     // 4 pi / (1 + pi^2)
  double cycle_step = 0;
};

N0Report select_n0(const BoundaryParam &phi, const RiemannMap &map, const Cycle &seed, int cap = 20);

struct Crosscut {
  int n = 0;
  std::size_t j = 0;
  double theta1 = 0, theta2 = 0; // x-circle endpoint angles
  Point xi1, xi2;                // preimage geodesic endpoints
  std::vector<Point> path;       // polyline in the domain, ends exactly at phi(x)
  double length = 0;
};

struct CrosscutSystem {
  DyadicFamily family;
  const BoundaryParam *phi = nullptr;
  const RiemannMap *map = nullptr;
  std::vector<std::vector<Crosscut>> levels; // levels[n - n0]
  double max_xi_gap = 0;

  const Crosscut &at(int n, std::size_t j) const { return levels[(std::size_t)(n - family.n0)][j]; }
};

CrosscutSystem build_crosscuts(const DyadicFamily &family, const BoundaryParam &phi, const RiemannMap &map,
                               int samples = 48);

struct DisjointnessReport {
  std::size_t crosscuts = 0;
  std::size_t segments = 0;
  std::size_t crossings = 0;
  std::string first_offender;
};

// crossings closer to a shared endpoint than the local contact radius are legal contact
DisjointnessReport check_disjointness(const CrosscutSystem &sys);

// c(q) = 4 c1^2 zeta(q), c1^2 = 72 pi e^{6 sqrt2 pi} / (log 2)^q
double lemma21_constant(double q);

struct Lemma21Report {
  int n = 0;
  std::size_t j = 0;
  double q = 0;
  double xi_gap = 0;
  bool hypothesis = false; // xi gap within 4 pi / (1 + pi^2)
  double length = 0;
  double integral = 0;
  double c_q = 0;
  double ratio = 0; // length^2 / integral
  std::size_t nodes = 0;
  double spacing = 0;
  bool inconclusive = false;
  bool holds = false;
};

// integrates h_Omega(z, f(0))^q over the region between the crosscut and its boundary arc
Lemma21Report lemma21_check(const CrosscutSystem &sys, int n, std::size_t j, double q, double h_main);

struct SeriesLevel {
  int n = 0;
  double sum_lp = 0;     // sum_j l^p
  double sum_l2 = 0;     // sum_j l^2
  double term = 0;       // 2^{(p-2)n} sum_j l^p
  double cumulative = 0;
  double ratio = 0;      // term_n / term_{n-1}, nan at the first level
};

struct SeriesReport {
  double p = 0;
  std::vector<SeriesLevel> levels;
  std::string verdict; // convergent, divergent_trend, inconclusive
  double rate = 0;     // max of the last three ratios
  double tail_bound = 0;
  double total_bound = 0;
  double holder_m = 0;
  std::vector<double> holder_terms;
  double holder_sum = 0; // including the geometric tail
};

SeriesReport series_from_lengths(int n0, const std::vector<std::vector<double>> &lengths, double p);
SeriesReport series_check(const CrosscutSystem &sys, double p);

json to_json(const N0Report &r);
json to_json(const Lemma21Report &r);
json to_json(const SeriesReport &r);
json to_json(const DisjointnessReport &r);

} // namespace sobext
