#pragma once

#include "sobext/geometry.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace sobext {

struct GridOptions {
  // nodes closer than h/sqrt(2) to the boundary are kept as terminal nodes
  bool keep_fringe = true;
  double eps = default_eps;
};

// row-compressed uniform grid of nodes (i h, j h) strictly inside a domain
class MetricGrid {
public:
  MetricGrid() = default;
  MetricGrid(const JordanDomain &dom, double h, GridOptions opt = {});

  const JordanDomain &domain() const { return *dom_; }
  double spacing() const { return h_; }
  std::size_t size() const { return d_.size(); }
  Point position(std::size_t k) const { return {ii_[k] * h_, jj_[k] * h_}; }
  int col(std::size_t k) const { return ii_[k]; }
  int row(std::size_t k) const { return jj_[k]; }
  double dist(std::size_t k) const { return d_[k]; }
  bool fringe(std::size_t k) const { return fringe_[k] != 0; }
  std::size_t fringe_count() const;
  // -1 when (i, j) is not a grid node
  std::int64_t node(int i, int j) const;

private:
  struct Interval {
    int i0, i1;
    std::uint32_t offset;
  };
  const JordanDomain *dom_ = nullptr;
  double h_ = 0;
  int j0_ = 0;
  std::vector<std::uint32_t> row_begin_; // into intervals_, size rows + 1
  std::vector<Interval> intervals_;
  std::vector<int> ii_, jj_;
  std::vector<double> d_;
  std::vector<std::uint8_t> fringe_;
};

inline MetricGrid build_metric_grid(const JordanDomain &dom, double h, GridOptions opt = {})
{
  return MetricGrid(dom, h, opt);
}

std::vector<std::pair<int, int>> stencil_offsets(int neighbors);

constexpr double unreached_value = std::numeric_limits<double>::infinity();

struct MetricField {
  const MetricGrid *grid = nullptr;
  Point source;
  std::size_t source_node = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> reached;

  std::size_t reached_count() const;
  // bilinear where the four surrounding nodes are reached, otherwise nearest reached node plus a segment
  double value_at(Point p) const;
};

MetricField quasihyperbolic_field(const MetricGrid &grid, Point z0, int neighbors = 32);

struct CriterionReport {
  double q = 1;
  double h = 0;
  double estimate = 0;
  struct Level {
    double h, estimate;
    std::size_t nodes, unreached;
  };
  std::vector<Level> refinement; // decreasing h
  double rel_diff = 0;
  bool converged = false;
  std::string metric = "quasihyperbolic";
};

// h^2 sum of values^q over reached nodes, extended precision accumulation
double integrate_field(const MetricField &field, double q);

// estimate at the field's spacing plus a rebuilt field at h/2
CriterionReport integrate_criterion(const MetricField &field, double q, int neighbors = 32, double tolerance = 0.05);

void write_field_csv(const MetricField &field, const std::string &path);

} // namespace sobext
