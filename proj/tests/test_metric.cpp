#include "sobext/error.hpp"
#include "sobext/metric.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

using namespace sobext;

namespace {

const double pi = std::numbers::pi;

// k_D(0, r) on the unit disk
double disk_qh(double r) { return -std::log1p(-r); }

TEST(Stencil, SizesAndSymmetry)
{
  EXPECT_EQ(stencil_offsets(8).size(), 8u);
  EXPECT_EQ(stencil_offsets(16).size(), 16u);
  EXPECT_EQ(stencil_offsets(32).size(), 32u);
  for (auto [a, b] : stencil_offsets(32)) {
    auto s = stencil_offsets(32);
    EXPECT_NE(std::find(s.begin(), s.end(), std::make_pair(-a, -b)), s.end());
    EXPECT_NE(std::find(s.begin(), s.end(), std::make_pair(b, a)), s.end());
  }
  EXPECT_THROW(stencil_offsets(12), Error);
}

TEST(Grid, NodesLieInsideWithBoundaryDistance)
{
  JordanDomain L({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, 0.05);
  MetricGrid g(L, 0.05);
  ASSERT_GT(g.size(), 0u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    Point p = g.position(k);
    EXPECT_TRUE(L.contains(p));
    EXPECT_DOUBLE_EQ(g.dist(k), L.dist_to_boundary(p));
    EXPECT_EQ(g.node(g.col(k), g.row(k)), (std::int64_t)k);
    EXPECT_EQ(g.fringe(k), g.dist(k) <= 0.05 * std::sqrt(0.5));
  }
  // (1.5, 1.5) is outside the L
  EXPECT_EQ(g.node(30, 30), -1);
  // node count tracks the area
  EXPECT_NEAR(g.size() * 0.05 * 0.05, L.area(), 0.15 * L.area());
}

TEST(Grid, RejectsSpacingCoarserThanHint)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 0.01);
  EXPECT_THROW(MetricGrid(sq, 0.02), Error);
  EXPECT_THROW(MetricGrid(sq, 0.0), Error);
}

TEST(Quasihyperbolic, DiskRadialClosedForm)
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 128);
  MetricGrid g(disk, 1.0 / 128);
  auto f = quasihyperbolic_field(g, 0.0);
  EXPECT_EQ(f.reached_count(), g.size());
  EXPECT_EQ(f.values[f.source_node], 0.0);
  for (double r = 0.1; r <= 0.901; r += 0.1) {
    for (double a : {0.0, 0.37, 1.1}) {
      Point p = std::polar(r, a);
      EXPECT_NEAR(f.value_at(p), disk_qh(r), 0.01 * disk_qh(r)) << "r=" << r << " angle=" << a;
    }
  }
}

TEST(Quasihyperbolic, MonotoneAlongRays)
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 64);
  MetricGrid g(disk, 1.0 / 64);
  auto f = quasihyperbolic_field(g, 0.0);
  for (int i = 1; i < 60; ++i) EXPECT_GT(f.values[g.node(i + 1, 0)], f.values[g.node(i, 0)]);
}

TEST(Quasihyperbolic, SquareRotationSymmetry)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 1.0 / 64);
  MetricGrid g(sq, 1.0 / 64);
  auto f = quasihyperbolic_field(g, {0.5, 0.5});
  for (std::size_t k = 0; k < g.size(); ++k) {
    int i = g.col(k) - 32, j = g.row(k) - 32;
    auto r = g.node(32 - j, 32 + i);
    ASSERT_GE(r, 0);
    EXPECT_NEAR(f.values[k], f.values[(std::size_t)r], 1e-12);
  }
}

TEST(Quasihyperbolic, FinerStencilIsNeverLonger)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 1.0 / 32);
  MetricGrid g(sq, 1.0 / 32);
  auto f8 = quasihyperbolic_field(g, {0.5, 0.5}, 8);
  auto f32 = quasihyperbolic_field(g, {0.5, 0.5}, 32);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_LE(f32.values[k], f8.values[k] + 1e-12);
}

TEST(Quasihyperbolic, SourceOutsideRejected)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 0.05);
  MetricGrid g(sq, 0.05);
  EXPECT_THROW(quasihyperbolic_field(g, {2, 2}), Error);
}

TEST(Criterion, DiskQ1MatchesRadialQuadrature)
{
  // 2 pi int_0^1 r (-log(1 - r)) dr by tanh-sinh, frozen as 3 pi / 2
  double oracle = 2 * pi * boost::math::quadrature::tanh_sinh<double>().integrate(
                               [](double r) { return r * disk_qh(r); }, 0.0, 1.0);
  ASSERT_NEAR(oracle, 1.5 * pi, 1e-9);

  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 256);
  MetricGrid g(disk, 1.0 / 256);
  auto f = quasihyperbolic_field(g, 0.0);
  auto rep = integrate_criterion(f, 1.0);
  EXPECT_NEAR(rep.estimate, oracle, 0.02 * oracle);
  EXPECT_NEAR(rep.refinement.back().estimate, oracle, 0.02 * oracle);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.refinement.size(), 2u);
  EXPECT_EQ(rep.refinement[1].h, rep.h / 2);
}

TEST(Criterion, AreaAtQ1OfConstantFieldAndQBelowOne)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 1.0 / 32);
  MetricGrid g(sq, 1.0 / 32);
  auto f = quasihyperbolic_field(g, {0.5, 0.5});
  for (auto &v : f.values) v = 1.0;
  EXPECT_NEAR(integrate_field(f, 2.5), g.size() / 1024.0, 1e-12);
  EXPECT_THROW(integrate_field(f, 0.5), Error);
}

TEST(Csv, OneRowPerNode)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 0.1);
  MetricGrid g(sq, 0.1);
  auto f = quasihyperbolic_field(g, {0.5, 0.5});
  std::string path = ::testing::TempDir() + "field.csv";
  write_field_csv(f, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,d_boundary,k_value,reached");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, g.size());
  std::remove(path.c_str());
}

} // namespace
