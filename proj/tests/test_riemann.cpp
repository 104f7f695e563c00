#include "sobext/error.hpp"
#include "sobext/hyperbolic.hpp"
#include "sobext/riemann.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/ellint_1.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

using namespace sobext;

namespace {

const double pi = std::numbers::pi;

JordanDomain lshape(double hint = 0.01) { return JordanDomain({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, hint); }

TEST(Zipper, SamplesIncludeEveryVertex)
{
  auto L = lshape();
  std::vector<double> s;
  auto zs = zipper_samples(L, 256, &s);
  ASSERT_EQ(zs.size(), s.size());
  EXPECT_GE(zs.size(), 256u);
  for (auto v : L.vertices()) EXPECT_NE(std::find(zs.begin(), zs.end(), v), zs.end());
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_GT(s[k], s[k - 1]);
}

TEST(Riemann, DiskPolygonIsNearlyARotation)
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 0.01);
  auto m = compute_riemann_map(disk, 0.0, 1024);
  EXPECT_NEAR(std::abs(m.forward(0.0)), 0.0, 1e-9);
  for (int k = 0; k < 32; ++k) {
    Point w = std::polar(0.6, 0.2 * k);
    EXPECT_NEAR(std::abs(m.forward(w)), 0.6, 1e-3);
  }
  // conformal radius of the inscribed 256-gon is within 1e-4 of 1
  EXPECT_NEAR(m.derivative(0.0), 1.0, 1e-3);
}

TEST(Riemann, RectangleConformalRadius)
{
  // 2x1 rectangle centred at 0: |f'(0)| = 2 / ((1 + k) K(k)) with k = 1/sqrt2
  double k = 1 / std::sqrt(2.0);
  double oracle = 2 / ((1 + k) * boost::math::ellint_1(k));
  auto rect = make_rectangle(2, 1, {-1, -0.5}, 0.01);
  auto m = compute_riemann_map(rect, 0.0, 2048);
  EXPECT_NEAR(m.derivative(0.0), oracle, 1e-3 * oracle);
  Point df;
  m.forward(0.0, df);
  EXPECT_NEAR(std::abs(df), oracle, 1e-3 * oracle);
}

TEST(Riemann, KoebeOnThreeDomains)
{
  struct Case {
    JordanDomain d;
    Point c;
  };
  std::vector<Case> cases = {{make_regular_polygon(256, 1.0, 0.0, 0.01), 0.0},
                             {make_rectangle(1, 1, {0, 0}, 0.01), {0.5, 0.5}},
                             {lshape(), {0.5, 0.5}}};
  for (auto &c : cases) {
    auto m = compute_riemann_map(c.d, c.c, 1024);
    auto rep = verify_koebe(m, 500, 1);
    EXPECT_EQ(rep.pairs, 500u);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_GE(rep.min_margin, 0.0);
  }
}

TEST(Riemann, ConformalAndInvertibleOnLShape)
{
  auto L = lshape();
  auto m = compute_riemann_map(L, {0.5, 0.5}, 1024);
  auto rep = check_conformality(m, 200, 2);
  EXPECT_LT(rep.max_cr_residual, 1e-3);
  EXPECT_LT(rep.max_roundtrip, 1e-8);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Point w = std::polar(0.97 * std::sqrt(U(rng)), 2 * pi * U(rng));
    EXPECT_TRUE(L.contains(m.forward(w)));
  }
}

TEST(Riemann, BoundaryCorrespondenceIsMonotone)
{
  auto L = lshape();
  auto m = compute_riemann_map(L, {0.5, 0.5}, 512);
  const auto &th = m.table_theta();
  const auto &s = m.table_arclength();
  EXPECT_EQ(th.front(), 0.0);
  for (std::size_t k = 1; k < th.size(); ++k) {
    EXPECT_GT(th[k], th[k - 1]);
    EXPECT_GT(s[k], s[k - 1]);
  }
  for (double t = 0.1; t < 2 * pi; t += 0.37) EXPECT_NEAR(m.angle_of_arclength(m.arclength_of_angle(t)), t, 1e-9);
  // boundary image agrees with the radial limit of f
  for (double t = 0.3; t < 2 * pi; t += 0.9)
    EXPECT_LT(std::abs(m.forward(std::polar(1 - 1e-7, t)) - m.boundary_image(t)), 2e-3);
}

TEST(Riemann, SaveLoadRoundTrip)
{
  auto L = lshape();
  auto m = compute_riemann_map(L, {0.5, 0.5}, 256);
  std::string path = ::testing::TempDir() + "map_roundtrip.json";
  m.save(path);
  auto r = RiemannMap::load(path);
  std::remove(path.c_str());
  for (double t = 0; t < 2 * pi; t += 0.5) {
    Point w = std::polar(0.8, t);
    EXPECT_EQ(r.forward(w), m.forward(w));
    EXPECT_EQ(r.inverse(m.forward(w)), m.inverse(m.forward(w)));
  }
  EXPECT_EQ(r.table_theta(), m.table_theta());
}

TEST(Riemann, RejectsCenterOutside)
{
  EXPECT_THROW(compute_riemann_map(lshape(), {1.5, 1.5}, 256), Error);
}

TEST(Riemann, HyperbolicDistanceIsMapIndependentOnDisk)
{
  auto disk = make_regular_polygon(256, 1.0, 0.0, 0.01);
  auto m = compute_riemann_map(disk, 0.0, 1024);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Point z = std::polar(0.8 * U(rng), 2 * pi * U(rng)), w = std::polar(0.8 * U(rng), 2 * pi * U(rng));
    double d = hyperbolic_dist_disk(z, w);
    EXPECT_NEAR(hyperbolic_dist_via_map(m, z, w), d, 5e-3 * std::max(1.0, d));
  }
}

TEST(Riemann, HyperbolicWithinFactorTwoOfQuasihyperbolic)
{
  auto L = lshape(0.02);
  auto m = compute_riemann_map(L, {0.5, 0.5}, 1024);
  MetricGrid g(L, 0.02);
  auto k = quasihyperbolic_field(g, {0.5, 0.5});
  auto h = hyperbolic_field(g, m, {0.5, 0.5});
  std::size_t checked = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    // the grid value carries a few percent of metrication error
    if (!h.reached[i] || k.values[i] < 0.5) continue;
    EXPECT_GE(h.values[i], 0.5 * k.values[i] * 0.97);
    EXPECT_LE(h.values[i], 2.0 * k.values[i] * 1.03);
    ++checked;
  }
  EXPECT_GT(checked, 5000u);
}

TEST(HyperbolicCriterion, DiskRadialQuadrature)
{
  // int_D log((1+r)/(1-r)) dA = 2 pi
  double oracle = 2 * pi * boost::math::quadrature::tanh_sinh<double>().integrate(
                               [](double r) { return r * std::log((1 + r) / (1 - r)); }, 0.0, 1.0);
  ASSERT_NEAR(oracle, 2 * pi, 1e-9);
  auto disk = make_regular_polygon(256, 1.0, 0.0, 1.0 / 32);
  auto m = compute_riemann_map(disk, 0.0, 512);
  MetricGrid g(disk, 1.0 / 32);
  auto f = hyperbolic_field(g, m, 0.0);
  EXPECT_EQ(f.reached_count(), g.size());
  EXPECT_NEAR(integrate_field(f, 1.0), oracle, 0.05 * oracle);
}

} // namespace
