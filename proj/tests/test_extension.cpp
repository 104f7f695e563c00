#include "sobext/error.hpp"
#include "sobext/extension.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>

using namespace sobext;

namespace {

const double pi = std::numbers::pi;

struct Chain {
  JordanDomain dom;
  RiemannMap map;
  BoundaryParam phi;
  CrosscutSystem sys;
  ExtensionMesh coarse, fine;
};

std::unique_ptr<Chain> make_chain(JordanDomain dom, Point c, int n_max)
{
  auto s = std::make_unique<Chain>();
  s->dom = std::move(dom);
  s->map = compute_riemann_map(s->dom, c, 1024);
  s->phi = BoundaryParam::radial(s->dom, c);
  int n0 = select_n0(s->phi, s->map, uniform_cycle(16)).n0;
  s->sys = build_crosscuts(DyadicFamily{n0, n_max, 0}, s->phi, s->map);
  s->coarse = build_extension(s->sys, n_max - 1);
  s->fine = build_extension(s->sys, n_max);
  return s;
}

class Extension : public ::testing::Test {
protected:
  static void SetUpTestSuite()
  {
    disk = make_chain(make_regular_polygon(256, 1.0, 0.0, 0.01), 0.0, 7).release();
    square = make_chain(make_rectangle(1, 1, {0, 0}, 0.01), {0.5, 0.5}, 7).release();
  }
  static void TearDownTestSuite()
  {
    delete disk;
    delete square;
  }
  static Chain *disk, *square;
};
Chain *Extension::disk = nullptr;
Chain *Extension::square = nullptr;

TEST(BoundaryParamTest, RadialIsExactAtVertices)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 0.01);
  auto phi = BoundaryParam::radial(sq, {0.5, 0.5});
  for (std::size_t i = 0; i < sq.size(); ++i) {
    Point v = sq.vertices()[i];
    double t = std::arg(v - Point(0.5, 0.5));
    if (t < 0) t += 2 * pi;
    EXPECT_LT(std::abs(phi(t) - v), 1e-12);
    EXPECT_NEAR(phi.angle_of(v), t, 1e-12);
  }
}

TEST(BoundaryParamTest, RejectsBadInput)
{
  JordanDomain L({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, 0.01);
  EXPECT_THROW(BoundaryParam::radial(L, {1.8, 0.5}), Error);
  EXPECT_THROW(BoundaryParam::radial(L, {1.5, 1.5}), Error);
  EXPECT_THROW(BoundaryParam(L, {0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}), Error);
  EXPECT_THROW(BoundaryParam(L, {0.0, 1.0}, {0.0, 9.0}), Error);
}

TEST(BoundaryParamTest, SaveLoadRoundTrip)
{
  auto sq = make_rectangle(1, 1, {0, 0}, 0.01);
  BoundaryParam phi(sq, {0.0, 1.0, 3.0, 5.0}, {0.5, 1.2, 2.0, 3.9});
  std::string path = ::testing::TempDir() + "phi_roundtrip.json";
  phi.save(path);
  auto back = BoundaryParam::load(path, sq);
  std::remove(path.c_str());
  for (double t = 0; t < 2 * pi; t += 0.3) EXPECT_EQ(back.arclength_at(t), phi.arclength_at(t));
}

TEST_F(Extension, AllCellsPositiveAndTraceExact)
{
  for (Chain *s : {disk, square})
    for (ExtensionMesh *m : {&s->coarse, &s->fine}) {
      EXPECT_EQ(m->positive_cells(), m->cells.size());
      EXPECT_EQ(m->simple_cells(), m->cells.size());
      EXPECT_EQ(m->boundary_trace_error, 0.0);
      for (auto &v : m->vertices)
        if (v.boundary) {
          double t = std::arg(v.x);
          if (t < 0) t += 2 * pi;
          EXPECT_LT(std::abs(v.image - s->phi(t)), 1e-12);
        }
    }
}

TEST_F(Extension, CellCountsDoublePerLevel)
{
  EXPECT_EQ(disk->fine.cells.size(), 2 * disk->coarse.cells.size());
  EXPECT_EQ(disk->fine.n_max, 7);
  EXPECT_EQ(disk->fine.n0, 4);
}

TEST_F(Extension, DiskEnergyOfNearIdentity)
{
  // Phi is close to the identity, |DPhi|_HS = sqrt2, energy 2^{p/2} pi
  for (double p : {1.0, 1.5, 1.9}) {
    double oracle = std::pow(2.0, p / 2) * pi;
    EXPECT_NEAR(sobolev_energy(disk->fine, p), oracle, 2e-3 * oracle) << "p=" << p;
  }
  EXPECT_LT(disk->fine.max_displacement, 1e-3);
}

TEST_F(Extension, EnergyRefinementDrift)
{
  for (Chain *s : {disk, square}) {
    auto e = energy_refinement(s->coarse, s->fine, 1.5);
    EXPECT_LE(e.drift, 0.05);
    EXPECT_GT(e.coarse, 0);
  }
  EXPECT_THROW(sobolev_energy(disk->fine, 2.0), Error);
}

TEST_F(Extension, RejectsDepthOutsideCrosscuts)
{
  EXPECT_THROW(build_extension(disk->sys, 9), Error);
  EXPECT_THROW(build_extension(disk->sys, 3), Error);
}

TEST_F(Extension, MeshCsv)
{
  std::string path = ::testing::TempDir() + "mesh.csv";
  write_mesh_csv(disk->coarse, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("disk_x,disk_y,image_x,image_y", 0), 0u);
  std::remove(path.c_str());
}

} // namespace
