#include "sobext/extension.hpp"
#include "sobext/error.hpp"
#include "sobext/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace sobext {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2 * pi;

const double gauss_x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
const double gauss_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

double wrap(double t)
{
  t = std::fmod(t, two_pi);
  return t < 0 ? t + two_pi : t;
}

// piecewise linear values along one cell edge
struct Edge {
  int count = 0;
  double th[3]{}, rho[3]{}, Th[3]{};

  void eval(double t, double &r, double &rt, double &T, double &Tt) const
  {
    int k = (count == 3 && t > th[1]) ? 1 : 0;
    double u = (t - th[k]) / (th[k + 1] - th[k]);
    double dt = th[k + 1] - th[k];
    r = rho[k] + u * (rho[k + 1] - rho[k]);
    rt = (rho[k + 1] - rho[k]) / dt;
    T = Th[k] + u * (Th[k + 1] - Th[k]);
    Tt = (Th[k + 1] - Th[k]) / dt;
  }
};

struct CellGeom {
  bool fan = false;
  double r_in = 0, r_out = 0;
  Edge in, out;

  // psi at (r, t) with polar partial derivatives
  void eval(double r, double t, double &rho, double &rho_r, double &rho_t, double &T, double &T_r,
            double &T_t) const
  {
    double ro, rot, To, Tot;
    out.eval(t, ro, rot, To, Tot);
    if (fan) {
      double s = r / r_out;
      rho = s * ro;
      rho_r = ro / r_out;
      rho_t = s * rot;
      T = To;
      T_r = 0;
      T_t = Tot;
      return;
    }
    double ri, rit, Ti, Tit;
    in.eval(t, ri, rit, Ti, Tit);
    double L = r_out - r_in, s = (r - r_in) / L;
    rho = (1 - s) * ri + s * ro;
    rho_r = (ro - ri) / L;
    rho_t = (1 - s) * rit + s * rot;
    T = (1 - s) * Ti + s * To;
    T_r = (To - Ti) / L;
    T_t = (1 - s) * Tit + s * Tot;
  }
};

} // namespace

std::size_t ExtensionMesh::positive_cells() const
{
  return (std::size_t)std::count_if(cells.begin(), cells.end(), [](const MeshCell &c) { return c.jacobian_min > 0; });
}

std::size_t ExtensionMesh::simple_cells() const
{
  return (std::size_t)std::count_if(cells.begin(), cells.end(), [](const MeshCell &c) { return c.simple; });
}

ExtensionMesh build_extension(const CrosscutSystem &sys, int n_max)
{
  const BoundaryParam &phi = *sys.phi;
  const RiemannMap &map = *sys.map;
  int n0 = sys.family.n0;
  int nm = n_max < 0 ? sys.family.n_max : n_max;
  if (nm < n0 || nm > sys.family.n_max) fail_validation("extension depth outside the crosscut levels");
  if (sys.family.offset != 0) fail_validation("extension mesh assumes a zero dyadic offset");

  ExtensionMesh mesh;
  mesh.n0 = n0;
  mesh.n_max = nm;

  double h0 = xi_angle(phi, map, 0.0);
  auto H = [&](std::size_t i, std::size_t m) {
    if (i == 0) return h0;
    if (i == m) return h0 + two_pi;
    return h0 + wrap(xi_angle(phi, map, two_pi * (double)i / (double)m) - h0);
  };

  // per ring circle: values at i = 0..m (index m repeats 0 with Theta + 2 pi) and vertex ids
  struct Ring {
    double R;
    std::size_t m;
    std::vector<double> rho, Th;
    std::vector<std::size_t> id;
  };
  std::vector<Ring> rings;
  for (int n = n0; n <= nm; ++n) {
    double d = two_pi / std::exp2(n);
    Ring c;
    c.R = (1 - std::sin(d / 2)) / std::cos(d / 2);
    c.m = std::size_t(2) << n;
    c.rho.resize(c.m + 1);
    c.Th.resize(c.m + 1);
    for (std::size_t i = 0; i <= c.m; ++i) c.Th[i] = H(i, c.m);
    for (std::size_t i = 1; i < c.m; i += 2) {
      const Crosscut &cc = sys.at(n, (i - 1) / 2);
      double hit = DiskGeodesic(cc.xi1, cc.xi2).ray_hit(std::polar(1.0, c.Th[i]));
      c.rho[i] = hit > 0 ? hit : c.R;
    }
    for (std::size_t i = 0; i < c.m; i += 2) c.rho[i] = 0.5 * (c.rho[(i + c.m - 1) % c.m] + c.rho[i + 1]);
    c.rho[c.m] = c.rho[0];
    mesh.radii.push_back(c.R);
    rings.push_back(std::move(c));
  }
  {
    Ring c;
    c.R = 1;
    c.m = std::size_t(4) << nm;
    c.rho.assign(c.m + 1, 1.0);
    c.Th.resize(c.m + 1);
    for (std::size_t i = 0; i <= c.m; ++i) c.Th[i] = H(i, c.m);
    rings.push_back(std::move(c));
  }

  for (std::size_t k = 0; k < rings.size(); ++k) {
    Ring &c = rings[k];
    bool outer = k + 1 == rings.size();
    c.id.resize(c.m + 1);
    for (std::size_t i = 0; i < c.m; ++i) {
      MeshVertex v;
      double t = two_pi * (double)i / (double)c.m;
      v.x = std::polar(c.R, t);
      v.rho = c.rho[i];
      v.theta = c.Th[i];
      v.level = outer ? nm + 1 : n0 + (int)k;
      v.boundary = outer;
      v.image = outer ? phi(t) : map.forward(std::polar(v.rho, v.theta));
      if (outer) mesh.boundary_trace_error = std::max(mesh.boundary_trace_error, std::abs(v.image - phi(t)));
      mesh.max_displacement = std::max(mesh.max_displacement, std::abs(v.image - v.x));
      c.id[i] = mesh.vertices.size();
      mesh.vertices.push_back(v);
    }
    c.id[c.m] = c.id[0];
    if (outer) {
      for (std::size_t i = 0; i < c.m; ++i) {
        double t = two_pi * (i + 0.5) / (double)c.m;
        Point mid = map.boundary_image(0.5 * (c.Th[i] + c.Th[i + 1]));
        mesh.boundary_midpoint_error = std::max(mesh.boundary_midpoint_error, std::abs(mid - phi(t)));
      }
    }
  }

  auto phi_cell = [&](const CellGeom &g, double r, double t) {
    if (r >= 1) {
      double ro, rot, To, Tot;
      g.out.eval(t, ro, rot, To, Tot);
      return map.boundary_image(To);
    }
    double rho, a, b, T, c, d;
    g.eval(r, t, rho, a, b, T, c, d);
    return map.forward(std::polar(rho, T));
  };

  auto add_cell = [&](MeshCell cell, const CellGeom &g) {
    auto cid = (std::uint32_t)mesh.cells.size();
    double jmin = std::numeric_limits<double>::infinity();
    double tm = 0.5 * (cell.th_a + cell.th_b);
    for (int half = 0; half < 2; ++half) {
      double t0 = half ? tm : cell.th_a, t1 = half ? cell.th_b : tm;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          double r = 0.5 * (cell.r_in + cell.r_out) + 0.5 * (cell.r_out - cell.r_in) * gauss_x[a];
          double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gauss_x[b];
          double rho, rho_r, rho_t, T, T_r, T_t;
          g.eval(r, t, rho, rho_r, rho_t, T, T_r, T_t);
          double m11 = rho_r, m12 = rho_t / r, m21 = rho * T_r, m22 = rho * T_t / r;
          Point df;
          map.forward(std::polar(rho, T), df);
          double fd = std::abs(df);
          double det = fd * fd * (m11 * m22 - m12 * m21);
          jmin = std::min(jmin, det);
          mesh.q_weight.push_back(0.25 * (cell.r_out - cell.r_in) * (t1 - t0) * gauss_w[a] * gauss_w[b] * r);
          mesh.q_norm.push_back(fd * std::sqrt(m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22));
          mesh.q_cell.push_back(cid);
        }
    }
    cell.jacobian_min = jmin;

    // image of the cell outline, counterclockwise
    std::vector<Point> poly;
    constexpr int sub = 2;
    auto along = [&](double r, double ta, double tb) {
      for (int s = 0; s < sub * 2; ++s) poly.push_back(phi_cell(g, r, ta + (tb - ta) * s / (sub * 2.0)));
    };
    auto radial = [&](double t, double ra, double rb) {
      for (int s = 0; s < sub; ++s) {
        double r = ra + (rb - ra) * s / (double)sub;
        poly.push_back(phi_cell(g, r, t));
      }
    };
    if (cell.fan) {
      poly.push_back(map.forward(0.0));
      for (int s = 1; s < sub; ++s) poly.push_back(phi_cell(g, cell.r_out * s / (double)sub, cell.th_a));
      along(cell.r_out, cell.th_a, cell.th_b);
      radial(cell.th_b, cell.r_out, 0.0);
    } else {
      radial(cell.th_a, cell.r_in, cell.r_out);
      along(cell.r_out, cell.th_a, cell.th_b);
      radial(cell.th_b, cell.r_out, cell.r_in);
      along(cell.r_in, cell.th_b, cell.th_a);
    }
    try {
      validate_simple_ccw(poly, 0.0);
      cell.simple = true;
    } catch (const Error &) {
      cell.simple = false;
    }
    mesh.cells.push_back(std::move(cell));
  };

  // central fan
  {
    const Ring &c = rings[0];
    for (std::size_t i = 0; i < c.m; ++i) {
      CellGeom g;
      g.fan = true;
      g.r_out = c.R;
      g.out.count = 2;
      for (int e = 0; e < 2; ++e) {
        g.out.th[e] = two_pi * (double)(i + e) / (double)c.m;
        g.out.rho[e] = c.rho[i + e];
        g.out.Th[e] = c.Th[i + e];
      }
      MeshCell cell;
      cell.level = n0 + 1;
      cell.fan = true;
      cell.r_in = 0;
      cell.r_out = c.R;
      cell.th_a = g.out.th[0];
      cell.th_b = g.out.th[1];
      cell.outer = {c.id[i], c.id[i + 1]};
      add_cell(std::move(cell), g);
    }
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
    const Ring &ci = rings[k], &co = rings[k + 1];
    for (std::size_t i = 0; i < ci.m; ++i) {
      CellGeom g;
      g.r_in = ci.R;
      g.r_out = co.R;
      g.in.count = 2;
      g.out.count = 3;
      for (int e = 0; e < 2; ++e) {
        g.in.th[e] = two_pi * (double)(i + e) / (double)ci.m;
        g.in.rho[e] = ci.rho[i + e];
        g.in.Th[e] = ci.Th[i + e];
      }
      for (int e = 0; e < 3; ++e) {
        g.out.th[e] = two_pi * (double)(2 * i + e) / (double)co.m;
        g.out.rho[e] = co.rho[2 * i + e];
        g.out.Th[e] = co.Th[2 * i + e];
      }
      MeshCell cell;
      cell.level = n0 + (int)k + 2;
      cell.r_in = ci.R;
      cell.r_out = co.R;
      cell.th_a = g.in.th[0];
      cell.th_b = g.in.th[1];
      cell.inner = {ci.id[i], ci.id[i + 1]};
      cell.outer = {co.id[2 * i], co.id[2 * i + 1], co.id[2 * i + 2]};
      add_cell(std::move(cell), g);
    }
  }
  return mesh;
}

double sobolev_energy(const ExtensionMesh &mesh, double p)
{
  if (!(p >= 1 && p < 2)) fail_validation("energy exponent p must lie in [1, 2)");
  long double e = 0;
  for (std::size_t k = 0; k < mesh.q_weight.size(); ++k)
    if (mesh.cells[mesh.q_cell[k]].jacobian_min > 0)
      e += (long double)mesh.q_weight[k] * std::pow((long double)mesh.q_norm[k], (long double)p);
  return (double)e;
}

EnergyPair energy_refinement(const ExtensionMesh &coarse, const ExtensionMesh &fine, double p)
{
  EnergyPair e;
  e.p = p;
  e.coarse = sobolev_energy(coarse, p);
  e.fine = sobolev_energy(fine, p);
  e.drift = std::abs(e.fine - e.coarse) / e.coarse;
  return e;
}

void write_mesh_csv(const ExtensionMesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out) fail_validation("cannot write " + path);
  out.precision(17);
  out << "disk_x,disk_y,image_x,image_y,level,cell_id,jacobian_min\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const MeshCell &cell = mesh.cells[c];
    std::vector<std::size_t> ids = cell.inner;
    ids.insert(ids.end(), cell.outer.begin(), cell.outer.end());
    for (auto id : ids) {
      const MeshVertex &v = mesh.vertices[id];
      out << v.x.real() << ',' << v.x.imag() << ',' << v.image.real() << ',' << v.image.imag() << ',' << cell.level
          << ',' << c << ',' << cell.jacobian_min << '\n';
    }
  }
}

json to_json(const ExtensionMesh &mesh)
{
  double jmin = std::numeric_limits<double>::infinity();
  for (auto &c : mesh.cells) jmin = std::min(jmin, c.jacobian_min);
  return {{"n0", mesh.n0},
          {"n_max", mesh.n_max},
          {"vertices", mesh.vertices.size()},
          {"cells", mesh.cells.size()},
          {"positive_jacobian_cells", mesh.positive_cells()},
          {"simple_cells", mesh.simple_cells()},
          {"min_jacobian", number_json(jmin)},
          {"boundary_trace_error", mesh.boundary_trace_error},
          {"boundary_midpoint_error", mesh.boundary_midpoint_error},
          {"max_vertex_displacement", mesh.max_displacement},
          {"radii", mesh.radii}};
}

} // namespace sobext
