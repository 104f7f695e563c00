#pragma once

#include "sobext/crosscut.hpp"
#include "sobext/report.hpp"

#include <string>
#include <vector>

namespace sobext {

// Whitney-type mesh of the disk. Circle C_n sits at the apex radius of the model geodesic over
// a level-n arc and carries 2^{n+1} vertices; the unit circle carries 2^{n_max+2}. Inside a cell
// the map is psi = (rho, Theta) in polar coordinates of the preimage disk, blended linearly in the
// radial direction between piecewise linear edge values; Phi = f o psi.
struct MeshVertex {
  Point x;      // disk position
  double rho = 0, theta = 0; // psi(x) in polar form, theta unwrapped
  Point image;  // Phi(x)
  int level = 0; // circle level, n_max + 1 for the unit circle
  bool boundary = false;
};

struct MeshCell {
  int level = 0;      // dyadic level of the cell's arc
  bool fan = false;   // central sector inside C_{n0}
  double r_in = 0, r_out = 0, th_a = 0, th_b = 0;
  std::vector<std::size_t> inner; // 2 vertex ids (empty for fan cells)
  std::vector<std::size_t> outer; // 3 vertex ids, a, midpoint, b
  double jacobian_min = 0;
  bool simple = true;
};

struct ExtensionMesh {
  int n0 = 0, n_max = 0;
  std::vector<double> radii; // C_{n0} .. C_{n_max}
  std::vector<MeshVertex> vertices;
  std::vector<MeshCell> cells;
  // quadrature nodes: weight r dr dtheta, Hilbert-Schmidt norm of DPhi, owning cell
  std::vector<double> q_weight, q_norm;
  std::vector<std::uint32_t> q_cell;

  std::size_t positive_cells() const;
  std::size_t simple_cells() const;
  double boundary_trace_error = 0;   // at boundary vertices
  double boundary_midpoint_error = 0; // |Phi - phi| at midpoints of boundary edges
  double max_displacement = 0;       // max |Phi(v) - v| over vertices
};

// uses crosscut levels n0..n_max of the system (n_max < 0 means all of them)
ExtensionMesh build_extension(const CrosscutSystem &sys, int n_max = -1);

// sum over non-degenerate cells of the integral of |DPhi|_HS^p
double sobolev_energy(const ExtensionMesh &mesh, double p);

struct EnergyPair {
  double p = 0;
  double coarse = 0, fine = 0, drift = 0;
};

EnergyPair energy_refinement(const ExtensionMesh &coarse, const ExtensionMesh &fine, double p);

// rows: disk_x, disk_y, image_x, image_y, level, cell_id, jacobian_min
void write_mesh_csv(const ExtensionMesh &mesh, const std::string &path);

json to_json(const ExtensionMesh &mesh);

} // namespace sobext
