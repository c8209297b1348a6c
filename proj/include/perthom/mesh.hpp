#pragma once

// Structured periodic P1 triangulations of the unit cell Q = [-1/2, 1/2]^d and
// their replication over the supercell Q_N = [-N-1/2, N+1/2]^d.

#include "perthom/types.hpp"

#include <utility>
#include <vector>

namespace perthom {

/// A conforming simplicial mesh of a periodic cube with vertex -> DOF
/// identification. Immutable once built.
struct SimplexMesh {
  int dim = 0;
  int cells_per_axis = 0;  // uniform subdivisions of the whole domain per axis
  double h = 0.0;
  double lower = 0.0;      // domain is [lower, lower + cells_per_axis * h]^d

  std::vector<Vec> vertices;
  std::vector<std::array<int, kMaxDim + 1>> cells;
  std::vector<int> vertex_dof;
  int n_dofs = 0;

  std::vector<double> cell_volume;
  std::vector<Vec> barycenter;
  // Gradients of the local barycentric (hat) functions on each cell.
  std::vector<std::array<Vec, kMaxDim + 1>> basis_gradient;
  // Integral of each global basis function.
  std::vector<double> dof_mass;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int nodes_per_cell() const { return dim + 1; }
  int cell_dof(int cell, int local) const { return vertex_dof[cells[cell][local]]; }
  double volume() const;
};

struct UnitMesh {
  SimplexMesh mesh;
  int subdivisions = 0;
  // (boundary vertex, partner on the opposite face); corners pair with the
  // diagonally opposite corner.
  std::vector<std::pair<int, int>> periodic_pairs;

  int dim() const { return mesh.dim; }
  double h() const { return mesh.h; }
};

/// Lattice translate k and base-cell index of a supercell simplex.
struct LatticeCell {
  LatticeVector k{};
  int base_cell = 0;
};

struct SuperMesh {
  UnitMesh base;
  int N = 0;
  SimplexMesh mesh;
  std::vector<LatticeCell> cell_index;  // one entry per simplex of `mesh`

  int dim() const { return mesh.dim; }
  /// |Q_N| = (2N+1)^d.
  double volume() const;
};

UnitMesh build_unit_mesh(int dim, int subdivisions);

SuperMesh replicate(const UnitMesh& base, int N);

/// Number of lattice cells (2N+1)^d and the linear index of k in lattice order
/// (first component fastest).
int lattice_cell_count(int dim, int N);
int lattice_linear_index(const LatticeVector& k, int dim, int N);
LatticeVector lattice_vector_at(int index, int dim, int N);

}  // namespace perthom
