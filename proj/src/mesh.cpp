#include "perthom/mesh.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace perthom {

namespace {

// Vertex grid index (i, j) on a (M+1)^d grid.
int grid_vertex(int i, int j, int M) { return i + (M + 1) * j; }

// Local squares of the unit cell split into two triangles along the
// (0,0)-(1,1) diagonal: T0 = (v00, v10, v11), T1 = (v00, v11, v01).
constexpr std::array<std::array<std::array<int, 2>, 3>, 2> kTriangleCorners{{
    {{{0, 0}, {1, 0}, {1, 1}}},
    {{{0, 0}, {1, 1}, {0, 1}}},
}};

void compute_geometry(SimplexMesh& m) {
  const int nc = m.n_cells();
  m.cell_volume.resize(nc);
  m.barycenter.resize(nc);
  m.basis_gradient.resize(nc);
  m.dof_mass.assign(m.n_dofs, 0.0);
  const int npc = m.nodes_per_cell();
  for (int c = 0; c < nc; ++c) {
    const auto& cell = m.cells[c];
    Vec bary = Vec::Zero(m.dim);
    for (int a = 0; a < npc; ++a) bary += m.vertices[cell[a]];
    m.barycenter[c] = bary / npc;

    if (m.dim == 1) {
      const double len = m.vertices[cell[1]](0) - m.vertices[cell[0]](0);
      m.cell_volume[c] = std::abs(len);
      m.basis_gradient[c][0] = Vec::Constant(1, -1.0 / len);
      m.basis_gradient[c][1] = Vec::Constant(1, 1.0 / len);
    } else {
      Mat jac(2, 2);
      jac.col(0) = m.vertices[cell[1]] - m.vertices[cell[0]];
      jac.col(1) = m.vertices[cell[2]] - m.vertices[cell[0]];
      const double det = jac.determinant();
      m.cell_volume[c] = 0.5 * std::abs(det);
      const Mat inv_t = jac.inverse().transpose();
      const Vec g1 = inv_t.col(0);
      const Vec g2 = inv_t.col(1);
      m.basis_gradient[c][0] = -(g1 + g2);
      m.basis_gradient[c][1] = g1;
      m.basis_gradient[c][2] = g2;
    }
    for (int a = 0; a < npc; ++a) m.dof_mass[m.cell_dof(c, a)] += m.cell_volume[c] / npc;
  }
}

// Cells of Q_N ordered lattice-major: all base cells of lattice cell 0, then
// lattice cell 1, ... so cell e maps to (k, e mod n_base).
SimplexMesh build_block(int dim, int s, int N, std::vector<LatticeCell>& index) {
  SimplexMesh m;
  m.dim = dim;
  const int width = 2 * N + 1;
  const int M = width * s;
  m.cells_per_axis = M;
  m.h = 1.0 / s;
  m.lower = -N - 0.5;

  if (dim == 1) {
    m.vertices.reserve(M + 1);
    for (int i = 0; i <= M; ++i) m.vertices.push_back(Vec::Constant(1, m.lower + i * m.h));
    m.vertex_dof.resize(M + 1);
    for (int i = 0; i <= M; ++i) m.vertex_dof[i] = i % M;
    m.n_dofs = M;
  } else {
    m.vertices.reserve(static_cast<std::size_t>(M + 1) * (M + 1));
    m.vertex_dof.reserve(static_cast<std::size_t>(M + 1) * (M + 1));
    for (int j = 0; j <= M; ++j) {
      for (int i = 0; i <= M; ++i) {
        Vec x(2);
        x << m.lower + i * m.h, m.lower + j * m.h;
        m.vertices.push_back(x);
        m.vertex_dof.push_back((i % M) + M * (j % M));
      }
    }
    m.n_dofs = M * M;
  }

  const int n_lattice = lattice_cell_count(dim, N);
  const int n_base = dim == 1 ? s : 2 * s * s;
  m.cells.reserve(static_cast<std::size_t>(n_lattice) * n_base);
  index.clear();
  index.reserve(m.cells.capacity());
  for (int li = 0; li < n_lattice; ++li) {
    const LatticeVector k = lattice_vector_at(li, dim, N);
    const int off_i = (k[0] + N) * s;
    const int off_j = dim == 2 ? (k[1] + N) * s : 0;
    if (dim == 1) {
      for (int a = 0; a < s; ++a) {
        m.cells.push_back({off_i + a, off_i + a + 1, 0});
        index.push_back({k, a});
      }
      continue;
    }
    for (int b = 0; b < s; ++b) {
      for (int a = 0; a < s; ++a) {
        for (int t = 0; t < 2; ++t) {
          std::array<int, kMaxDim + 1> cell{};
          for (int v = 0; v < 3; ++v) {
            const auto& corner = kTriangleCorners[t][v];
            cell[v] = grid_vertex(off_i + a + corner[0], off_j + b + corner[1], M);
          }
          m.cells.push_back(cell);
          index.push_back({k, 2 * (a + s * b) + t});
        }
      }
    }
  }
  compute_geometry(m);
  return m;
}

// Pairs each boundary vertex with the vertex obtained by moving every
// boundary coordinate to the opposite face. Lookup by quantized coordinates,
// acceptance within 1e-12 * h.
std::vector<std::pair<int, int>> periodic_partners(const SimplexMesh& m) {
  const double tol = 1e-12 * m.h;
  const double lo = m.lower;
  const double hi = m.lower + m.cells_per_axis * m.h;
  auto key = [&](const Vec& x) {
    long long code = 0;
    for (int a = 0; a < m.dim; ++a) {
      code = code * (m.cells_per_axis + 1) + std::llround((x(a) - lo) / m.h);
    }
    return code;
  };
  std::unordered_map<long long, int> by_coord;
  for (int v = 0; v < m.n_vertices(); ++v) by_coord.emplace(key(m.vertices[v]), v);

  std::vector<std::pair<int, int>> pairs;
  for (int v = 0; v < m.n_vertices(); ++v) {
    Vec y = m.vertices[v];
    bool on_boundary = false;
    for (int a = 0; a < m.dim; ++a) {
      if (std::abs(y(a) - lo) <= tol) {
        y(a) = hi;
        on_boundary = true;
      } else if (std::abs(y(a) - hi) <= tol) {
        y(a) = lo;
        on_boundary = true;
      }
    }
    if (!on_boundary) continue;
    const auto it = by_coord.find(key(y));
    if (it == by_coord.end() || (m.vertices[it->second] - y).cwiseAbs().maxCoeff() > tol) {
      throw std::logic_error("periodic partner not found for vertex " + std::to_string(v));
    }
    pairs.emplace_back(v, it->second);
  }
  return pairs;
}

}  // namespace

double SimplexMesh::volume() const {
  return std::accumulate(cell_volume.begin(), cell_volume.end(), 0.0);
}

double SuperMesh::volume() const { return std::pow(2.0 * N + 1.0, dim()); }

int lattice_cell_count(int dim, int N) {
  const int width = 2 * N + 1;
  return dim == 1 ? width : width * width;
}

int lattice_linear_index(const LatticeVector& k, int dim, int N) {
  const int width = 2 * N + 1;
  return dim == 1 ? k[0] + N : (k[0] + N) + width * (k[1] + N);
}

LatticeVector lattice_vector_at(int index, int dim, int N) {
  const int width = 2 * N + 1;
  if (dim == 1) return {index - N, 0};
  return {index % width - N, index / width - N};
}

UnitMesh build_unit_mesh(int dim, int subdivisions) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("mesh dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (subdivisions < 1) {
    throw std::invalid_argument("subdivisions must be >= 1, got " + std::to_string(subdivisions));
  }
  UnitMesh unit;
  std::vector<LatticeCell> index;
  unit.mesh = build_block(dim, subdivisions, 0, index);
  unit.subdivisions = subdivisions;
  unit.periodic_pairs = periodic_partners(unit.mesh);
  return unit;
}

SuperMesh replicate(const UnitMesh& base, int N) {
  if (N < 0) throw std::invalid_argument("truncation radius N must be >= 0, got " + std::to_string(N));
  SuperMesh super;
  super.base = base;
  super.N = N;
  super.mesh = build_block(base.dim(), base.subdivisions, N, super.cell_index);
  return super;
}

}  // namespace perthom
