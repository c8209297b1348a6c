#include "perthom/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

using namespace perthom;

namespace {

double total_volume(const SimplexMesh& m) {
  return std::accumulate(m.cell_volume.begin(), m.cell_volume.end(), 0.0);
}

}  // namespace

TEST(Mesh, UnitCellCountsAndVolume2D) {
  for (int s : {1, 2, 4, 7}) {
    const UnitMesh u = build_unit_mesh(2, s);
    EXPECT_EQ(u.mesh.n_cells(), 2 * s * s);
    EXPECT_EQ(u.mesh.n_vertices(), (s + 1) * (s + 1));
    EXPECT_EQ(u.mesh.n_dofs, s * s);
    EXPECT_NEAR(total_volume(u.mesh), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(u.h(), 1.0 / s);
  }
}

TEST(Mesh, UnitCellCountsAndVolume1D) {
  const UnitMesh u = build_unit_mesh(1, 5);
  EXPECT_EQ(u.mesh.n_cells(), 5);
  EXPECT_EQ(u.mesh.n_dofs, 5);
  EXPECT_NEAR(total_volume(u.mesh), 1.0, 1e-15);
}

TEST(Mesh, VerticesSpanTheCenteredCell) {
  const UnitMesh u = build_unit_mesh(2, 4);
  for (const Vec& v : u.mesh.vertices) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_GE(v(a), -0.5 - 1e-15);
      EXPECT_LE(v(a), 0.5 + 1e-15);
    }
  }
}

TEST(Mesh, PeriodicPartnersShareDofs) {
  const UnitMesh u = build_unit_mesh(2, 3);
  ASSERT_FALSE(u.periodic_pairs.empty());
  for (const auto& [a, b] : u.periodic_pairs) {
    EXPECT_EQ(u.mesh.vertex_dof[a], u.mesh.vertex_dof[b]);
    const Vec d = u.mesh.vertices[b] - u.mesh.vertices[a];
    // The partner differs by a lattice vector.
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(d(k), std::round(d(k)), 1e-14);
  }
}

TEST(Mesh, DofMassSumsToVolume) {
  const SuperMesh s = replicate(build_unit_mesh(2, 4), 1);
  const double sum = std::accumulate(s.mesh.dof_mass.begin(), s.mesh.dof_mass.end(), 0.0);
  EXPECT_NEAR(sum, 9.0, 1e-12);
}

TEST(Mesh, BasisGradientsSumToZero) {
  const UnitMesh u = build_unit_mesh(2, 3);
  for (int c = 0; c < u.mesh.n_cells(); ++c) {
    Vec sum = Vec::Zero(2);
    for (int a = 0; a < 3; ++a) sum += u.mesh.basis_gradient[c][a];
    EXPECT_LT(sum.norm(), 1e-12);
  }
}

TEST(Mesh, SupercellReplicatesBaseCells) {
  const UnitMesh u = build_unit_mesh(2, 4);
  for (int N : {0, 1, 2}) {
    const SuperMesh s = replicate(u, N);
    const int cells = (2 * N + 1) * (2 * N + 1);
    EXPECT_EQ(s.mesh.n_cells(), cells * u.mesh.n_cells());
    EXPECT_EQ(s.mesh.n_dofs, cells * u.mesh.n_dofs);
    EXPECT_NEAR(total_volume(s.mesh), cells, 1e-10);
    EXPECT_DOUBLE_EQ(s.volume(), cells);
    ASSERT_EQ(static_cast<int>(s.cell_index.size()), s.mesh.n_cells());
    for (int c = 0; c < s.mesh.n_cells(); ++c) {
      const LatticeCell& lc = s.cell_index[c];
      Vec shift(2);
      shift << lc.k[0], lc.k[1];
      const Vec expected = u.mesh.barycenter[lc.base_cell] + shift;
      EXPECT_LT((s.mesh.barycenter[c] - expected).norm(), 1e-12);
      EXPECT_LE(std::abs(lc.k[0]), N);
      EXPECT_LE(std::abs(lc.k[1]), N);
    }
  }
}

TEST(Mesh, LatticeIndexRoundTrip) {
  for (int N : {0, 1, 3}) {
    const int count = lattice_cell_count(2, N);
    EXPECT_EQ(count, (2 * N + 1) * (2 * N + 1));
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < count; ++i) {
      const LatticeVector k = lattice_vector_at(i, 2, N);
      EXPECT_EQ(lattice_linear_index(k, 2, N), i);
      seen.insert({k[0], k[1]});
    }
    EXPECT_EQ(static_cast<int>(seen.size()), count);
  }
}

TEST(Mesh, RejectsBadArguments) {
  EXPECT_THROW(build_unit_mesh(3, 4), std::invalid_argument);
  EXPECT_THROW(build_unit_mesh(2, 0), std::invalid_argument);
  EXPECT_THROW(replicate(build_unit_mesh(2, 2), -1), std::invalid_argument);
}
