#pragma once

// Zero-mean periodic P1 variational problems: assembly with per-element matrix
// coefficients, right-hand sides of flux form, CG solve on the quotient by
// constants, and element-wise gradients.

#include "perthom/mesh.hpp"
#include "perthom/types.hpp"

#include <Eigen/Sparse>

#include <span>
#include <string>
#include <vector>

namespace perthom {

using DenseVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Per-element fields (one value per simplex, sampled at barycenters).
using CellMatrixField = std::vector<Mat>;
using CellVectorField = std::vector<Vec>;

struct SolverSettings {
  double rtol = 1e-10;
  int max_iter_factor = 50;  // max iterations = factor * DOF count
};

struct StiffnessMatrix {
  SparseMatrix matrix;
  DenseVector dof_mass;  // integral of each basis function, for mean projection
  std::string label;

  int n_dofs() const { return static_cast<int>(matrix.rows()); }
};

struct DofField {
  DenseVector values;
  double mean = 0.0;  // volume-weighted
};

struct ZeroMeanSolution {
  DofField field;
  double relative_residual = 0.0;
  int iterations = 0;
};

/// K[a][b] = sum_T |T| grad(phi_a)^T C_T grad(phi_b), the matrix of the form
/// integral C grad(u) . grad(phi). Throws CoercivityError when the symmetric part
/// of some C_T has an eigenvalue <= 0 and std::domain_error on non-finite
/// entries.
StiffnessMatrix assemble_stiffness(const SimplexMesh& mesh, std::span<const Mat> coeff,
                                   std::string label = {});

/// b[a] = -sum_T |T| (C_T p) . grad(phi_a). Requires |p| = 1.
DenseVector assemble_load(const SimplexMesh& mesh, std::span<const Mat> coeff, const Vec& p);

/// b[a] = -sum_T |T| flux_T . grad(phi_a) for an arbitrary per-element flux.
/// A load that cancels to rounding level against its element terms is returned as zero.
DenseVector assemble_flux_load(const SimplexMesh& mesh, std::span<const Vec> flux);

/// Solves K x = b in the zero-mean subspace. b must be orthogonal to constants
/// within 1e-9 relative. Throws SolverError on non-convergence.
ZeroMeanSolution solve_zero_mean(const StiffnessMatrix& K, const DenseVector& b,
                                 const SolverSettings& settings = {});

/// Piecewise-constant gradient of the P1 field on each simplex.
CellVectorField element_gradients(const SimplexMesh& mesh, const DenseVector& dof_values);

/// Same, from per-vertex values (no periodic identification). Debug helper.
CellVectorField element_gradients_from_vertices(const SimplexMesh& mesh,
                                                const DenseVector& vertex_values);

/// sqrt(sum_T |T| |g_T|^2).
double grad_l2_norm(const SimplexMesh& mesh, std::span<const Vec> g);

double volume_weighted_mean(const DenseVector& values, const DenseVector& dof_mass);

template <class F>
CellMatrixField sample_at_barycenters(const SimplexMesh& mesh, F&& f) {
  CellMatrixField out;
  out.reserve(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) out.push_back(f(mesh.barycenter[c]));
  return out;
}

}  // namespace perthom
