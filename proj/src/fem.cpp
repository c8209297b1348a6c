#include "perthom/fem.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <sstream>

namespace perthom {

namespace {

void check_coefficient(const Mat& c, int cell) {
  if (!c.allFinite()) {
    throw std::domain_error("non-finite coefficient entry on element " + std::to_string(cell));
  }
  const auto eig = symmetric_eigenvalues(c);
  if (!(eig[0] > 0.0)) {
    std::ostringstream msg;
    msg << "coefficient not coercive on element " << cell << " (min eigenvalue " << eig[0] << ")";
    throw CoercivityError(msg.str());
  }
}

}  // namespace

StiffnessMatrix assemble_stiffness(const SimplexMesh& mesh, std::span<const Mat> coeff,
                                   std::string label) {
  if (static_cast<int>(coeff.size()) != mesh.n_cells()) {
    throw std::invalid_argument("coefficient field size does not match element count");
  }
  const int npc = mesh.nodes_per_cell();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_cells()) * npc * npc);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    check_coefficient(coeff[c], c);
    const auto& grads = mesh.basis_gradient[c];
    const double vol = mesh.cell_volume[c];
    for (int b = 0; b < npc; ++b) {
      const Vec flux = coeff[c] * grads[b];
      for (int a = 0; a < npc; ++a) {
        triplets.emplace_back(mesh.cell_dof(c, a), mesh.cell_dof(c, b), vol * flux.dot(grads[a]));
      }
    }
  }
  StiffnessMatrix K;
  K.matrix.resize(mesh.n_dofs, mesh.n_dofs);
  K.matrix.setFromTriplets(triplets.begin(), triplets.end());
  K.dof_mass = Eigen::Map<const DenseVector>(mesh.dof_mass.data(), mesh.n_dofs);
  K.label = std::move(label);
  return K;
}

DenseVector assemble_flux_load(const SimplexMesh& mesh, std::span<const Vec> flux) {
  if (static_cast<int>(flux.size()) != mesh.n_cells()) {
    throw std::invalid_argument("flux field size does not match element count");
  }
  DenseVector b = DenseVector::Zero(mesh.n_dofs);
  double contribution_mass = 0.0;
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double vol = mesh.cell_volume[c];
    for (int a = 0; a < npc; ++a) {
      const double term = vol * flux[c].dot(mesh.basis_gradient[c][a]);
      b(mesh.cell_dof(c, a)) -= term;
      contribution_mass += std::abs(term);
    }
  }
  // A divergence-free flux (e.g. a laminate loaded along its layers) cancels
  // to rounding noise; return an exact zero load instead.
  if (b.cwiseAbs().sum() <= 1e-12 * contribution_mass) b.setZero();
  return b;
}

DenseVector assemble_load(const SimplexMesh& mesh, std::span<const Mat> coeff, const Vec& p) {
  if (p.size() != mesh.dim || std::abs(p.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("direction p must be a unit vector of the mesh dimension");
  }
  if (static_cast<int>(coeff.size()) != mesh.n_cells()) {
    throw std::invalid_argument("coefficient field size does not match element count");
  }
  CellVectorField flux;
  flux.reserve(coeff.size());
  for (const Mat& c : coeff) flux.push_back(c * p);
  return assemble_flux_load(mesh, flux);
}

double volume_weighted_mean(const DenseVector& values, const DenseVector& dof_mass) {
  const double total = dof_mass.sum();
  return total > 0.0 ? values.dot(dof_mass) / total : 0.0;
}

ZeroMeanSolution solve_zero_mean(const StiffnessMatrix& K, const DenseVector& b,
                                 const SolverSettings& settings) {
  const int n = K.n_dofs();
  if (b.size() != n) throw std::invalid_argument("right-hand side size does not match matrix");

  ZeroMeanSolution out;
  out.field.values = DenseVector::Zero(n);
  const double b_abs = b.cwiseAbs().sum();
  if (b_abs == 0.0) return out;
  if (std::abs(b.sum()) > 1e-9 * b_abs) {
    throw std::invalid_argument("right-hand side is not orthogonal to constants (not mean-compatible)");
  }
  // Remove the rounding-level component along constants.
  const DenseVector rhs = b.array() - b.mean();

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(0.5 * settings.rtol);
  cg.setMaxIterations(std::max(1, settings.max_iter_factor * n));
  cg.compute(K.matrix);
  DenseVector x = cg.solve(rhs);
  out.iterations = static_cast<int>(cg.iterations());

  const double mean = volume_weighted_mean(x, K.dof_mass);
  x.array() -= mean;
  const double rhs_norm = rhs.norm();
  out.relative_residual = rhs_norm > 0.0 ? (K.matrix * x - rhs).norm() / rhs_norm : 0.0;
  if (cg.info() != Eigen::Success || !(out.relative_residual <= settings.rtol)) {
    std::ostringstream msg;
    msg << "CG did not converge";
    if (!K.label.empty()) msg << " for " << K.label;
    msg << ": relative residual " << out.relative_residual << " after " << out.iterations
        << " iterations (rtol " << settings.rtol << ")";
    throw SolverError(msg.str());
  }
  out.field.values = std::move(x);
  out.field.mean = volume_weighted_mean(out.field.values, K.dof_mass);
  return out;
}

CellVectorField element_gradients(const SimplexMesh& mesh, const DenseVector& dof_values) {
  if (dof_values.size() != mesh.n_dofs) throw std::invalid_argument("field size does not match DOF count");
  CellVectorField g(mesh.n_cells());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Vec acc = Vec::Zero(mesh.dim);
    for (int a = 0; a < npc; ++a) acc += dof_values(mesh.cell_dof(c, a)) * mesh.basis_gradient[c][a];
    g[c] = acc;
  }
  return g;
}

CellVectorField element_gradients_from_vertices(const SimplexMesh& mesh,
                                                const DenseVector& vertex_values) {
  if (vertex_values.size() != mesh.n_vertices()) {
    throw std::invalid_argument("field size does not match vertex count");
  }
  CellVectorField g(mesh.n_cells());
  const int npc = mesh.nodes_per_cell();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Vec acc = Vec::Zero(mesh.dim);
    for (int a = 0; a < npc; ++a) acc += vertex_values(mesh.cells[c][a]) * mesh.basis_gradient[c][a];
    g[c] = acc;
  }
  return g;
}

double grad_l2_norm(const SimplexMesh& mesh, std::span<const Vec> g) {
  if (static_cast<int>(g.size()) != mesh.n_cells()) {
    throw std::invalid_argument("gradient field size does not match element count");
  }
  double acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) acc += mesh.cell_volume[c] * g[c].squaredNorm();
  return std::sqrt(acc);
}

}  // namespace perthom
