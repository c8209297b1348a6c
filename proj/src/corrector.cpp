#include "perthom/corrector.hpp"

#include <cmath>
#include <stdexcept>

namespace perthom {

std::string to_string(CorrectorLevel level) {
  switch (level) {
    case CorrectorLevel::eta: return "eta";
    case CorrectorLevel::zero: return "zero";
    case CorrectorLevel::one: return "one";
  }
  return "unknown";
}

CorrectorSolution solve_flux_problem(const SimplexMesh& mesh, const CellMatrixField& stiffness_coeff,
                                     const CellVectorField& flux, const Vec& direction, CorrectorLevel level,
                                     double eta, const SolverSettings& settings, const std::string& label) {
  const StiffnessMatrix K = assemble_stiffness(mesh, stiffness_coeff, label);
  const DenseVector b = assemble_flux_load(mesh, flux);
  ZeroMeanSolution sol = solve_zero_mean(K, b, settings);
  CorrectorSolution out;
  out.direction = direction;
  out.level = level;
  out.eta = eta;
  out.gradients = element_gradients(mesh, sol.field.values);
  out.field = std::move(sol.field);
  out.relative_residual = sol.relative_residual;
  out.iterations = sol.iterations;
  return out;
}

CellVectorField replicate_gradients(const SuperMesh& super, const CellVectorField& unit_gradients) {
  if (static_cast<int>(unit_gradients.size()) != super.base.mesh.n_cells()) {
    throw std::invalid_argument("unit gradient field does not match the base mesh");
  }
  CellVectorField out;
  out.reserve(super.cell_index.size());
  for (const LatticeCell& lc : super.cell_index) out.push_back(unit_gradients[lc.base_cell]);
  return out;
}

HomogenizedReport make_residual_report(int model, const SuperMesh& super, double eta, std::uint64_t seed,
                                       const Mat& A_eta_star, const Mat& A_per_star, const Mat& A1_star,
                                       const std::vector<CorrectorSolution>& w_eta,
                                       const std::vector<CorrectorSolution>& w0_unit,
                                       const std::vector<CorrectorSolution>& w1) {
  if (eta == 0.0) throw std::invalid_argument("residual report needs eta != 0 (eta^-2 normalization)");
  const int dim = super.dim();
  if (static_cast<int>(w_eta.size()) != dim || static_cast<int>(w0_unit.size()) != dim ||
      static_cast<int>(w1.size()) != dim) {
    throw std::invalid_argument("residual report needs one corrector per direction");
  }
  HomogenizedReport rep;
  rep.model = model;
  rep.A_eta_star = A_eta_star;
  rep.A_per_star = A_per_star;
  rep.A1_star = A1_star;
  rep.residual_matrix = (A_eta_star - A_per_star - eta * A1_star) / (eta * eta);
  rep.residual_max = max_norm(rep.residual_matrix);
  rep.residual_frobenius = rep.residual_matrix.norm();
  rep.eta = eta;
  rep.N = super.N;
  rep.subdivisions = super.base.subdivisions;
  rep.seed = seed;

  const double sqrt_vol = std::sqrt(super.volume());
  const int nc = super.mesh.n_cells();
  for (int dir = 0; dir < dim; ++dir) {
    const CellVectorField g0 = replicate_gradients(super, w0_unit[dir].gradients);
    CellVectorField v(nc);
    CellVectorField z(nc);
    for (int c = 0; c < nc; ++c) {
      v[c] = w_eta[dir].gradients[c] - g0[c];
      z[c] = v[c] - eta * w1[dir].gradients[c];
    }
    rep.v_norm = std::max(rep.v_norm, grad_l2_norm(super.mesh, v) / (std::abs(eta) * sqrt_vol));
    rep.z_norm = std::max(rep.z_norm, grad_l2_norm(super.mesh, z) / (eta * eta * sqrt_vol));
  }
  return rep;
}

}  // namespace perthom
