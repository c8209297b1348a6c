#pragma once

// Types shared by both perturbation models: a solved corrector for one
// direction, and the per-realization report of homogenized matrices and
// second-order diagnostics.

#include "perthom/fem.hpp"
#include "perthom/mesh.hpp"
#include "perthom/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace perthom {

enum class CorrectorLevel { eta, zero, one };

std::string to_string(CorrectorLevel level);

struct CorrectorSolution {
  Vec direction;
  CorrectorLevel level = CorrectorLevel::eta;
  double eta = 0.0;
  DofField field;
  CellVectorField gradients;
  double relative_residual = 0.0;
  int iterations = 0;
};

/// Solves integral C (grad w) . grad(phi) = -integral flux . grad(phi) on `mesh`
/// and packages the zero-mean result with its element gradients.
CorrectorSolution solve_flux_problem(const SimplexMesh& mesh, const CellMatrixField& stiffness_coeff,
                                     const CellVectorField& flux, const Vec& direction, CorrectorLevel level,
                                     double eta, const SolverSettings& settings, const std::string& label);

/// Per-element gradients of a unit-cell field copied onto every lattice cell
/// of the supercell.
CellVectorField replicate_gradients(const SuperMesh& super, const CellVectorField& unit_gradients);

struct HomogenizedReport {
  int model = 1;
  Mat A_eta_star;
  Mat A_per_star;
  Mat A1_star;
  /// eta^{-2} (A_eta_star - A_per_star - eta A1_star)
  Mat residual_matrix;
  double residual_max = 0.0;        // largest absolute entry
  double residual_frobenius = 0.0;
  /// eta^{-2} |grad w^eta - grad w^0 - eta grad w^1|_{L2} / sqrt|Q_N|, max over directions.
  double z_norm = 0.0;
  /// eta^{-1} |grad w^eta - grad w^0|_{L2} / sqrt|Q_N|, max over directions.
  double v_norm = 0.0;
  double eta = 0.0;
  int N = 0;
  int subdivisions = 0;
  std::uint64_t seed = 0;
};

/// Fills a report from matrices and per-direction correctors: w_eta and w1 on
/// the supercell, w0 on the unit cell. Rejects eta = 0.
HomogenizedReport make_residual_report(int model, const SuperMesh& super, double eta, std::uint64_t seed,
                                       const Mat& A_eta_star, const Mat& A_per_star, const Mat& A1_star,
                                       const std::vector<CorrectorSolution>& w_eta,
                                       const std::vector<CorrectorSolution>& w0_unit,
                                       const std::vector<CorrectorSolution>& w1);

}  // namespace perthom
