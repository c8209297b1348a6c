#pragma once

// Additive perturbations A_eta = A_per + eta A_1 + R_eta: correctors at the
// three expansion levels, the homogenized matrices built from them, and the
// second-order residual diagnostics.

#include "perthom/corrector.hpp"
#include "perthom/fields.hpp"

#include <vector>

namespace perthom::model1 {

/// Coefficient fields sampled at element barycenters.
CellMatrixField a_per_field(const PeriodicProfile& a_per, const SimplexMesh& mesh);
CellMatrixField a1_field(const Model1Coefficients& coeffs, const Realization& r, const SimplexMesh& mesh);
CellMatrixField a_eta_field(const Model1Coefficients& coeffs, const Realization& r, double eta,
                            const SimplexMesh& mesh);

/// Corrector of A_eta(., omega) on the supercell. Rejects |eta| > eta_max.
CorrectorSolution solve_corrector_eta(const Model1Coefficients& coeffs, const Realization& r, double eta,
                                      const SuperMesh& super, const Vec& p, const SolverSettings& settings = {});

/// Periodic corrector of A_per on the unit cell; N-independent.
CorrectorSolution solve_corrector_0(const PeriodicProfile& a_per, const UnitMesh& unit, const Vec& p,
                                    const SolverSettings& settings = {});
CorrectorSolution solve_corrector_0(const Model1Coefficients& coeffs, const UnitMesh& unit, const Vec& p,
                                    const SolverSettings& settings = {});

/// First-order corrector: stiffness A_per, load A_1(., omega)(p + grad w0).
CorrectorSolution solve_corrector_1(const Model1Coefficients& coeffs, const Realization& r, const SuperMesh& super,
                                    const CorrectorSolution& w0_unit, const Vec& p,
                                    const SolverSettings& settings = {});

/// [A]_ij = |Q_N|^{-1} integral e_i^T A_eta (e_j + grad w_j). `w_eta` holds one
/// corrector per canonical direction.
Mat homogenized_eta(const Model1Coefficients& coeffs, const Realization& r, double eta, const SuperMesh& super,
                    const std::vector<CorrectorSolution>& w_eta);

/// [A]_ij = integral_Q e_i^T A_per (e_j + grad w0_j).
Mat homogenized_per(const PeriodicProfile& a_per, const UnitMesh& unit, const std::vector<CorrectorSolution>& w0);

/// [A1]_ij = |Q_N|^{-1} integral e_i^T A_per grad w1_j + e_i^T A_1 (e_j + grad w0_j).
Mat homogenized_first_order(const Model1Coefficients& coeffs, const Realization& r, const SuperMesh& super,
                            const std::vector<CorrectorSolution>& w0_unit,
                            const std::vector<CorrectorSolution>& w1);

/// Deterministic limit integral_Q (e_i + grad w0_i)^T E(A_1) (e_j + grad w0_j),
/// with E(A_1) taken analytically from the family.
Mat lemma21_limit(const Model1Coefficients& coeffs, const UnitMesh& unit,
                  const std::vector<CorrectorSolution>& w0);

HomogenizedReport residual_report(const SuperMesh& super, double eta, std::uint64_t seed, const Mat& A_eta_star,
                                  const Mat& A_per_star, const Mat& A1_star,
                                  const std::vector<CorrectorSolution>& w_eta,
                                  const std::vector<CorrectorSolution>& w0_unit,
                                  const std::vector<CorrectorSolution>& w1);

/// Periodic correctors for every canonical direction and A_per^h.
struct PeriodicReference {
  std::vector<CorrectorSolution> w0;
  Mat A_per_star;
};

PeriodicReference periodic_reference(const PeriodicProfile& a_per, const UnitMesh& unit,
                                     const SolverSettings& settings = {});

/// All-direction solves for one realization: w1 once, then w_eta and the
/// report for every eta in `etas` (eta = 0 entries are skipped in the output).
std::vector<HomogenizedReport> realization_reports(const Model1Coefficients& coeffs, const Realization& r,
                                                   std::uint64_t seed, const std::vector<double>& etas,
                                                   const SuperMesh& super, const PeriodicReference& ref,
                                                   const SolverSettings& settings = {});

}  // namespace perthom::model1
