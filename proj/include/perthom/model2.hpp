#pragma once

// Perturbations through a random diffeomorphism: the coefficient is
// A_per(Phi_eta^{-1}(x, omega)), and every problem is pulled back to the
// reference configuration, where it reads
//   integral det(G) G^{-T} A_per (p + G^{-1} grad w) . grad(phi) = 0,  G = grad Phi_eta.

#include "perthom/corrector.hpp"
#include "perthom/fields.hpp"
#include "perthom/model1.hpp"

#include <string>
#include <vector>

namespace perthom::model2 {

/// Outer normalization of the homogenized matrix.
///   as_printed:        det(integral_{Q_N} G)^{-1} integral_{Q_N} det(G) (...)
///   volume_normalized: det(<G>)^{-1} <det(G) (...)>, <.> the Q_N average
/// The two agree for N = 0 or d = 1; only the second reproduces the plain
/// average for Phi = Id on larger supercells.
enum class Normalization { as_printed, volume_normalized };

std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

/// Sign of the integral A_per grad(Psi) grad(w0) . grad(phi) in the
/// first-order corrector problem. `derived` (minus) comes from expanding the
/// eta-problem to first order; `as_stated` (plus) is kept for comparison.
enum class FirstOrderSign { derived, as_stated };

std::string to_string(FirstOrderSign s);
FirstOrderSign first_order_sign_from_string(const std::string& name);

/// Per-element pieces of the pulled-back problem at barycenters.
struct TransformedCoefficient {
  CellMatrixField B;          // det(G) G^{-T} A_per G^{-1}
  CellMatrixField grad_phi;   // G
  CellMatrixField inv_grad;   // G^{-1}
  std::vector<double> det;    // det(G)
  CellMatrixField a_per;
};

TransformedCoefficient transformed_coefficient(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                               const Realization& r, double eta, const SimplexMesh& mesh);

/// Lower bound lambda_min(A_per) * nu / 2 on the eigenvalues of B_eta, valid for
/// |eta| <= eta0 of the family.
double transformed_coercivity_floor(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per);

/// Corrector of the pulled-back problem. Rejects |eta| > eta_max; throws
/// CoercivityError if some B_eta loses definiteness.
CorrectorSolution solve_corrector_eta_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                             const Realization& r, double eta, const SuperMesh& super, const Vec& p,
                                             const SolverSettings& settings = {});

/// Throws std::domain_error if the normalization matrix is singular.
Mat homogenized_eta_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per, const Realization& r,
                           double eta, const SuperMesh& super, const std::vector<CorrectorSolution>& w_eta,
                           Normalization normalization = Normalization::volume_normalized);

/// First-order corrector:
///   integral A_per grad w1 . grad(phi) -+ integral A_per grad(Psi) grad w0 . grad(phi)
///     + integral (div(Psi) I - grad(Psi)^T) A_per (p + grad w0) . grad(phi) = 0.
CorrectorSolution solve_corrector_1_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                           const Realization& r, const SuperMesh& super,
                                           const CorrectorSolution& w0_unit, const Vec& p,
                                           FirstOrderSign sign = FirstOrderSign::derived,
                                           const SolverSettings& settings = {});

/// [A1]_ij = -[A_per^h]_ij <div Psi> + <div(Psi) (e_i + grad w0_i)^T A_per e_j>
///           + <(grad w1_i - grad(Psi) grad w0_i)^T A_per e_j>.
Mat homogenized_first_order_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                   const Realization& r, const SuperMesh& super,
                                   const std::vector<CorrectorSolution>& w0_unit,
                                   const std::vector<CorrectorSolution>& w1, const Mat& A_per_star);

struct Lemma31Row {
  double eta = 0.0;
  double gamma_sup = 0.0;   // sup |Gamma_eta|_2 over samples
  double sigma_sup = 0.0;   // sup |sigma_eta|
  double gamma_ratio = 0.0; // gamma_sup / eta^2
  double sigma_ratio = 0.0;
  double eig_min = 0.0;     // of G^{-T} G^{-1}
  double eig_max = 0.0;
  double det_min = 0.0;
  bool eigen_window = false;  // eigenvalues within [1/2, 3/2]
};

struct Lemma31Record {
  std::vector<Lemma31Row> rows;
  double band_factor = 4.0;
  double gamma_band = 1.0;  // max/min of gamma_ratio over rows (1 when every sup is at rounding level)
  double sigma_band = 1.0;
  bool eigen_pass = false;
  bool gamma_pass = false;
  bool sigma_pass = false;
  bool pass() const { return eigen_pass && gamma_pass && sigma_pass; }
};

/// Samples `sample_points` points of [-5/2, 5/2]^d per eta and reports the
/// expansion remainders and the eigenvalue window. Never throws on failure.
Lemma31Record lemma31_validate(const Model2Diffeomorphism& diffeo, const Realization& r,
                               const std::vector<double>& eta_grid, int sample_points,
                               std::uint64_t sample_seed = 0, double band_factor = 4.0);

HomogenizedReport residual_report_diffeo(const SuperMesh& super, double eta, std::uint64_t seed,
                                         const Mat& A_eta_star, const Mat& A_per_star, const Mat& A1_star,
                                         const std::vector<CorrectorSolution>& w_eta,
                                         const std::vector<CorrectorSolution>& w0_unit,
                                         const std::vector<CorrectorSolution>& w1);

struct Options {
  Normalization normalization = Normalization::volume_normalized;
  FirstOrderSign sign = FirstOrderSign::derived;
};

/// Same contract as model1::realization_reports.
std::vector<HomogenizedReport> realization_reports(const Model2Diffeomorphism& diffeo,
                                                   const PeriodicProfile& a_per, const Realization& r,
                                                   std::uint64_t seed, const std::vector<double>& etas,
                                                   const SuperMesh& super, const model1::PeriodicReference& ref,
                                                   const Options& options = {}, const SolverSettings& settings = {});

}  // namespace perthom::model2
