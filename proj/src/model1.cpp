#include "perthom/model1.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace perthom::model1 {

namespace {

void check_direction_count(const std::vector<CorrectorSolution>& w, int dim, const char* what) {
  if (static_cast<int>(w.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected one corrector per direction");
  }
}

std::string level_label(const char* level, double eta) {
  return std::string("model-1 corrector ") + level + " (eta=" + std::to_string(eta) + ")";
}

void check_unit(const Vec& p) {
  if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("direction p must be a unit vector");
}

}  // namespace

CellMatrixField a_per_field(const PeriodicProfile& a_per, const SimplexMesh& mesh) {
  return sample_at_barycenters(mesh, [&](const Vec& x) { return a_per(x); });
}

CellMatrixField a1_field(const Model1Coefficients& coeffs, const Realization& r, const SimplexMesh& mesh) {
  return sample_at_barycenters(mesh, [&](const Vec& x) { return coeffs.a1(x, r); });
}

CellMatrixField a_eta_field(const Model1Coefficients& coeffs, const Realization& r, double eta,
                            const SimplexMesh& mesh) {
  return sample_at_barycenters(mesh, [&](const Vec& x) { return coeffs.a_eta(x, r, eta); });
}

CorrectorSolution solve_corrector_eta(const Model1Coefficients& coeffs, const Realization& r, double eta,
                                      const SuperMesh& super, const Vec& p, const SolverSettings& settings) {
  coeffs.check_eta(eta);
  check_unit(p);
  const CellMatrixField a = a_eta_field(coeffs, r, eta, super.mesh);
  CellVectorField flux;
  flux.reserve(a.size());
  for (const Mat& c : a) flux.push_back(c * p);
  return solve_flux_problem(super.mesh, a, flux, p, CorrectorLevel::eta, eta, settings,
                            level_label("eta", eta));
}

CorrectorSolution solve_corrector_0(const PeriodicProfile& a_per, const UnitMesh& unit, const Vec& p,
                                    const SolverSettings& settings) {
  check_unit(p);
  const CellMatrixField a = a_per_field(a_per, unit.mesh);
  CellVectorField flux;
  flux.reserve(a.size());
  for (const Mat& c : a) flux.push_back(c * p);
  return solve_flux_problem(unit.mesh, a, flux, p, CorrectorLevel::zero, 0.0, settings,
                            level_label("zero", 0.0));
}

CorrectorSolution solve_corrector_0(const Model1Coefficients& coeffs, const UnitMesh& unit, const Vec& p,
                                    const SolverSettings& settings) {
  return solve_corrector_0(coeffs.a_per_profile(), unit, p, settings);
}

CorrectorSolution solve_corrector_1(const Model1Coefficients& coeffs, const Realization& r, const SuperMesh& super,
                                    const CorrectorSolution& w0_unit, const Vec& p,
                                    const SolverSettings& settings) {
  const CellMatrixField a_per = a_per_field(coeffs.a_per_profile(), super.mesh);
  const CellMatrixField a1 = a1_field(coeffs, r, super.mesh);
  const CellVectorField g0 = replicate_gradients(super, w0_unit.gradients);
  CellVectorField flux(a1.size());
  for (std::size_t c = 0; c < a1.size(); ++c) flux[c] = a1[c] * (p + g0[c]);
  return solve_flux_problem(super.mesh, a_per, flux, p, CorrectorLevel::one, 0.0, settings,
                            level_label("one", 0.0));
}

Mat homogenized_eta(const Model1Coefficients& coeffs, const Realization& r, double eta, const SuperMesh& super,
                    const std::vector<CorrectorSolution>& w_eta) {
  const int dim = super.dim();
  check_direction_count(w_eta, dim, "homogenized_eta");
  const CellMatrixField a = a_eta_field(coeffs, r, eta, super.mesh);
  Mat out = Mat::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const Vec e = unit_vector(dim, j);
    for (int c = 0; c < super.mesh.n_cells(); ++c) {
      out.col(j) += super.mesh.cell_volume[c] * (a[c] * (e + w_eta[j].gradients[c]));
    }
  }
  return out / super.volume();
}

Mat homogenized_per(const PeriodicProfile& a_per, const UnitMesh& unit, const std::vector<CorrectorSolution>& w0) {
  const int dim = unit.dim();
  check_direction_count(w0, dim, "homogenized_per");
  const CellMatrixField a = a_per_field(a_per, unit.mesh);
  Mat out = Mat::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const Vec e = unit_vector(dim, j);
    for (int c = 0; c < unit.mesh.n_cells(); ++c) {
      out.col(j) += unit.mesh.cell_volume[c] * (a[c] * (e + w0[j].gradients[c]));
    }
  }
  return out;
}

Mat homogenized_first_order(const Model1Coefficients& coeffs, const Realization& r, const SuperMesh& super,
                            const std::vector<CorrectorSolution>& w0_unit,
                            const std::vector<CorrectorSolution>& w1) {
  const int dim = super.dim();
  check_direction_count(w0_unit, dim, "homogenized_first_order");
  check_direction_count(w1, dim, "homogenized_first_order");
  const CellMatrixField a_per = a_per_field(coeffs.a_per_profile(), super.mesh);
  const CellMatrixField a1 = a1_field(coeffs, r, super.mesh);
  Mat out = Mat::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const Vec e = unit_vector(dim, j);
    const CellVectorField g0 = replicate_gradients(super, w0_unit[j].gradients);
    for (int c = 0; c < super.mesh.n_cells(); ++c) {
      out.col(j) += super.mesh.cell_volume[c] * (a_per[c] * w1[j].gradients[c] + a1[c] * (e + g0[c]));
    }
  }
  return out / super.volume();
}

Mat lemma21_limit(const Model1Coefficients& coeffs, const UnitMesh& unit, const std::vector<CorrectorSolution>& w0) {
  const int dim = unit.dim();
  check_direction_count(w0, dim, "lemma21_limit");
  const Mat ea1 = coeffs.expected_a1();
  Mat out = Mat::Zero(dim, dim);
  for (int c = 0; c < unit.mesh.n_cells(); ++c) {
    for (int i = 0; i < dim; ++i) {
      const Vec gi = unit_vector(dim, i) + w0[i].gradients[c];
      for (int j = 0; j < dim; ++j) {
        const Vec gj = unit_vector(dim, j) + w0[j].gradients[c];
        out(i, j) += unit.mesh.cell_volume[c] * gi.dot(ea1 * gj);
      }
    }
  }
  return out;
}

HomogenizedReport residual_report(const SuperMesh& super, double eta, std::uint64_t seed, const Mat& A_eta_star,
                                  const Mat& A_per_star, const Mat& A1_star,
                                  const std::vector<CorrectorSolution>& w_eta,
                                  const std::vector<CorrectorSolution>& w0_unit,
                                  const std::vector<CorrectorSolution>& w1) {
  return make_residual_report(1, super, eta, seed, A_eta_star, A_per_star, A1_star, w_eta, w0_unit, w1);
}

PeriodicReference periodic_reference(const PeriodicProfile& a_per, const UnitMesh& unit,
                                     const SolverSettings& settings) {
  PeriodicReference ref;
  for (int j = 0; j < unit.dim(); ++j) {
    ref.w0.push_back(solve_corrector_0(a_per, unit, unit_vector(unit.dim(), j), settings));
  }
  ref.A_per_star = homogenized_per(a_per, unit, ref.w0);
  return ref;
}

std::vector<HomogenizedReport> realization_reports(const Model1Coefficients& coeffs, const Realization& r,
                                                   std::uint64_t seed, const std::vector<double>& etas,
                                                   const SuperMesh& super, const PeriodicReference& ref,
                                                   const SolverSettings& settings) {
  const int dim = super.dim();
  std::vector<CorrectorSolution> w1;
  for (int j = 0; j < dim; ++j) {
    w1.push_back(solve_corrector_1(coeffs, r, super, ref.w0[j], unit_vector(dim, j), settings));
  }
  const Mat A1 = homogenized_first_order(coeffs, r, super, ref.w0, w1);
  std::vector<HomogenizedReport> out;
  for (double eta : etas) {
    if (eta == 0.0) continue;
    std::vector<CorrectorSolution> w_eta;
    for (int j = 0; j < dim; ++j) {
      w_eta.push_back(solve_corrector_eta(coeffs, r, eta, super, unit_vector(dim, j), settings));
    }
    const Mat A_eta = homogenized_eta(coeffs, r, eta, super, w_eta);
    out.push_back(residual_report(super, eta, seed, A_eta, ref.A_per_star, A1, w_eta, ref.w0, w1));
  }
  return out;
}

}  // namespace perthom::model1
