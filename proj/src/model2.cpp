#include "perthom/model2.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace perthom::model2 {

namespace {

void check_direction_count(const std::vector<CorrectorSolution>& w, int dim, const char* what) {
  if (static_cast<int>(w.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected one corrector per direction");
  }
}

void check_unit(const Vec& p) {
  if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("direction p must be a unit vector");
}

void check_dims(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per, int mesh_dim) {
  if (diffeo.dim() != mesh_dim || a_per.dim() != mesh_dim) {
    throw std::invalid_argument("diffeomorphism, profile and mesh dimensions differ");
  }
}

double spectral_norm(const Mat& m) {
  const Mat gram = m.transpose() * m;
  return std::sqrt(std::max(0.0, symmetric_eigenvalues(gram)[1]));
}

}  // namespace

std::string to_string(Normalization n) {
  return n == Normalization::as_printed ? "as-printed" : "volume-normalized";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "as-printed") return Normalization::as_printed;
  if (name == "volume-normalized") return Normalization::volume_normalized;
  throw std::invalid_argument("unknown normalization '" + name + "' (expected as-printed | volume-normalized)");
}

std::string to_string(FirstOrderSign s) { return s == FirstOrderSign::derived ? "derived" : "as-stated"; }

FirstOrderSign first_order_sign_from_string(const std::string& name) {
  if (name == "derived") return FirstOrderSign::derived;
  if (name == "as-stated") return FirstOrderSign::as_stated;
  throw std::invalid_argument("unknown first-order sign '" + name + "' (expected derived | as-stated)");
}

TransformedCoefficient transformed_coefficient(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                               const Realization& r, double eta, const SimplexMesh& mesh) {
  check_dims(diffeo, a_per, mesh.dim);
  TransformedCoefficient t;
  const int nc = mesh.n_cells();
  t.B.reserve(nc);
  t.grad_phi.reserve(nc);
  t.inv_grad.reserve(nc);
  t.det.reserve(nc);
  t.a_per.reserve(nc);
  for (int c = 0; c < nc; ++c) {
    const Vec& x = mesh.barycenter[c];
    const Mat G = diffeo.grad_phi(x, r, eta);
    const Mat inv = diffeo.inverse_grad_phi(x, r, eta);
    const double det = diffeo.det_grad_phi(x, r, eta);
    const Mat a = a_per(x);
    t.B.push_back(det * inv.transpose() * a * inv);
    t.grad_phi.push_back(G);
    t.inv_grad.push_back(inv);
    t.det.push_back(det);
    t.a_per.push_back(a);
  }
  return t;
}

double transformed_coercivity_floor(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per) {
  return a_per.min_eigenvalue() * diffeo.nu() * 0.5;
}

CorrectorSolution solve_corrector_eta_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                             const Realization& r, double eta, const SuperMesh& super, const Vec& p,
                                             const SolverSettings& settings) {
  diffeo.check_eta(eta);
  check_unit(p);
  const TransformedCoefficient t = transformed_coefficient(diffeo, a_per, r, eta, super.mesh);
  CellVectorField flux(t.B.size());
  for (std::size_t c = 0; c < flux.size(); ++c) flux[c] = t.det[c] * (t.inv_grad[c].transpose() * (t.a_per[c] * p));
  return solve_flux_problem(super.mesh, t.B, flux, p, CorrectorLevel::eta, eta, settings,
                            "model-2 corrector eta (eta=" + std::to_string(eta) + ")");
}

Mat homogenized_eta_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per, const Realization& r,
                           double eta, const SuperMesh& super, const std::vector<CorrectorSolution>& w_eta,
                           Normalization normalization) {
  const int dim = super.dim();
  check_direction_count(w_eta, dim, "homogenized_eta_diffeo");
  const TransformedCoefficient t = transformed_coefficient(diffeo, a_per, r, eta, super.mesh);
  Mat inner = Mat::Zero(dim, dim);
  Mat grad_integral = Mat::Zero(dim, dim);
  for (int c = 0; c < super.mesh.n_cells(); ++c) {
    const double vol = super.mesh.cell_volume[c];
    grad_integral += vol * t.grad_phi[c];
    for (int i = 0; i < dim; ++i) {
      const Vec v = unit_vector(dim, i) + t.inv_grad[c] * w_eta[i].gradients[c];
      inner.row(i) += vol * t.det[c] * (t.a_per[c].transpose() * v).transpose();
    }
  }
  if (normalization == Normalization::volume_normalized) {
    inner /= super.volume();
    grad_integral /= super.volume();
  }
  const double norm = grad_integral.determinant();
  if (!(std::abs(norm) > 1e-14 * std::max(1.0, grad_integral.cwiseAbs().maxCoeff()))) {
    std::ostringstream msg;
    msg << "normalization matrix integral of grad Phi is singular (det " << norm << ")";
    throw std::domain_error(msg.str());
  }
  return inner / norm;
}

CorrectorSolution solve_corrector_1_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                           const Realization& r, const SuperMesh& super,
                                           const CorrectorSolution& w0_unit, const Vec& p, FirstOrderSign sign,
                                           const SolverSettings& settings) {
  check_dims(diffeo, a_per, super.dim());
  check_unit(p);
  const int dim = super.dim();
  const CellVectorField g0 = replicate_gradients(super, w0_unit.gradients);
  const double s = sign == FirstOrderSign::derived ? -1.0 : 1.0;
  CellMatrixField a(super.mesh.n_cells());
  CellVectorField flux(super.mesh.n_cells());
  for (int c = 0; c < super.mesh.n_cells(); ++c) {
    const Vec& x = super.mesh.barycenter[c];
    a[c] = a_per(x);
    const Mat D = diffeo.grad_psi(x, r);
    const Mat M = D.trace() * identity(dim) - D.transpose();
    flux[c] = M * (a[c] * (p + g0[c])) + s * (a[c] * (D * g0[c]));
  }
  return solve_flux_problem(super.mesh, a, flux, p, CorrectorLevel::one, 0.0, settings, "model-2 corrector one");
}

Mat homogenized_first_order_diffeo(const Model2Diffeomorphism& diffeo, const PeriodicProfile& a_per,
                                   const Realization& r, const SuperMesh& super,
                                   const std::vector<CorrectorSolution>& w0_unit,
                                   const std::vector<CorrectorSolution>& w1, const Mat& A_per_star) {
  const int dim = super.dim();
  check_dims(diffeo, a_per, dim);
  check_direction_count(w0_unit, dim, "homogenized_first_order_diffeo");
  check_direction_count(w1, dim, "homogenized_first_order_diffeo");
  std::vector<CellVectorField> g0;
  for (int i = 0; i < dim; ++i) g0.push_back(replicate_gradients(super, w0_unit[i].gradients));

  double div_integral = 0.0;
  Mat out = Mat::Zero(dim, dim);
  for (int c = 0; c < super.mesh.n_cells(); ++c) {
    const Vec& x = super.mesh.barycenter[c];
    const double vol = super.mesh.cell_volume[c];
    const Mat a = a_per(x);
    const Mat D = diffeo.grad_psi(x, r);
    const double div = D.trace();
    div_integral += vol * div;
    for (int i = 0; i < dim; ++i) {
      const Vec v = div * (unit_vector(dim, i) + g0[i][c]) + w1[i].gradients[c] - D * g0[i][c];
      out.row(i) += vol * (a.transpose() * v).transpose();
    }
  }
  const double vol = super.volume();
  return out / vol - A_per_star * (div_integral / vol);
}

Lemma31Record lemma31_validate(const Model2Diffeomorphism& diffeo, const Realization& r,
                               const std::vector<double>& eta_grid, int sample_points, std::uint64_t sample_seed,
                               double band_factor) {
  const int dim = diffeo.dim();
  Lemma31Record rec;
  rec.band_factor = band_factor;
  rec.eigen_pass = true;
  for (double eta : eta_grid) {
    std::mt19937_64 gen(sample_seed);
    std::uniform_real_distribution<double> coord(-2.5, 2.5);
    Lemma31Row row;
    row.eta = eta;
    row.eig_min = std::numeric_limits<double>::infinity();
    row.eig_max = -std::numeric_limits<double>::infinity();
    row.det_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_points; ++s) {
      Vec x(dim);
      for (int a = 0; a < dim; ++a) x(a) = coord(gen);
      const Mat inv = diffeo.inverse_grad_phi(x, r, eta);
      row.gamma_sup = std::max(row.gamma_sup, spectral_norm(diffeo.gamma(x, r, eta)));
      row.sigma_sup = std::max(row.sigma_sup, std::abs(diffeo.sigma(x, r, eta)));
      row.det_min = std::min(row.det_min, diffeo.det_grad_phi(x, r, eta));
      const Mat gram = inv.transpose() * inv;
      const auto eig = symmetric_eigenvalues(gram);
      row.eig_min = std::min(row.eig_min, eig[0]);
      row.eig_max = std::max(row.eig_max, eig[1]);
    }
    if (eta != 0.0) {
      row.gamma_ratio = row.gamma_sup / (eta * eta);
      row.sigma_ratio = row.sigma_sup / (eta * eta);
    }
    row.eigen_window = row.eig_min >= 0.5 && row.eig_max <= 1.5;
    rec.eigen_pass = rec.eigen_pass && row.eigen_window;
    rec.rows.push_back(row);
  }
  // A remainder whose sup is at rounding level on every row is identically zero
  // (e.g. sigma for Theta = 0, where grad Psi has rank one); its band is 1.
  constexpr double kRoundoff = 1e-12;
  auto band = [&](double Lemma31Row::*sup, double Lemma31Row::*ratio) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool all_zero = true;
    for (const Lemma31Row& row : rec.rows) {
      if (row.eta == 0.0) continue;
      all_zero = all_zero && row.*sup <= kRoundoff;
      lo = std::min(lo, row.*ratio);
      hi = std::max(hi, row.*ratio);
    }
    if (all_zero) return 1.0;
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  };
  rec.gamma_band = band(&Lemma31Row::gamma_sup, &Lemma31Row::gamma_ratio);
  rec.sigma_band = band(&Lemma31Row::sigma_sup, &Lemma31Row::sigma_ratio);
  rec.gamma_pass = rec.gamma_band <= band_factor;
  rec.sigma_pass = rec.sigma_band <= band_factor;
  return rec;
}

HomogenizedReport residual_report_diffeo(const SuperMesh& super, double eta, std::uint64_t seed,
                                         const Mat& A_eta_star, const Mat& A_per_star, const Mat& A1_star,
                                         const std::vector<CorrectorSolution>& w_eta,
                                         const std::vector<CorrectorSolution>& w0_unit,
                                         const std::vector<CorrectorSolution>& w1) {
  return make_residual_report(2, super, eta, seed, A_eta_star, A_per_star, A1_star, w_eta, w0_unit, w1);
}

std::vector<HomogenizedReport> realization_reports(const Model2Diffeomorphism& diffeo,
                                                   const PeriodicProfile& a_per, const Realization& r,
                                                   std::uint64_t seed, const std::vector<double>& etas,
                                                   const SuperMesh& super, const model1::PeriodicReference& ref,
                                                   const Options& options, const SolverSettings& settings) {
  const int dim = super.dim();
  std::vector<CorrectorSolution> w1;
  for (int j = 0; j < dim; ++j) {
    w1.push_back(
        solve_corrector_1_diffeo(diffeo, a_per, r, super, ref.w0[j], unit_vector(dim, j), options.sign, settings));
  }
  const Mat A1 = homogenized_first_order_diffeo(diffeo, a_per, r, super, ref.w0, w1, ref.A_per_star);
  std::vector<HomogenizedReport> out;
  for (double eta : etas) {
    if (eta == 0.0) continue;
    std::vector<CorrectorSolution> w_eta;
    for (int j = 0; j < dim; ++j) {
      w_eta.push_back(solve_corrector_eta_diffeo(diffeo, a_per, r, eta, super, unit_vector(dim, j), settings));
    }
    const Mat A_eta = homogenized_eta_diffeo(diffeo, a_per, r, eta, super, w_eta, options.normalization);
    out.push_back(residual_report_diffeo(super, eta, seed, A_eta, ref.A_per_star, A1, w_eta, ref.w0, w1));
  }
  return out;
}

}  // namespace perthom::model2
