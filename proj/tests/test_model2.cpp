#include "perthom/model2.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace perthom;

namespace {

const PeriodicProfile kLaminate(ProfileKind::laminate, 2, {1.0, 4.0});
const PeriodicProfile kChecker(ProfileKind::checkerboard, 2, {1.0, 4.0});
const SolverSettings kTight{1e-12, 50};

std::vector<CorrectorSolution> eta_correctors(const Model2Diffeomorphism& d, const PeriodicProfile& a,
                                              const Realization& r, double eta, const SuperMesh& super) {
  std::vector<CorrectorSolution> w;
  for (int j = 0; j < super.dim(); ++j) {
    w.push_back(model2::solve_corrector_eta_diffeo(d, a, r, eta, super, unit_vector(super.dim(), j), kTight));
  }
  return w;
}

Mat first_order(const Model2Diffeomorphism& d, const PeriodicProfile& a, const Realization& r,
                const SuperMesh& super, model2::FirstOrderSign sign) {
  const model1::PeriodicReference ref = model1::periodic_reference(a, super.base, kTight);
  std::vector<CorrectorSolution> w1;
  for (int j = 0; j < super.dim(); ++j) {
    w1.push_back(
        model2::solve_corrector_1_diffeo(d, a, r, super, ref.w0[j], unit_vector(super.dim(), j), sign, kTight));
  }
  return model2::homogenized_first_order_diffeo(d, a, r, super, ref.w0, w1, ref.A_per_star);
}

}  // namespace

TEST(Model2, IdentityReducesToUnperturbedModel1) {
  const Model2Diffeomorphism id = bump_model2(2, 0.0, 0.0, 0.2);
  Model1Params p;
  p.eta_max = 0.2;
  const Model1Coefficients m1(kChecker, p);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 1);
  for (std::uint64_t seed : {0u, 1u}) {
    const Realization r(seed);
    for (double eta : {0.2, 0.1, 0.05}) {
      const Mat a2 = model2::homogenized_eta_diffeo(id, kChecker, r, eta, super, eta_correctors(id, kChecker, r, eta, super));
      std::vector<CorrectorSolution> w;
      for (int j = 0; j < 2; ++j) {
        w.push_back(model1::solve_corrector_eta(m1, r, eta, super, unit_vector(2, j), kTight));
      }
      const Mat a1 = model1::homogenized_eta(m1, r, eta, super, w);
      EXPECT_LT((a2 - a1).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

// 1D: pulled back, the homogenized coefficient is sum |T| G / sum |T| G / A.
TEST(Model2, OneDimensionalOracle) {
  const PeriodicProfile a(ProfileKind::two_phase, 1, {1.0, 4.0});
  const Model2Diffeomorphism d = bump_model2(1, 0.3, 0.1, 0.2);
  for (int N : {0, 1, 2}) {
    const SuperMesh super = replicate(build_unit_mesh(1, 8), N);
    const Realization r(N + 10);
    const double eta = 0.2;
    const model2::TransformedCoefficient tc = model2::transformed_coefficient(d, a, r, eta, super.mesh);
    double num = 0.0;
    double den = 0.0;
    for (int t = 0; t < super.mesh.n_cells(); ++t) {
      const double G = tc.grad_phi[t](0, 0);
      num += super.mesh.cell_volume[t] * G;
      den += super.mesh.cell_volume[t] * G / tc.a_per[t](0, 0);
    }
    const auto w = eta_correctors(d, a, r, eta, super);
    for (auto norm : {model2::Normalization::volume_normalized, model2::Normalization::as_printed}) {
      const Mat A = model2::homogenized_eta_diffeo(d, a, r, eta, super, w, norm);
      EXPECT_NEAR(A(0, 0), num / den, 1e-10);
    }
  }
}

TEST(Model2, NormalizationsAgreeOnTheUnitCell) {
  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.05, 0.2);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 0);
  const Realization r(5);
  const auto w = eta_correctors(d, kLaminate, r, 0.1, super);
  const Mat a = model2::homogenized_eta_diffeo(d, kLaminate, r, 0.1, super, w, model2::Normalization::as_printed);
  const Mat b =
      model2::homogenized_eta_diffeo(d, kLaminate, r, 0.1, super, w, model2::Normalization::volume_normalized);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model2, VolumeNormalizationKeepsIdentityOnSupercells) {
  const Model2Diffeomorphism id = bump_model2(2, 0.0, 0.0, 0.2);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 1);
  const Realization r(0);
  const auto w = eta_correctors(id, kLaminate, r, 0.1, super);
  const Mat v =
      model2::homogenized_eta_diffeo(id, kLaminate, r, 0.1, super, w, model2::Normalization::volume_normalized);
  EXPECT_NEAR(v(0, 0), 1.6, 1e-10);
  EXPECT_NEAR(v(1, 1), 2.5, 1e-10);
  // Taken literally, the outer factor det(integral G)^{-1} scales by |Q_N|^{1-d}.
  const Mat p = model2::homogenized_eta_diffeo(id, kLaminate, r, 0.1, super, w, model2::Normalization::as_printed);
  EXPECT_NEAR(p(0, 0), 1.6 / 9.0, 1e-10);
}

TEST(Model2, DerivedSignMatchesCentralDifference) {
  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.0, 0.2);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 1);
  const Realization r(2);
  const double eta = 0.02;
  const Mat plus = model2::homogenized_eta_diffeo(d, kLaminate, r, eta, super,
                                                  eta_correctors(d, kLaminate, r, eta, super));
  const Mat minus = model2::homogenized_eta_diffeo(d, kLaminate, r, -eta, super,
                                                   eta_correctors(d, kLaminate, r, -eta, super));
  const Mat cd = (plus - minus) / (2.0 * eta);
  const Mat derived = first_order(d, kLaminate, r, super, model2::FirstOrderSign::derived);
  const Mat stated = first_order(d, kLaminate, r, super, model2::FirstOrderSign::as_stated);
  const double scale = derived.cwiseAbs().maxCoeff();
  ASSERT_GT(scale, 1e-6);
  EXPECT_LT((cd - derived).cwiseAbs().maxCoeff() / scale, 0.01);
  EXPECT_GT((cd - stated).cwiseAbs().maxCoeff() / scale, 0.1);
}

TEST(Model2, CheckerboardFirstOrderMatrixVanishesBySymmetry) {
  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.0, 0.2);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 1);
  const Mat A1 = first_order(d, kChecker, Realization(7), super, model2::FirstOrderSign::derived);
  EXPECT_LT(A1.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Model2, TransformedCoefficientStaysCoercive) {
  const Model2Diffeomorphism d = bump_model2(2, 0.3, 0.1, 0.2);
  const SuperMesh super = replicate(build_unit_mesh(2, 8), 1);
  const double floor = model2::transformed_coercivity_floor(d, kChecker);
  EXPECT_GT(floor, 0.0);
  for (double eta : {-0.2, 0.2}) {
    const model2::TransformedCoefficient tc = model2::transformed_coefficient(d, kChecker, Realization(1), eta,
                                                                              super.mesh);
    for (const Mat& B : tc.B) EXPECT_GE(symmetric_eigenvalues(B)[0], floor);
  }
}

TEST(Model2, ExpansionChecksTrivialForIdentity) {
  const model2::Lemma31Record rec =
      model2::lemma31_validate(bump_model2(2, 0.0, 0.0, 0.2), Realization(0), {0.1, 0.05}, 500);
  EXPECT_TRUE(rec.pass());
  for (const auto& row : rec.rows) {
    EXPECT_EQ(row.gamma_sup, 0.0);
    EXPECT_EQ(row.sigma_sup, 0.0);
    EXPECT_DOUBLE_EQ(row.eig_min, 1.0);
  }
}

TEST(Model2, ExpansionRemaindersScaleQuadratically) {
  const model2::Lemma31Record rec =
      model2::lemma31_validate(bump_model2(2, 0.1, 0.05, 0.2), Realization(0), {0.1, 0.05, 0.025}, 2000);
  EXPECT_TRUE(rec.pass());
  EXPECT_LT(rec.gamma_band, 1.5);
  EXPECT_LT(rec.sigma_band, 1.5);
  EXPECT_GT(rec.rows[0].sigma_sup, 1e-6);  // Theta makes sigma nontrivial
}

TEST(Model2, StringConversions) {
  EXPECT_EQ(model2::to_string(model2::Normalization::as_printed), "as-printed");
  EXPECT_EQ(model2::normalization_from_string("volume-normalized"), model2::Normalization::volume_normalized);
  EXPECT_EQ(model2::first_order_sign_from_string("as-stated"), model2::FirstOrderSign::as_stated);
  EXPECT_THROW(model2::normalization_from_string("raw"), std::invalid_argument);
}
