#include "perthom/model1.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace perthom;
using namespace perthom::model1;

namespace {

Model1Coefficients family(const PeriodicProfile& a_per, double b, double m = 0.0,
                          RemainderOrder rem = RemainderOrder::none, double eta_max = 0.2) {
  Model1Params p;
  p.perturb_amplitude = b;
  p.perturb_mean = m;
  p.remainder = rem;
  p.eta_max = eta_max;
  return Model1Coefficients(a_per, p);
}

const PeriodicProfile kChecker(ProfileKind::checkerboard, 2, {1.0, 4.0});

std::vector<CorrectorSolution> eta_correctors(const Model1Coefficients& c, const Realization& r, double eta,
                                              const SuperMesh& super) {
  std::vector<CorrectorSolution> w;
  for (int j = 0; j < super.dim(); ++j) {
    w.push_back(solve_corrector_eta(c, r, eta, super, unit_vector(super.dim(), j), {1e-12, 50}));
  }
  return w;
}

}  // namespace

TEST(Model1, ConstantCoefficientIsExact) {
  const PeriodicProfile a = PeriodicProfile::constant({2.0, 3.0});
  const Model1Coefficients c = family(a, 0.0);
  for (int s : {2, 4}) {
    const UnitMesh unit = build_unit_mesh(2, s);
    const PeriodicReference ref = periodic_reference(a, unit);
    EXPECT_LT((ref.A_per_star - Mat(a(Vec::Zero(2)))).cwiseAbs().maxCoeff(), 1e-12);
    for (int N : {0, 1, 2}) {
      const SuperMesh super = replicate(unit, N);
      for (const CorrectorSolution& w : eta_correctors(c, Realization(1), 0.1, super)) {
        EXPECT_LT(w.field.values.cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(Model1, LaminateMatchesHarmonicAndArithmeticMeans) {
  const PeriodicProfile lam(ProfileKind::laminate, 2, {1.0, 4.0});
  for (int s : {2, 4, 6}) {
    const PeriodicReference ref = periodic_reference(lam, build_unit_mesh(2, s));
    EXPECT_NEAR(ref.A_per_star(0, 0), 1.6, 1e-10);
    EXPECT_NEAR(ref.A_per_star(1, 1), 2.5, 1e-10);
    EXPECT_NEAR(ref.A_per_star(0, 1), 0.0, 1e-10);
  }
}

// In 1D the homogenized coefficient of any piecewise-constant a on a
// boundary-aligned mesh is |Q_N| / sum |T| / a_T.
TEST(Model1, OneDimensionalRealizationHarmonicMean) {
  const PeriodicProfile a(ProfileKind::two_phase, 1, {1.0, 4.0});
  const Model1Coefficients c = family(a, 0.5, 0.0, RemainderOrder::none, 0.5);
  const UnitMesh unit = build_unit_mesh(1, 4);
  for (int N : {0, 2}) {
    const SuperMesh super = replicate(unit, N);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Realization r(seed);
      const double eta = 0.3;
      const CellMatrixField field = a_eta_field(c, r, eta, super.mesh);
      double inv = 0.0;
      for (int t = 0; t < super.mesh.n_cells(); ++t) inv += super.mesh.cell_volume[t] / field[t](0, 0);
      const double oracle = super.volume() / inv;
      const Mat A = homogenized_eta(c, r, eta, super, eta_correctors(c, r, eta, super));
      EXPECT_NEAR(A(0, 0), oracle, 1e-10);
    }
  }
}

TEST(Model1, HomogenizedMatrixIsSymmetricAndEqualsEnergy) {
  const Model1Coefficients c = family(kChecker, 0.5, 0.1, RemainderOrder::quadratic);
  const SuperMesh super = replicate(build_unit_mesh(2, 4), 1);
  const Realization r(3);
  const double eta = 0.15;
  const std::vector<CorrectorSolution> w = eta_correctors(c, r, eta, super);
  const Mat A = homogenized_eta(c, r, eta, super, w);
  EXPECT_NEAR(A(0, 1), A(1, 0), 1e-9);
  const CellMatrixField field = a_eta_field(c, r, eta, super.mesh);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double energy = 0.0;
      for (int t = 0; t < super.mesh.n_cells(); ++t) {
        const Vec gi = unit_vector(2, i) + w[i].gradients[t];
        const Vec gj = unit_vector(2, j) + w[j].gradients[t];
        energy += super.mesh.cell_volume[t] * gi.dot(field[t] * gj);
      }
      EXPECT_NEAR(A(i, j), energy / super.volume(), 1e-9);
    }
  }
  // Voigt-Reuss bounds.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(0.5 * (A + A.transpose())));
  EXPECT_GT(es.eigenvalues()(0), 1.0 - eta * 0.6 - eta * eta * 0.5);
  EXPECT_LT(es.eigenvalues()(1), 4.0 + eta * 0.6 + eta * eta * 0.5);
}

// Discrete identity: A1 = |Q_N|^{-1} integral (e_i + grad w0_i)^T A_1 (e_j + grad w0_j).
TEST(Model1, FirstOrderMatrixIsTheA1QuadraticForm) {
  const Model1Coefficients c = family(kChecker, 0.5, 0.3);
  const UnitMesh unit = build_unit_mesh(2, 4);
  const SuperMesh super = replicate(unit, 1);
  const PeriodicReference ref = periodic_reference(kChecker, unit, {1e-12, 50});
  const Realization r(17);
  std::vector<CorrectorSolution> w1;
  for (int j = 0; j < 2; ++j) {
    w1.push_back(solve_corrector_1(c, r, super, ref.w0[j], unit_vector(2, j), {1e-12, 50}));
  }
  const Mat A1 = homogenized_first_order(c, r, super, ref.w0, w1);
  const CellMatrixField a1 = a1_field(c, r, super.mesh);
  const CellVectorField g0 = replicate_gradients(super, ref.w0[0].gradients);
  const CellVectorField g1 = replicate_gradients(super, ref.w0[1].gradients);
  Mat oracle = Mat::Zero(2, 2);
  for (int t = 0; t < super.mesh.n_cells(); ++t) {
    const Vec e[2] = {unit_vector(2, 0) + g0[t], unit_vector(2, 1) + g1[t]};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) oracle(i, j) += super.mesh.cell_volume[t] * e[i].dot(a1[t] * e[j]);
    }
  }
  oracle /= super.volume();
  EXPECT_LT((A1 - oracle).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Model1, FirstOrderLimitForConstantReference) {
  const PeriodicProfile id = PeriodicProfile::constant({1.0, 1.0});
  const Model1Coefficients c = family(id, 0.5, 0.3);
  const UnitMesh unit = build_unit_mesh(2, 4);
  const PeriodicReference ref = periodic_reference(id, unit);
  const Mat lim = lemma21_limit(c, unit, ref.w0);
  EXPECT_LT((lim - 0.3 * Mat(Mat::Identity(2, 2))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model1, CentralDifferenceApproachesFirstOrderMatrix) {
  const Model1Coefficients c = family(kChecker, 0.5);
  const UnitMesh unit = build_unit_mesh(2, 4);
  const SuperMesh super = replicate(unit, 1);
  const PeriodicReference ref = periodic_reference(kChecker, unit, {1e-12, 50});
  const Realization r(4);
  std::vector<CorrectorSolution> w1;
  for (int j = 0; j < 2; ++j) {
    w1.push_back(solve_corrector_1(c, r, super, ref.w0[j], unit_vector(2, j), {1e-12, 50}));
  }
  const Mat A1 = homogenized_first_order(c, r, super, ref.w0, w1);
  double prev = 0.0;
  for (double eta : {0.1, 0.05, 0.025}) {
    const Mat plus = homogenized_eta(c, r, eta, super, eta_correctors(c, r, eta, super));
    const Mat minus = homogenized_eta(c, r, -eta, super, eta_correctors(c, r, -eta, super));
    const double err = ((plus - minus) / (2.0 * eta) - A1).cwiseAbs().maxCoeff();
    if (prev > 0.0) EXPECT_LT(err, 0.3 * prev);  // O(eta^2)
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Model1, ReportsWithoutPerturbationHaveZeroResidual) {
  const Model1Coefficients c = family(kChecker, 0.0);
  const UnitMesh unit = build_unit_mesh(2, 4);
  const SuperMesh super = replicate(unit, 1);
  const PeriodicReference ref = periodic_reference(kChecker, unit, {1e-12, 50});
  const auto reports = realization_reports(c, Realization(0), 0, {0.2, 0.0, 0.1}, super, ref, {1e-12, 50});
  ASSERT_EQ(reports.size(), 2u);
  for (const HomogenizedReport& rep : reports) {
    EXPECT_LT(rep.residual_max, 1e-6);
    EXPECT_LT(rep.z_norm, 1e-6);
    EXPECT_LT(rep.A1_star.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Model1, ResidualReportRejectsZeroEta) {
  const Model1Coefficients c = family(kChecker, 0.5);
  const UnitMesh unit = build_unit_mesh(2, 2);
  const SuperMesh super = replicate(unit, 0);
  const PeriodicReference ref = periodic_reference(kChecker, unit);
  const Mat z = Mat::Zero(2, 2);
  EXPECT_THROW(residual_report(super, 0.0, 0, z, z, z, ref.w0, ref.w0, ref.w0), std::invalid_argument);
}

TEST(Model1, OutOfRangeEtaIsRejected) {
  const Model1Coefficients c = family(kChecker, 0.5);
  const SuperMesh super = replicate(build_unit_mesh(2, 2), 0);
  EXPECT_THROW(solve_corrector_eta(c, Realization(0), 0.5, super, unit_vector(2, 0)), std::invalid_argument);
}
