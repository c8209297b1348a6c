#include "perthom/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace perthom;

namespace {

Vec point(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST(Realization, DrawsAreDeterministicAndInRange) {
  const Realization r(42);
  const Realization again(42);
  double sum = 0.0;
  double sq = 0.0;
  int n = 0;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const double v = r.cell_draw({i, j}, 0);
      EXPECT_EQ(v, again.cell_draw({i, j}, 0));
      EXPECT_GE(v, -1.0);
      EXPECT_LT(v, 1.0);
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  // Uniform on [-1, 1): mean 0, variance 1/3. 1681 samples, 5 sigma.
  EXPECT_NEAR(sum / n, 0.0, 5.0 * std::sqrt(1.0 / 3.0 / n));
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.05);
}

TEST(Realization, SeedsSlotsAndCellsDecorrelate) {
  const Realization a(1);
  const Realization b(2);
  int equal = 0;
  double cross = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const LatticeVector k{i - 1000, 7};
    if (a.cell_draw(k) == b.cell_draw(k)) ++equal;
    cross += a.cell_draw(k, 0) * a.cell_draw(k, 1);
  }
  EXPECT_EQ(equal, 0);
  EXPECT_NEAR(cross / n, 0.0, 5.0 / 3.0 / std::sqrt(n));
}

TEST(Realization, ShiftActsOnTheDrawTable) {
  const Realization r(9);
  const LatticeVector k{3, -2};
  const Realization s = r.shift(k);
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      EXPECT_EQ(s.cell_draw({i, j}, 1), r.cell_draw({i + 3, j - 2}, 1));
    }
  }
  EXPECT_EQ(s.shift({-3, 2}).cell_draw({1, 1}), r.cell_draw({1, 1}));
}

TEST(Realization, LatticeCellOfUsesCenteredCells) {
  EXPECT_EQ(lattice_cell_of(point(0.49, -0.49))[0], 0);
  EXPECT_EQ(lattice_cell_of(point(0.5, 0.0))[0], 1);
  EXPECT_EQ(lattice_cell_of(point(-0.5, 0.0))[0], 0);
  EXPECT_EQ(lattice_cell_of(point(-0.51, 0.0))[0], -1);
  EXPECT_EQ(lattice_cell_of(point(0.0, 2.2))[1], 2);
}

TEST(Profile, ValuesAndValidation) {
  const PeriodicProfile lam(ProfileKind::laminate, 2, {1.0, 4.0});
  EXPECT_DOUBLE_EQ(lam(point(-0.25, 0.3))(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(lam(point(0.25, 0.3))(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(lam(point(1.25, 0.3))(1, 1), 4.0);  // periodic
  const PeriodicProfile cb(ProfileKind::checkerboard, 2, {1.0, 4.0});
  EXPECT_DOUBLE_EQ(cb(point(0.2, 0.2))(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(cb(point(-0.2, 0.2))(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(cb(point(-0.2, -0.2))(1, 1), 1.0);
  const PeriodicProfile c = PeriodicProfile::constant({2.0, 3.0});
  EXPECT_TRUE(c.is_constant());
  EXPECT_DOUBLE_EQ(c.min_eigenvalue(), 2.0);
  EXPECT_DOUBLE_EQ(c.max_eigenvalue(), 3.0);

  EXPECT_THROW(PeriodicProfile(ProfileKind::two_phase, 2, {1.0, 4.0}), std::invalid_argument);
  EXPECT_THROW(PeriodicProfile(ProfileKind::laminate, 1, {1.0, 4.0}), std::invalid_argument);
  EXPECT_THROW(PeriodicProfile(ProfileKind::laminate, 2, {1.0}), std::invalid_argument);
  EXPECT_THROW(PeriodicProfile(ProfileKind::laminate, 2, {1.0, -4.0}), std::invalid_argument);
  EXPECT_THROW(profile_kind_from_string("stripes"), std::invalid_argument);
}

TEST(Model1Family, FieldsFollowTheCellDraws) {
  const PeriodicProfile cb(ProfileKind::checkerboard, 2, {1.0, 4.0});
  Model1Params p;
  p.perturb_amplitude = 0.5;
  p.perturb_mean = 0.3;
  p.remainder = RemainderOrder::quadratic;
  p.eta_max = 0.2;
  const Model1Coefficients c(cb, p);
  const Realization r(5);
  const Vec x = point(1.2, -0.7);
  const LatticeVector k = lattice_cell_of(x);
  const double X = r.cell_draw(k, 0);
  const double Y = r.cell_draw(k, 1);
  EXPECT_NEAR(c.a1(x, r)(0, 0), 0.3 + 0.5 * X, 1e-15);
  EXPECT_DOUBLE_EQ(c.a1(x, r)(0, 1), 0.0);
  EXPECT_NEAR(c.a2(x, r)(1, 1), 0.5 * Y, 1e-15);
  const double eta = 0.1;
  EXPECT_NEAR((c.a_eta(x, r, eta) - (c.a_per(x) + eta * c.a1(x, r) + eta * eta * c.a2(x, r))).norm(), 0.0, 1e-15);
  EXPECT_NEAR(c.expected_a1()(0, 0), 0.3, 1e-15);
  EXPECT_GT(c.gamma(), 0.0);
}

TEST(Model1Family, EtaOutsideValidityIsRejected) {
  Model1Params p;
  p.perturb_amplitude = 0.5;
  p.eta_max = 0.2;
  const Model1Coefficients c(PeriodicProfile(ProfileKind::checkerboard, 2, {1.0, 4.0}), p);
  EXPECT_NO_THROW(c.check_eta(-0.2));
  try {
    c.check_eta(0.3);
    FAIL() << "expected a validity error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("eta exceeds family validity"), std::string::npos);
  }
}

TEST(Model1Family, LossOfCoercivityIsRejectedAtConstruction) {
  Model1Params p;
  p.perturb_amplitude = 10.0;
  p.eta_max = 1.0;
  EXPECT_THROW(Model1Coefficients(PeriodicProfile::constant({1.0, 1.0}), p), std::invalid_argument);
}

TEST(Bump, ProfileAndDerivativeBound) {
  EXPECT_DOUBLE_EQ(bump(0.0), 1.0);
  EXPECT_DOUBLE_EQ(bump(0.5), 0.0);
  EXPECT_DOUBLE_EQ(bump(-0.5), 0.0);
  EXPECT_DOUBLE_EQ(bump(0.7), 0.0);
  EXPECT_NEAR(bump_derivative(0.5), 0.0, 1e-15);
  double max_deriv = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = -0.5 + i * 1e-5;
    max_deriv = std::max(max_deriv, std::abs(bump_derivative(t)));
    if (i > 0 && i < 100000) {
      const double fd = (bump(t + 1e-7) - bump(t - 1e-7)) / 2e-7;
      ASSERT_NEAR(fd, bump_derivative(t), 1e-6);
    }
  }
  EXPECT_NEAR(max_deriv, bump_derivative_bound(), 1e-8);
  EXPECT_NEAR(bump_derivative_bound(), 32.0 / (3.0 * std::sqrt(12.0)), 1e-15);
}

TEST(Diffeomorphism, IdentityFamily) {
  const Model2Diffeomorphism id = bump_model2(2, 0.0, 0.0, 0.2);
  EXPECT_TRUE(id.is_identity());
  EXPECT_DOUBLE_EQ(id.nu(), 1.0);
  EXPECT_TRUE(std::isinf(id.eta0()));
  const Realization r(3);
  const Vec x = point(0.3, -1.1);
  EXPECT_EQ(id.phi(x, r, 0.2), x);
  EXPECT_EQ(id.grad_phi(x, r, 0.2), Mat(Mat::Identity(2, 2)));
}

TEST(Diffeomorphism, JacobianConventionMatchesFiniteDifferences) {
  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.05, 0.2);
  const Realization r(11);
  const double eta = 0.15;
  const double step = 1e-6;
  for (const Vec& x : {point(0.13, -0.21), point(1.4, 0.9), point(-2.2, 0.35)}) {
    const Mat G = d.grad_phi(x, r, eta);
    for (int i = 0; i < 2; ++i) {
      Vec e = Vec::Zero(2);
      e(i) = step;
      const Vec fd = (d.phi(x + e, r, eta) - d.phi(x - e, r, eta)) / (2.0 * step);
      // (grad Phi)_{ij} = d_i Phi_j
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(G(i, j), fd(j), 1e-8);
    }
    EXPECT_NEAR(d.det_grad_phi(x, r, eta), G.determinant(), 1e-14);
    EXPECT_NEAR(d.div_psi(x, r), d.grad_psi(x, r).trace(), 1e-14);
  }
}

TEST(Diffeomorphism, RemaindersMatchTheirDefinitions) {
  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.0, 0.2);
  const Realization r(2);
  const Vec x = point(0.1, 0.2);
  const double eta = 0.1;
  const Mat D = d.grad_psi(x, r);
  const Mat G = Mat::Identity(2, 2) + eta * D;
  const Mat gamma = G.inverse() - Mat::Identity(2, 2) + eta * D;
  EXPECT_NEAR((d.gamma(x, r, eta) - gamma).norm(), 0.0, 1e-15);
  EXPECT_NEAR(d.sigma(x, r, eta), G.determinant() - 1.0 - eta * D.trace(), 1e-15);
}

TEST(Diffeomorphism, BoundsHoldOnSamples) {
  const Model2Diffeomorphism d = bump_model2(2, 0.3, 0.1, 0.2);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  const Realization r(4);
  for (int i = 0; i < 2000; ++i) {
    const Vec x = point(u(gen), u(gen));
    EXPECT_GE(d.det_grad_phi(x, r, 0.2), d.nu() - 1e-14);
    EXPECT_LE(d.grad_phi(x, r, 0.2).operatorNorm(), d.m_prime() + 1e-14);
  }
  EXPECT_THROW(d.check_eta(0.25), std::invalid_argument);
}

TEST(Diffeomorphism, InvertibilityIsCheckedAtConstruction) {
  EXPECT_THROW(bump_model2(2, 50.0, 0.0, 1.0), std::invalid_argument);
}

TEST(Stationarity, CellWiseFieldsAreShiftConsistent) {
  Model1Params p;
  p.perturb_amplitude = 0.5;
  const Model1Coefficients c(PeriodicProfile(ProfileKind::checkerboard, 2, {1.0, 4.0}), p);
  const FieldEvaluator a1 = [&](const Vec& x, const Realization& r) { return c.a1(x, r); };
  EXPECT_EQ(stationarity_check(a1, Realization(8), {2, -3}, 200, 2), 0.0);

  const Model2Diffeomorphism d = bump_model2(2, 0.1, 0.05, 0.2);
  const FieldEvaluator grad = [&](const Vec& x, const Realization& r) { return d.grad_phi(x, r, 0.1); };
  EXPECT_LT(stationarity_check(grad, Realization(8), {1, 4}, 200, 2), 1e-13);

  const FieldEvaluator drift = [](const Vec& x, const Realization&) { return Mat::Constant(1, 1, x(0)); };
  EXPECT_NEAR(stationarity_check(drift, Realization(8), {3, 0}, 20, 2), 3.0, 1e-12);
}

TEST(Ergodic, AveragesConcentrate) {
  const ScalarEvaluator draw = [](const Vec& x, const Realization& r) { return r.cell_draw(lattice_cell_of(x)); };
  EXPECT_EQ(ergodic_average(draw, Realization(1), 0, Vec::Zero(2)), Realization(1).cell_draw({0, 0}));
  double sq = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const double avg = ergodic_average(draw, Realization(s), 4, Vec::Zero(2));
    sq += avg * avg;
  }
  // Var of the average is 1 / (3 * 81).
  EXPECT_NEAR(sq / seeds, 1.0 / 243.0, 0.5 / 243.0);
}
