#pragma once

// Discretely stationary random inputs. A Realization assigns i.i.d. uniform
// draws to every lattice cell k of Z^d; the shift action tau_j moves the draw
// table by j, so any field built cell-wise from the draws satisfies
// F(x + j, omega) = F(x, tau_j omega) exactly.

#include "perthom/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace perthom {

class Realization {
 public:
  explicit Realization(std::uint64_t seed, LatticeVector offset = {}) : seed_(seed), offset_(offset) {}

  /// Uniform draw in [-1, 1) for lattice cell k and stream slot `slot`.
  /// Pure function of (seed, k + offset, slot).
  double cell_draw(const LatticeVector& k, int slot = 0) const;
  std::vector<double> cell_draws(const LatticeVector& k, int count) const;

  /// The realization tau_k omega: shift(k).cell_draw(j) == cell_draw(j + k).
  Realization shift(const LatticeVector& k) const;

  std::uint64_t seed() const { return seed_; }
  const LatticeVector& offset() const { return offset_; }

 private:
  std::uint64_t seed_;
  LatticeVector offset_;
};

Realization make_realization(std::uint64_t seed);

/// Lattice cell k with x in k + Q (Q = [-1/2, 1/2)^d).
LatticeVector lattice_cell_of(const Vec& x);

// ---------------------------------------------------------------------------
// Periodic reference tensors

enum class ProfileKind { constant, two_phase, laminate, checkerboard };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& name);

/// Q-periodic symmetric A_per. `values` holds the diagonal for `constant`
/// and the two phase values {a_1, a_2} otherwise:
///   two_phase (d=1):   a_1 on [-1/2, 0), a_2 on [0, 1/2)
///   laminate (d=2):    diag(a(x_1), a(x_1)) with the same split in x_1
///   checkerboard (d=2): a_1 I where x_1, x_2 have equal sign, a_2 I elsewhere
class PeriodicProfile {
 public:
  PeriodicProfile(ProfileKind kind, int dim, std::vector<double> values);

  static PeriodicProfile constant(const std::vector<double>& diagonal);

  Mat operator()(const Vec& x) const;
  ProfileKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& values() const { return values_; }
  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }
  bool is_constant() const;

 private:
  ProfileKind kind_;
  int dim_;
  std::vector<double> values_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

// ---------------------------------------------------------------------------
// Model 1: A_eta = A_per + eta A_1 + R_eta

enum class RemainderOrder { none, quadratic };

std::string to_string(RemainderOrder r);
RemainderOrder remainder_from_string(const std::string& name);

struct Model1Params {
  double perturb_amplitude = 0.0;   // b
  double perturb_mean = 0.0;        // m: A_1 = (m + b X_k) I, E(A_1) = m I
  RemainderOrder remainder = RemainderOrder::none;
  double remainder_amplitude = -1;  // A_2 = b_2 Y_k I; negative means b_2 = b
  double eta_max = 1.0;
};

/// Cell-wise constant perturbations of a periodic tensor. X_k and Y_k are the
/// first and second uniform draws of cell k. Construction validates uniform
/// coercivity over |eta| <= eta_max.
class Model1Coefficients {
 public:
  Model1Coefficients(PeriodicProfile a_per, Model1Params params);

  const PeriodicProfile& a_per_profile() const { return a_per_; }
  const Model1Params& params() const { return params_; }
  int dim() const { return a_per_.dim(); }

  Mat a_per(const Vec& x) const { return a_per_(x); }
  Mat a1(const Vec& x, const Realization& r) const;
  Mat a2(const Vec& x, const Realization& r) const;
  /// R_eta = eta^2 A_2 (or 0).
  Mat remainder(const Vec& x, const Realization& r, double eta) const;
  Mat a_eta(const Vec& x, const Realization& r, double eta) const;

  /// Analytic E(A_1).
  Mat expected_a1() const;
  double remainder_amplitude() const;
  /// sup over (x, omega) of |A_1|.
  double a1_bound() const { return std::abs(params_.perturb_mean) + params_.perturb_amplitude; }
  double gamma() const { return gamma_; }
  double upper_bound() const { return upper_; }
  double eta_max() const { return params_.eta_max; }

  /// Throws std::invalid_argument("eta exceeds family validity ...").
  void check_eta(double eta) const;

 private:
  PeriodicProfile a_per_;
  Model1Params params_;
  double gamma_ = 0.0;
  double upper_ = 0.0;
};

Model1Coefficients checkerboard_model1(const PeriodicProfile& a_per, double amplitude,
                                       RemainderOrder remainder, double eta_max = 1.0,
                                       double mean = 0.0);

// ---------------------------------------------------------------------------
// Model 2: Phi_eta = x + eta Psi + Theta_eta

/// Quartic bump beta(t) = (1 - 4 t^2)^2 on [-1/2, 1/2]; C^1 with beta = beta' = 0
/// at t = +-1/2.
double bump(double t);
double bump_derivative(double t);
/// max |beta'| = 32 / (3 sqrt(12)), attained at t = 1/sqrt(12).
double bump_derivative_bound();

struct Model2Params {
  double amplitude = 0.0;        // c
  double theta_amplitude = 0.0;  // t
  double eta_max = 0.2;
};

/// Psi(x) = c sum_k X_k theta(x - k) with X_k in [-1, 1]^d (draw slots 0..d-1)
/// and theta(y) = prod_a beta(y_a). Theta_eta = eta^2 t (same construction with
/// slots d..2d-1). Jacobians use (grad F)_{ij} = d_i F_j, so the reference-side
/// change of variables reads grad_x = (grad Phi)^{-1} grad_y.
class Model2Diffeomorphism {
 public:
  Model2Diffeomorphism(int dim, Model2Params params);

  int dim() const { return dim_; }
  const Model2Params& params() const { return params_; }
  bool is_identity() const { return params_.amplitude == 0.0 && params_.theta_amplitude == 0.0; }

  Vec psi(const Vec& x, const Realization& r) const;
  Mat grad_psi(const Vec& x, const Realization& r) const;
  double div_psi(const Vec& x, const Realization& r) const;
  Vec theta(const Vec& x, const Realization& r, double eta) const;
  Mat grad_theta(const Vec& x, const Realization& r, double eta) const;

  Vec phi(const Vec& x, const Realization& r, double eta) const;
  Mat grad_phi(const Vec& x, const Realization& r, double eta) const;
  double det_grad_phi(const Vec& x, const Realization& r, double eta) const;
  Mat inverse_grad_phi(const Vec& x, const Realization& r, double eta) const;
  /// Gamma_eta = (grad Phi)^{-1} - I + eta grad Psi.
  Mat gamma(const Vec& x, const Realization& r, double eta) const;
  /// sigma_eta = det grad Phi - 1 - eta div Psi.
  double sigma(const Vec& x, const Realization& r, double eta) const;

  /// Upper bound on |eta grad Psi + grad Theta_eta|_2.
  double perturbation_bound(double eta) const;
  /// det grad Phi >= nu and |grad Phi| <= M' for |eta| <= eta_max.
  double nu() const { return nu_; }
  double m_prime() const { return m_prime_; }
  /// Largest |eta| for which the bound guarantees the eigenvalues of
  /// (grad Phi)^{-T} (grad Phi)^{-1} lie in [1/2, 3/2].
  double eta0() const { return eta0_; }
  double eta_max() const { return params_.eta_max; }
  void check_eta(double eta) const;

 private:
  Mat bump_field_gradient(const Vec& x, const Realization& r, int first_slot) const;
  Vec bump_field(const Vec& x, const Realization& r, int first_slot) const;

  int dim_;
  Model2Params params_;
  double nu_ = 1.0;
  double m_prime_ = 1.0;
  double eta0_ = 0.0;
};

Model2Diffeomorphism bump_model2(int dim, double amplitude, double theta_amplitude, double eta_max);

// ---------------------------------------------------------------------------
// Stationarity and ergodic checks

using FieldEvaluator = std::function<Mat(const Vec& x, const Realization& r)>;
using ScalarEvaluator = std::function<double(const Vec& x, const Realization& r)>;

/// max over `samples` points x of |F(x + k, r) - F(x, r.shift(k))|.
/// Sample points are drawn deterministically from [-2.5, 2.5]^d.
double stationarity_check(const FieldEvaluator& field, const Realization& r, const LatticeVector& k,
                          int samples, int dim, std::uint64_t sample_seed = 0);

/// (2N+1)^{-d} sum_{|k|_inf <= N} F(x, tau_k omega).
double ergodic_average(const ScalarEvaluator& field, const Realization& r, int N, const Vec& x);

}  // namespace perthom
