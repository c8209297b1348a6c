#include "perthom/fields.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace perthom {

namespace {

// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t zigzag(int v) {
  return static_cast<std::uint64_t>((static_cast<std::int64_t>(v) << 1) ^ (static_cast<std::int64_t>(v) >> 63));
}

constexpr int kLatticeBits = 24;
constexpr int kMaxLattice = 1 << (kLatticeBits - 1);

// Counter layout: zigzag(k_0) | zigzag(k_1) << 24 | slot << 48. Distinct
// (k, slot) give distinct counters, and the keyed mix is a bijection, so
// cell streams never overlap.
std::uint64_t counter_of(const LatticeVector& k, int slot) {
  for (int v : k) {
    if (v <= -kMaxLattice || v >= kMaxLattice) throw std::out_of_range("lattice index out of RNG range");
  }
  if (slot < 0 || slot >= (1 << 16)) throw std::out_of_range("RNG slot out of range");
  return zigzag(k[0]) | (zigzag(k[1]) << kLatticeBits) | (static_cast<std::uint64_t>(slot) << 48);
}

Mat inverse_small(const Mat& m) {
  if (m.rows() == 1) return Mat::Constant(1, 1, 1.0 / m(0, 0));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat inv(2, 2);
  inv << m(1, 1) / det, -m(0, 1) / det, -m(1, 0) / det, m(0, 0) / det;
  return inv;
}

double det_small(const Mat& m) {
  return m.rows() == 1 ? m(0, 0) : m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

}  // namespace

double Realization::cell_draw(const LatticeVector& k, int slot) const {
  const LatticeVector shifted{k[0] + offset_[0], k[1] + offset_[1]};
  const std::uint64_t key1 = mix64(seed_ ^ 0x6a09e667f3bcc909ULL);
  const std::uint64_t key2 = mix64(seed_ + 0xbb67ae8584caa73bULL);
  const std::uint64_t bits = mix64(mix64(counter_of(shifted, slot) ^ key1) + key2);
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * u - 1.0;
}

std::vector<double> Realization::cell_draws(const LatticeVector& k, int count) const {
  std::vector<double> out(count);
  for (int s = 0; s < count; ++s) out[s] = cell_draw(k, s);
  return out;
}

Realization Realization::shift(const LatticeVector& k) const {
  return Realization(seed_, {offset_[0] + k[0], offset_[1] + k[1]});
}

Realization make_realization(std::uint64_t seed) { return Realization(seed); }

LatticeVector lattice_cell_of(const Vec& x) {
  LatticeVector k{};
  for (int a = 0; a < x.size(); ++a) k[a] = static_cast<int>(std::floor(x(a) + 0.5));
  return k;
}

// ---------------------------------------------------------------------------

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::two_phase: return "two_phase";
    case ProfileKind::laminate: return "laminate";
    case ProfileKind::checkerboard: return "checkerboard";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "constant") return ProfileKind::constant;
  if (name == "two_phase") return ProfileKind::two_phase;
  if (name == "laminate") return ProfileKind::laminate;
  if (name == "checkerboard") return ProfileKind::checkerboard;
  throw std::invalid_argument("unknown profile '" + name + "'");
}

PeriodicProfile::PeriodicProfile(ProfileKind kind, int dim, std::vector<double> values)
    : kind_(kind), dim_(dim), values_(std::move(values)) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("profile dimension must be 1 or 2");
  const std::size_t expected = kind == ProfileKind::constant ? static_cast<std::size_t>(dim) : 2;
  if (values_.size() != expected) {
    throw std::invalid_argument("profile '" + to_string(kind) + "' expects " + std::to_string(expected) +
                                " values");
  }
  if (kind == ProfileKind::two_phase && dim != 1) throw std::invalid_argument("two_phase profile is 1D");
  if ((kind == ProfileKind::laminate || kind == ProfileKind::checkerboard) && dim != 2) {
    throw std::invalid_argument("profile '" + to_string(kind) + "' is 2D");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("profile values must be positive");
  }
  min_eig_ = *std::min_element(values_.begin(), values_.end());
  max_eig_ = *std::max_element(values_.begin(), values_.end());
}

PeriodicProfile PeriodicProfile::constant(const std::vector<double>& diagonal) {
  return PeriodicProfile(ProfileKind::constant, static_cast<int>(diagonal.size()), diagonal);
}

bool PeriodicProfile::is_constant() const {
  return kind_ == ProfileKind::constant || values_[0] == values_[1];
}

Mat PeriodicProfile::operator()(const Vec& x) const {
  Mat a = Mat::Zero(dim_, dim_);
  if (kind_ == ProfileKind::constant) {
    for (int i = 0; i < dim_; ++i) a(i, i) = values_[i];
    return a;
  }
  // Position inside the unit cell, in [-1/2, 1/2).
  auto local = [](double t) { return t - std::floor(t + 0.5); };
  double value = 0.0;
  switch (kind_) {
    case ProfileKind::two_phase:
    case ProfileKind::laminate:
      value = local(x(0)) < 0.0 ? values_[0] : values_[1];
      break;
    case ProfileKind::checkerboard:
      value = (local(x(0)) < 0.0) == (local(x(1)) < 0.0) ? values_[0] : values_[1];
      break;
    case ProfileKind::constant:
      break;
  }
  a.diagonal().setConstant(value);
  return a;
}

// ---------------------------------------------------------------------------

std::string to_string(RemainderOrder r) { return r == RemainderOrder::none ? "none" : "quadratic"; }

RemainderOrder remainder_from_string(const std::string& name) {
  if (name == "none") return RemainderOrder::none;
  if (name == "quadratic") return RemainderOrder::quadratic;
  throw std::invalid_argument("unknown remainder '" + name + "' (expected none | quadratic)");
}

Model1Coefficients::Model1Coefficients(PeriodicProfile a_per, Model1Params params)
    : a_per_(std::move(a_per)), params_(params) {
  if (!(params_.perturb_amplitude >= 0.0) || !std::isfinite(params_.perturb_amplitude)) {
    throw std::invalid_argument("perturbation amplitude must be finite and >= 0");
  }
  if (!(params_.eta_max > 0.0)) throw std::invalid_argument("eta_max must be > 0");
  const double em = params_.eta_max;
  const double shift = em * a1_bound() +
                       (params_.remainder == RemainderOrder::quadratic ? em * em * remainder_amplitude() : 0.0);
  gamma_ = a_per_.min_eigenvalue() - shift;
  upper_ = a_per_.max_eigenvalue() + shift;
  if (!(gamma_ > 0.0)) {
    std::ostringstream msg;
    msg << "Model 1 family violates uniform coercivity for |eta| <= " << em << " (lower bound " << gamma_ << ")";
    throw std::invalid_argument(msg.str());
  }
}

double Model1Coefficients::remainder_amplitude() const {
  return params_.remainder_amplitude < 0.0 ? params_.perturb_amplitude : params_.remainder_amplitude;
}

Mat Model1Coefficients::a1(const Vec& x, const Realization& r) const {
  const double s = params_.perturb_mean + params_.perturb_amplitude * r.cell_draw(lattice_cell_of(x), 0);
  return s * identity(dim());
}

Mat Model1Coefficients::a2(const Vec& x, const Realization& r) const {
  return remainder_amplitude() * r.cell_draw(lattice_cell_of(x), 1) * identity(dim());
}

Mat Model1Coefficients::remainder(const Vec& x, const Realization& r, double eta) const {
  if (params_.remainder == RemainderOrder::none) return Mat::Zero(dim(), dim());
  return eta * eta * a2(x, r);
}

Mat Model1Coefficients::a_eta(const Vec& x, const Realization& r, double eta) const {
  Mat a = a_per(x);
  if (eta == 0.0) return a;
  a += eta * a1(x, r);
  if (params_.remainder == RemainderOrder::quadratic) a += eta * eta * a2(x, r);
  return a;
}

Mat Model1Coefficients::expected_a1() const { return params_.perturb_mean * identity(dim()); }

void Model1Coefficients::check_eta(double eta) const {
  if (!(std::abs(eta) <= params_.eta_max * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "eta exceeds family validity: |eta| = " << std::abs(eta) << " > eta_max = " << params_.eta_max;
    throw std::invalid_argument(msg.str());
  }
}

Model1Coefficients checkerboard_model1(const PeriodicProfile& a_per, double amplitude, RemainderOrder remainder,
                                       double eta_max, double mean) {
  Model1Params p;
  p.perturb_amplitude = amplitude;
  p.perturb_mean = mean;
  p.remainder = remainder;
  p.eta_max = eta_max;
  return Model1Coefficients(a_per, p);
}

// ---------------------------------------------------------------------------

double bump(double t) {
  if (std::abs(t) >= 0.5) return 0.0;
  const double q = 1.0 - 4.0 * t * t;
  return q * q;
}

double bump_derivative(double t) {
  if (std::abs(t) >= 0.5) return 0.0;
  return -16.0 * t * (1.0 - 4.0 * t * t);
}

double bump_derivative_bound() { return 32.0 / (3.0 * std::sqrt(12.0)); }

namespace {
// Largest perturbation norm for which 1/(1 - eps)^2 <= 3/2 and 1/(1 + eps)^2 >= 1/2.
const double kEigenWindowEps = 1.0 - 1.0 / std::sqrt(1.5);
}  // namespace

Model2Diffeomorphism::Model2Diffeomorphism(int dim, Model2Params params) : dim_(dim), params_(params) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("diffeomorphism dimension must be 1 or 2");
  if (!(params_.amplitude >= 0.0) || !(params_.theta_amplitude >= 0.0)) {
    throw std::invalid_argument("bump amplitudes must be >= 0");
  }
  if (!(params_.eta_max > 0.0)) throw std::invalid_argument("eta_max must be > 0");
  const double eps = perturbation_bound(params_.eta_max);
  if (!(eps < 1.0)) {
    std::ostringstream msg;
    msg << "bump family fails the det(grad Phi) >= nu > 0 check for |eta| <= " << params_.eta_max
        << " (perturbation bound " << eps << ")";
    throw std::invalid_argument(msg.str());
  }
  nu_ = std::pow(1.0 - eps, dim_);
  m_prime_ = 1.0 + eps;
  // Solve t eta^2 + c eta = eps* / (d L) for the positive root.
  const double target = kEigenWindowEps / (dim_ * bump_derivative_bound());
  const double c = params_.amplitude;
  const double t = params_.theta_amplitude;
  if (c == 0.0 && t == 0.0) {
    eta0_ = std::numeric_limits<double>::infinity();
  } else if (t == 0.0) {
    eta0_ = target / c;
  } else {
    eta0_ = (-c + std::sqrt(c * c + 4.0 * t * target)) / (2.0 * t);
  }
}

double Model2Diffeomorphism::perturbation_bound(double eta) const {
  const double e = std::abs(eta);
  return dim_ * bump_derivative_bound() * (e * params_.amplitude + e * e * params_.theta_amplitude);
}

void Model2Diffeomorphism::check_eta(double eta) const {
  if (!(std::abs(eta) <= params_.eta_max * (1.0 + 1e-12))) {
    std::ostringstream msg;
    msg << "eta exceeds family validity: |eta| = " << std::abs(eta) << " > eta_max = " << params_.eta_max;
    throw std::invalid_argument(msg.str());
  }
}

Vec Model2Diffeomorphism::bump_field(const Vec& x, const Realization& r, int first_slot) const {
  const LatticeVector k = lattice_cell_of(x);
  double b = 1.0;
  for (int a = 0; a < dim_; ++a) b *= bump(x(a) - k[a]);
  Vec v(dim_);
  for (int j = 0; j < dim_; ++j) v(j) = r.cell_draw(k, first_slot + j) * b;
  return v;
}

// (grad F)_{ij} = d_i F_j with F_j = X_{k,j} theta(x - k).
Mat Model2Diffeomorphism::bump_field_gradient(const Vec& x, const Realization& r, int first_slot) const {
  const LatticeVector k = lattice_cell_of(x);
  Vec y(dim_);
  for (int a = 0; a < dim_; ++a) y(a) = x(a) - k[a];
  Vec grad_theta(dim_);
  for (int i = 0; i < dim_; ++i) {
    double g = bump_derivative(y(i));
    for (int a = 0; a < dim_; ++a) {
      if (a != i) g *= bump(y(a));
    }
    grad_theta(i) = g;
  }
  Mat out(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    const double xj = r.cell_draw(k, first_slot + j);
    for (int i = 0; i < dim_; ++i) out(i, j) = xj * grad_theta(i);
  }
  return out;
}

Vec Model2Diffeomorphism::psi(const Vec& x, const Realization& r) const {
  return params_.amplitude * bump_field(x, r, 0);
}

Mat Model2Diffeomorphism::grad_psi(const Vec& x, const Realization& r) const {
  if (params_.amplitude == 0.0) return Mat::Zero(dim_, dim_);
  return params_.amplitude * bump_field_gradient(x, r, 0);
}

double Model2Diffeomorphism::div_psi(const Vec& x, const Realization& r) const { return grad_psi(x, r).trace(); }

Vec Model2Diffeomorphism::theta(const Vec& x, const Realization& r, double eta) const {
  return eta * eta * params_.theta_amplitude * bump_field(x, r, dim_);
}

Mat Model2Diffeomorphism::grad_theta(const Vec& x, const Realization& r, double eta) const {
  if (params_.theta_amplitude == 0.0 || eta == 0.0) return Mat::Zero(dim_, dim_);
  return eta * eta * params_.theta_amplitude * bump_field_gradient(x, r, dim_);
}

Vec Model2Diffeomorphism::phi(const Vec& x, const Realization& r, double eta) const {
  return x + eta * psi(x, r) + theta(x, r, eta);
}

Mat Model2Diffeomorphism::grad_phi(const Vec& x, const Realization& r, double eta) const {
  Mat g = identity(dim_);
  if (eta == 0.0 || is_identity()) return g;
  g += eta * grad_psi(x, r);
  g += grad_theta(x, r, eta);
  return g;
}

double Model2Diffeomorphism::det_grad_phi(const Vec& x, const Realization& r, double eta) const {
  return det_small(grad_phi(x, r, eta));
}

Mat Model2Diffeomorphism::inverse_grad_phi(const Vec& x, const Realization& r, double eta) const {
  return inverse_small(grad_phi(x, r, eta));
}

Mat Model2Diffeomorphism::gamma(const Vec& x, const Realization& r, double eta) const {
  return inverse_grad_phi(x, r, eta) - identity(dim_) + eta * grad_psi(x, r);
}

double Model2Diffeomorphism::sigma(const Vec& x, const Realization& r, double eta) const {
  return det_grad_phi(x, r, eta) - 1.0 - eta * div_psi(x, r);
}

Model2Diffeomorphism bump_model2(int dim, double amplitude, double theta_amplitude, double eta_max) {
  return Model2Diffeomorphism(dim, Model2Params{amplitude, theta_amplitude, eta_max});
}

// ---------------------------------------------------------------------------

double stationarity_check(const FieldEvaluator& field, const Realization& r, const LatticeVector& k, int samples,
                          int dim, std::uint64_t sample_seed) {
  std::mt19937_64 gen(sample_seed);
  std::uniform_real_distribution<double> coord(-2.5, 2.5);
  const Realization shifted = r.shift(k);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x(a) = coord(gen);
    Vec xk = x;
    for (int a = 0; a < dim; ++a) xk(a) += k[a];
    worst = std::max(worst, max_norm(field(xk, r) - field(x, shifted)));
  }
  return worst;
}

double ergodic_average(const ScalarEvaluator& field, const Realization& r, int N, const Vec& x) {
  const int dim = static_cast<int>(x.size());
  const int width = 2 * N + 1;
  const int count = dim == 1 ? width : width * width;
  double acc = 0.0;
  for (int idx = 0; idx < count; ++idx) {
    const LatticeVector k = dim == 1 ? LatticeVector{idx - N, 0} : LatticeVector{idx % width - N, idx / width - N};
    acc += field(x, r.shift(k));
  }
  return acc / count;
}

}  // namespace perthom
