#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace perthom {

inline constexpr int kMaxDim = 2;

// d x d matrices and d-vectors with d <= 2, stack allocated.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

// Integer lattice vector; components beyond the dimension are zero.
using LatticeVector = std::array<int, kMaxDim>;

/// Linear solver did not reach the requested tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coefficient lost uniform coercivity (eigenvalue <= 0 on some element).
class CoercivityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline Mat identity(int dim) { return Mat::Identity(dim, dim); }

inline Vec unit_vector(int dim, int axis) {
  Vec e = Vec::Zero(dim);
  e(axis) = 1.0;
  return e;
}

/// Largest absolute entry.
inline double max_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// GCC 11 cannot see that a bounded-size Eigen matrix is filled before the
// coefficient reads below and warns spuriously.
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
#endif
/// Eigenvalues (ascending) of the symmetric part of a 1x1 or 2x2 matrix.
inline std::array<double, 2> symmetric_eigenvalues(const Mat& m) {
  if (m.rows() == 1) return {m(0, 0), m(0, 0)};
  const double a = m(0, 0);
  const double d = m(1, 1);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double mid = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mid - rad, mid + rad};
}
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic pop
#endif

}  // namespace perthom
