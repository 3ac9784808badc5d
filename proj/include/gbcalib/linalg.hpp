#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gbcalib/errors.hpp"

namespace gbcalib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense symmetric matrix. Construction symmetrizes by averaging, so
// callers can rely on entries(i,j) == entries(j,i) exactly thereafter.
class SymMatrix {
 public:
  explicit SymMatrix(int dim);
  SymMatrix(int dim, const std::vector<double>& row_major);
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double value) {
    m_(i, j) = value;
    m_(j, i) = value;
  }
  const Matrix& dense() const { return m_; }

 private:
  Matrix m_;
};

inline constexpr double kSpdTol = 1e-12;

// Symmetric PSD square-root factorization: sqrt·sqrt reconstructs the
// input and inv_sqrt is the inverse of sqrt. Eigenvalues below
// tol·λ_max are raised to that floor before rooting; `clamped` records
// whether that happened (a sign of numerical rank deficiency, e.g. a
// Monte Carlo covariance with too few draws).
struct SpdFactor {
  int dim = 0;
  SymMatrix sqrt;
  SymMatrix inv_sqrt;
  double log_det = 0.0;
  bool clamped = false;

  // x with m·x = rhs, via two applications of inv_sqrt.
  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
};

// Throws NotPsd if any eigenvalue < -tol·λ_max (λ_max = largest
// eigenvalue magnitude) or if the matrix is exactly zero.
SpdFactor sym_sqrt(const SymMatrix& m, double tol = kSpdTol);

Vector solve_spd(const SymMatrix& m, const Vector& rhs);
SymMatrix spd_inverse(const SymMatrix& m);

}  // namespace gbcalib
