#include "gbcalib/linalg.hpp"

#include <cmath>

namespace gbcalib {

SymMatrix::SymMatrix(int dim) {
  if (dim < 1) throw DimensionMismatch("SymMatrix dim must be >= 1");
  m_ = Matrix::Zero(dim, dim);
}

SymMatrix::SymMatrix(int dim, const std::vector<double>& row_major) {
  if (dim < 1) throw DimensionMismatch("SymMatrix dim must be >= 1");
  if (static_cast<int>(row_major.size()) != dim * dim)
    throw DimensionMismatch("SymMatrix entries must have length dim^2");
  m_.resize(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m_(i, j) = row_major[i * dim + j];
  m_ = ((m_ + m_.transpose()) / 2.0).eval();
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw DimensionMismatch("SymMatrix requires a square matrix");
  m_ = (m + m.transpose()) / 2.0;
}

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

Vector SpdFactor::solve(const Vector& rhs) const {
  if (rhs.size() != dim)
    throw DimensionMismatch("solve: rhs length does not match dim");
  return inv_sqrt.dense() * (inv_sqrt.dense() * rhs);
}

Matrix SpdFactor::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim)
    throw DimensionMismatch("solve: rhs rows do not match dim");
  return inv_sqrt.dense() * (inv_sqrt.dense() * rhs);
}

SpdFactor sym_sqrt(const SymMatrix& m, double tol) {
  const int d = m.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.dense());
  if (es.info() != Eigen::Success)
    throw NotPsd("eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  const Matrix& v = es.eigenvectors();

  const double lam_max = ev.cwiseAbs().maxCoeff();
  if (lam_max == 0.0)
    throw NotPsd("cannot factor the zero matrix");
  const double floor = tol * lam_max;
  if (ev.minCoeff() < -floor)
    throw NotPsd("matrix has an eigenvalue below -tol*lambda_max");

  Vector root(d), inv_root(d);
  double log_det = 0.0;
  bool clamped = false;
  for (int i = 0; i < d; ++i) {
    double lam = ev[i];
    if (lam < floor) {
      lam = floor;
      clamped = true;
    }
    root[i] = std::sqrt(lam);
    inv_root[i] = 1.0 / root[i];
    log_det += std::log(lam);
  }

  SpdFactor f{d, SymMatrix(Matrix(v * root.asDiagonal() * v.transpose())),
              SymMatrix(Matrix(v * inv_root.asDiagonal() * v.transpose())),
              log_det, clamped};
  return f;
}

Vector solve_spd(const SymMatrix& m, const Vector& rhs) {
  return sym_sqrt(m).solve(rhs);
}

SymMatrix spd_inverse(const SymMatrix& m) {
  SpdFactor f = sym_sqrt(m);
  return SymMatrix(Matrix(f.inv_sqrt.dense() * f.inv_sqrt.dense()));
}

}  // namespace gbcalib
