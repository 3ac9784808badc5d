#include "gbcalib/ridge.hpp"

namespace gbcalib {

RidgeSpec make_ridge(Vector mu, SymMatrix q, double lambda,
                     double lambda_limit) {
  if (mu.size() != q.dim())
    throw DimensionMismatch("ridge center and penalty matrix disagree");
  if (lambda < 0.0 || lambda_limit < 0.0)
    throw InvalidConfig("penalty weights must be >= 0");
  // SPD check up front so later factorizations cannot surprise
  sym_sqrt(q);
  return RidgeSpec{std::move(mu), std::move(q), lambda, lambda_limit};
}

namespace {
void check_beta(const RidgeSpec& spec, const Vector& beta) {
  if (beta.size() != spec.mu.size())
    throw DimensionMismatch("beta length does not match ridge center");
}
}  // namespace

double rho(const RidgeSpec& spec, const Vector& beta) {
  check_beta(spec, beta);
  const Vector d = beta - spec.mu;
  return 0.5 * d.dot(spec.q.dense() * d);
}

Vector rho_grad(const RidgeSpec& spec, const Vector& beta) {
  check_beta(spec, beta);
  return spec.q.dense() * (beta - spec.mu);
}

const SymMatrix& rho_hess(const RidgeSpec& spec) { return spec.q; }

}  // namespace gbcalib
