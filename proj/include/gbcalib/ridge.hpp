#pragma once

#include "gbcalib/linalg.hpp"

namespace gbcalib {

// Quadratic penalty ρ(β) = ½(β−μ)ᵀQ(β−μ), equivalently the negative
// log-density (up to a constant) of a N(μ, {(λ·s_n)Q}⁻¹) prior when
// weighted by λ·s_n. `lambda` is the finite-sample weight λ_n,
// `lambda_limit` its limit λ; the experiment keeps them equal.
struct RidgeSpec {
  Vector mu;
  SymMatrix q;
  double lambda;
  double lambda_limit;
};

RidgeSpec make_ridge(Vector mu, SymMatrix q, double lambda,
                     double lambda_limit);

double rho(const RidgeSpec& spec, const Vector& beta);
Vector rho_grad(const RidgeSpec& spec, const Vector& beta);  // Q(β−μ)
const SymMatrix& rho_hess(const RidgeSpec& spec);            // Q

}  // namespace gbcalib
