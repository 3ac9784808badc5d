#pragma once

#include <vector>

#include "gbcalib/linalg.hpp"

namespace gbcalib {

// One cluster of the random-intercept design: n_i rows of covariates
// and responses sharing a common intercept shift.
struct Group {
  Matrix x;  // n_i × p
  Vector y;  // n_i
};

struct GroupedDataset {
  std::vector<Group> groups;
  long n = 0;  // total observations
  int p = 0;   // covariate dimension
};

// Validates group shapes and fills in n and p.
GroupedDataset make_dataset(std::vector<Group> groups);

// Known variance components of the working model: within-group
// covariance Σ_i = tau2·11ᵀ + sigma2·I (compound symmetry).
struct WorkingCov {
  double tau2;
  double sigma2;
};

struct WhitenedGroup {
  Matrix x;
  Vector y;
};

// Groups premultiplied by Σ_i^{-1/2}; within-group errors of the
// working model are decorrelated with unit variance.
struct WhitenedDataset {
  std::vector<WhitenedGroup> groups;
  long n = 0;
  int p = 0;
};

struct HuberSpec {
  double c;  // quadratic-to-linear crossover, > 0
};

// ρ_c and its clipped-identity derivative ψ_c.
inline double huber_rho(double u, double c) {
  const double a = u < 0 ? -u : u;
  return a <= c ? 0.5 * u * u : c * a - 0.5 * c * c;
}
inline double huber_psi(double u, double c) {
  return u < -c ? -c : (u > c ? c : u);
}

// Σ_i has the closed-form symmetric root L_i = a·I + b·11ᵀ with
// a = √σ², b = (√(σ²+n_i τ²) − √σ²)/n_i; whitening applies
// L_i⁻¹ = (1/a)·I + ((1/s − 1/a)/n_i)·11ᵀ, s = √(σ²+n_i τ²).
WhitenedDataset whiten(const GroupedDataset& data, const WorkingCov& cov);

// M_n(β) = Σ_{ij} ρ_c(r̃_ij), r̃ = ỹ − x̃β.
double loss(const WhitenedDataset& wd, const Vector& beta,
            const HuberSpec& h);

// U_n(β) = −n⁻¹ Σ_i x̃_iᵀ ψ_c(r̃_i); the gradient of n⁻¹·loss.
Vector score(const WhitenedDataset& wd, const Vector& beta,
             const HuberSpec& h);

// J_n(β) = n⁻¹ Σ_i x̃_iᵀ W_i x̃_i with W_i = diag(1{|r̃| ≤ c}). PSD.
SymMatrix hessian(const WhitenedDataset& wd, const Vector& beta,
                  const HuberSpec& h);

// Score-variance estimator over groups (the independent units):
// K̂ = n⁻¹ Σ_i Û_i Û_iᵀ, Û_i = −x̃_iᵀ ψ_c(r̃_i). Needs ≥ 2 groups.
SymMatrix k_hat(const WhitenedDataset& wd, const Vector& beta,
                const HuberSpec& h);

}  // namespace gbcalib
