#pragma once

#include "gbcalib/gibbs.hpp"
#include "gbcalib/huber_lmm.hpp"
#include "gbcalib/ridge.hpp"

namespace gbcalib {

struct FitResult {
  Vector beta_hat;
  int iterations_used = 0;
  double grad_norm = 0.0;  // ∞-norm of the penalized gradient at exit
  bool converged = false;
};

struct WaldInterval {
  double center;
  double half_width;  // >= 0
  double level;       // in (0, 1)

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

// Minimizes the strictly convex objective M_n(β) + λ_n·s_n·ρ(β) by
// damped Newton (bisection line search along the ray). Converged when the
// gradient ∞-norm drops below 1e-10·(1 + |objective|); capped at 200
// iterations, returning the best iterate with converged = false.
FitResult fit_penalized(const WhitenedDataset& wd, const HuberSpec& h,
                        const RidgeSpec& spec, long s_n);

// The posterior mode. The tempered objective is η·(M_n + λ_n s_n ρ),
// so its maximizer does not depend on η; this delegates to
// fit_penalized (eta is accepted to document the contract).
Vector map_center(const WhitenedDataset& wd, const HuberSpec& h,
                  const RidgeSpec& spec, long s_n, double eta);

Vector posterior_mean_center(const DrawMatrix& draws);

// One damped-free Newton step from `from`:
//   result = from − A_n⁻¹ F_n,  F_n = U_n + λ_n∇ρ,  A_n = J_n + λ_n Q.
Vector one_step_newton_center(const WhitenedDataset& wd, const HuberSpec& h,
                              const RidgeSpec& spec, long s_n,
                              const Vector& from);

// Inverse standard normal CDF (Wichura's rational approximation),
// |error| < 1e-9 over (0, 1). Throws BadLevel outside (0, 1).
double normal_quantile(double prob);

// half_width = z_{(1+level)/2} · sqrt(v[coord,coord] / n).
WaldInterval wald_interval(const Vector& beta_hat, const SymMatrix& v_target,
                           long n, int coord, double level);

}  // namespace gbcalib
