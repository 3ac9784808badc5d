#pragma once

#include <utility>

#include "gbcalib/estimator.hpp"
#include "gbcalib/gibbs.hpp"

namespace gbcalib {

// Plug-in pieces of the affine calibration map, evaluated at a chosen
// admissible center:
//   Ĵ_λ = J_n(center) + λ_n·Q          (penalized curvature)
//   K̂   = per-group score variance
//   V̂   = Ĵ_λ⁻¹ K̂ Ĵ_λ⁻¹               (target sandwich)
//   Ĥ₀⁻¹ = s_n·Σ̂_post                  (working covariance from draws)
struct SandwichEstimates {
  SymMatrix j_lambda_hat;
  SymMatrix k_hat;
  SymMatrix v_target_hat;
  SymMatrix h0_inv_hat;
  Vector center;
  bool clamped = false;  // some eigenvalue hit the factorization floor
};

struct CalibratedDraws {
  Matrix draws;      // D × p
  Matrix omega_hat;  // p × p, generally not symmetric
  Vector center;
};

// Σ̂_post with divisor D (not D−1); needs D ≥ 2.
SymMatrix posterior_cov(const DrawMatrix& draws);

// V̂ = j⁻¹·k·j⁻¹ via two SPD solves through the symmetric factor.
SymMatrix sandwich_v(const SymMatrix& j_lambda, const SymMatrix& k);

// Draw-free part of the plug-in (what a pure frequentist fit needs).
struct TargetSandwich {
  SymMatrix j_lambda_hat;
  SymMatrix k_hat;
  SymMatrix v_target_hat;
};
TargetSandwich target_sandwich(const WhitenedDataset& wd, const HuberSpec& h,
                               const RidgeSpec& spec, const Vector& center);

SandwichEstimates sandwich_at(const WhitenedDataset& wd, const HuberSpec& h,
                              const RidgeSpec& spec, const Vector& center,
                              long s_n, const DrawMatrix& draws);

// Ω̂ = V̂^{1/2}·Ĥ₀^{1/2} = sym_sqrt(V̂).sqrt · sym_sqrt(Ĥ₀⁻¹).inv_sqrt.
// Satisfies Ω̂ Ĥ₀⁻¹ Ω̂ᵀ = V̂ exactly (up to factorization error), which
// is what makes the calibrated draws' spread invariant to the
// learning rate.
Matrix build_omega(const SandwichEstimates& est);

// draw ↦ center + Ω̂ (draw − draw_mean); the calibrated sample mean is
// the center and the calibrated covariance is Ω̂ Σ̂_post Ω̂ᵀ.
CalibratedDraws calibrate_draws(const DrawMatrix& draws,
                                const SandwichEstimates& est);

// Equal-tailed interval from the empirical quantiles at (1∓level)/2,
// linear interpolation on order statistics (index q·(D−1), 0-based).
std::pair<double, double> credible_interval(const Matrix& draws, int coord,
                                            double level);

}  // namespace gbcalib
