#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "gbcalib/huber_lmm.hpp"
#include "gbcalib/ridge.hpp"
#include "gbcalib/rng.hpp"

namespace gbcalib {

struct SamplerConfig {
  double eta;              // learning rate, > 0
  int iterations;          // total sweeps
  int burn_in;             // discarded sweeps, < iterations
  std::uint64_t seed;
  std::optional<Vector> init_beta;  // default: zero vector
};

// Latent state of the augmented chain: per-observation shifts t and
// scales ω from the inf-convolution representation of the Huber
// kernel, plus the current β.
struct AugmentedState {
  Vector beta;
  Vector t;      // length n, stacked in group order
  Vector omega;  // length n, strictly positive
};

struct DrawMatrix {
  Matrix draws;  // D × p, post-burn-in β draws in sweep order
  double eta = 0.0;
  std::uint64_t seed = 0;
};

// Data-augmented Gibbs sampler for the tempered posterior
//   π(β | data) ∝ exp{−η (M_n(β) + λ_n s_n ρ(β))}.
// Augmentation: exp{−η ρ_c(r)} is a scale mixture over (t, ω) with a
// Gaussian kernel in r − t, so every full conditional is exact:
//   1/ω | t   ~ InverseGaussian(mean ηc/|t|, shape η²c²)
//   t | β, ω  ~ N(σ²_t·η·r̃, σ²_t),  σ²_t = (η + ω⁻¹)⁻¹
//   β | t     ~ N(m_post, Λ_post⁻¹)
// with Λ_post = η(Σ x̃ᵀx̃ + λ_n s_n Q) and
// m_post = Λ_post⁻¹·η{Σ x̃ᵀ(ỹ − t) + λ_n s_n Q μ}. Both the data term
// and the penalty term carry the learning rate: the penalty sits
// inside the tempered objective, so the posterior precision scales
// linearly in η overall and the maximizer is η-invariant.
class GibbsSampler {
 public:
  GibbsSampler(const WhitenedDataset& wd, const HuberSpec& h,
               const RidgeSpec& spec, const SamplerConfig& cfg, long s_n);

  AugmentedState initial_state() const;

  void step_omega(AugmentedState& state, Rng& rng) const;
  void step_t(AugmentedState& state, Rng& rng) const;
  void step_beta(AugmentedState& state, Rng& rng) const;

  // One ω → t → β sweep per iteration; records β after each
  // post-burn-in sweep.
  DrawMatrix run() const;

  // Conditional parameters, exposed for distributional test oracles.
  const Matrix& beta_precision() const { return lambda_post_; }
  Vector beta_mean(const AugmentedState& state) const;
  static std::pair<double, double> t_conditional(double eta, double omega,
                                                 double residual);

  long n() const { return n_; }
  int p() const { return p_; }

 private:
  Matrix x_;               // n × p, stacked whitened covariates
  Vector y_;               // n, stacked whitened responses
  Matrix lambda_post_;     // η(ΣX̃ᵀX̃ + λ_n s_n Q)
  SpdFactor lambda_factor_;
  Vector prior_shift_;     // η·λ_n·s_n·Qμ
  double eta_;
  double c_;
  int iterations_;
  int burn_in_;
  std::uint64_t seed_;
  Vector init_beta_;
  long n_ = 0;
  int p_ = 0;
};

DrawMatrix run_chain(const WhitenedDataset& wd, const HuberSpec& h,
                     const RidgeSpec& spec, const SamplerConfig& cfg,
                     long s_n);

}  // namespace gbcalib
