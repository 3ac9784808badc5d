#pragma once

#include <vector>

namespace gbcalib {

// Chain diagnostics used by the sampler test oracles: integrated
// autocorrelation time via Geyer's initial-positive-sequence
// truncation, and the resulting effective sample size / adjusted
// standard error of the chain mean.

double sample_mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // divisor N

// τ_int = 1 + 2 Σ ρ_k, summed over the initial positive sequence of
// paired autocovariances. At least 1; at most N.
double integrated_autocorr_time(const std::vector<double>& x);

double effective_sample_size(const std::vector<double>& x);

// sd(x) · sqrt(τ_int / N): standard error of mean(x) honoring the
// chain's autocorrelation.
double autocorr_adjusted_se(const std::vector<double>& x);

}  // namespace gbcalib
