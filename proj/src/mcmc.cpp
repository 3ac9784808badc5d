#include "gbcalib/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include "gbcalib/errors.hpp"

namespace gbcalib {

double sample_mean(const std::vector<double>& x) {
  if (x.empty()) throw EmptyDraws("empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

namespace {
// autocovariance at lag k with the N-divisor convention
double autocov(const std::vector<double>& x, double mean, size_t k) {
  double s = 0.0;
  for (size_t i = 0; i + k < x.size(); ++i)
    s += (x[i] - mean) * (x[i + k] - mean);
  return s / static_cast<double>(x.size());
}
}  // namespace

double integrated_autocorr_time(const std::vector<double>& x) {
  const size_t n = x.size();
  if (n < 2) return 1.0;
  const double mean = sample_mean(x);
  const double c0 = autocov(x, mean, 0);
  if (c0 <= 0.0) return 1.0;  // constant series

  // Sum paired autocovariances Γ_m = c_{2m} + c_{2m+1} while positive.
  double sum = 0.0;
  for (size_t m = 1; 2 * m + 1 < n; ++m) {
    const double gamma = autocov(x, mean, 2 * m) + autocov(x, mean, 2 * m + 1);
    if (gamma <= 0.0) break;
    sum += gamma;
  }
  // contribution of lag 1 completes the first pair (c0 pairs with c1)
  const double c1 = n > 1 ? autocov(x, mean, 1) : 0.0;
  double tau = 1.0 + (2.0 * std::max(c1, 0.0) + 2.0 * sum) / c0;
  tau = std::clamp(tau, 1.0, static_cast<double>(n));
  return tau;
}

double effective_sample_size(const std::vector<double>& x) {
  return static_cast<double>(x.size()) / integrated_autocorr_time(x);
}

double autocorr_adjusted_se(const std::vector<double>& x) {
  const double var = sample_variance(x);
  return std::sqrt(var * integrated_autocorr_time(x) /
                   static_cast<double>(x.size()));
}

}  // namespace gbcalib
