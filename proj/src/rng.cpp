#include "gbcalib/rng.hpp"

#include <cmath>

namespace gbcalib {

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

double Rng::inverse_gaussian(double mean, double shape) {
  // Michael–Schucany–Haas: transform a chi-square variate, then pick
  // the smaller/larger root with the right probability. Written in
  // the reciprocal form b = 1/(1 + w + sqrt(w(w+2))) with
  // w = mean·y/(2·shape); the textbook 1 + w - sqrt(...) form loses
  // all precision when w is large, which routinely happens here
  // (mean/shape spans ~15 orders of magnitude in the latent-scale
  // update at extreme learning rates).
  const double y = [&] {
    const double n = normal();
    return n * n;
  }();
  const double w = mean * y / (2.0 * shape);
  const double b = 1.0 / (1.0 + w + std::sqrt(w * (w + 2.0)));
  const double u = uniform();
  // smaller root mean·b is accepted with probability 1/(1+b)
  return (u * (1.0 + b) <= 1.0) ? mean * b : mean / b;
}

namespace {
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(stream ^ 0xA5A5A5A5A5A5A5A5ull));
  h = mix64(h ^ mix64(index ^ 0x5A5A5A5A5A5A5A5Aull));
  return h;
}

}  // namespace gbcalib
