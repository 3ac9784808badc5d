#pragma once

#include <cstdint>
#include <random>

namespace gbcalib {

// Deterministic random stream. The engine is mt19937_64 but every
// variate is derived from raw 64-bit words by hand (uniform, polar
// normal, inverse Gaussian), because the standard library's
// distribution objects are not bit-reproducible across
// implementations and the whole simulation contract is
// seed-determinism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Marsaglia's polar method (second variate cached).
  double normal();

  // Inverse Gaussian with the (mean, shape) parameterization,
  // density ∝ x^{-3/2} exp{-shape·(x-mean)²/(2·mean²·x)}.
  double inverse_gaussian(double mean, double shape);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Collision-resistant seed derivation for independent substreams,
// splitmix64-style avalanche over (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index);

}  // namespace gbcalib
