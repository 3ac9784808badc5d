#include "gbcalib/gibbs.hpp"

#include <cmath>

namespace gbcalib {

namespace {
constexpr double kTFloor = 1e-12;  // |t| floor in the ω update
}

GibbsSampler::GibbsSampler(const WhitenedDataset& wd, const HuberSpec& h,
                           const RidgeSpec& spec, const SamplerConfig& cfg,
                           long s_n)
    : lambda_factor_{0, SymMatrix(1), SymMatrix(1), 0.0, false},
      eta_(cfg.eta),
      c_(h.c),
      iterations_(cfg.iterations),
      burn_in_(cfg.burn_in),
      seed_(cfg.seed),
      n_(wd.n),
      p_(wd.p) {
  if (!(cfg.eta > 0.0)) throw InvalidConfig("learning rate must be > 0");
  if (!(h.c > 0.0)) throw InvalidConfig("Huber constant must be > 0");
  if (cfg.iterations < 1) throw InvalidConfig("iterations must be >= 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations)
    throw InvalidConfig("need 0 <= burn_in < iterations");
  if (p_ < 1) p_ = static_cast<int>(spec.mu.size());  // prior-only corner
  if (spec.mu.size() != p_)
    throw DimensionMismatch("ridge dimension does not match data");

  x_.resize(n_, p_);
  y_.resize(n_);
  long row = 0;
  for (const WhitenedGroup& g : wd.groups) {
    x_.block(row, 0, g.x.rows(), p_) = g.x;
    y_.segment(row, g.y.size()) = g.y;
    row += g.x.rows();
  }

  const double w = spec.lambda * static_cast<double>(s_n);
  lambda_post_ = eta_ * (x_.transpose() * x_ + w * spec.q.dense());
  lambda_factor_ = sym_sqrt(SymMatrix(lambda_post_));
  prior_shift_ = eta_ * w * (spec.q.dense() * spec.mu);

  init_beta_ = cfg.init_beta ? *cfg.init_beta : Vector::Zero(p_);
  if (init_beta_.size() != p_)
    throw DimensionMismatch("init_beta length does not match dimension");
}

AugmentedState GibbsSampler::initial_state() const {
  return AugmentedState{init_beta_, Vector::Zero(n_), Vector::Ones(n_)};
}

void GibbsSampler::step_omega(AugmentedState& state, Rng& rng) const {
  const double shape = eta_ * eta_ * c_ * c_;
  for (long j = 0; j < n_; ++j) {
    const double at = std::max(std::abs(state.t[j]), kTFloor);
    const double u = rng.inverse_gaussian(eta_ * c_ / at, shape);
    state.omega[j] = 1.0 / u;
  }
}

std::pair<double, double> GibbsSampler::t_conditional(double eta,
                                                      double omega,
                                                      double residual) {
  const double var = 1.0 / (eta + 1.0 / omega);
  return {var * eta * residual, var};
}

void GibbsSampler::step_t(AugmentedState& state, Rng& rng) const {
  const Vector r = y_ - x_ * state.beta;
  for (long j = 0; j < n_; ++j) {
    const auto [mean, var] = t_conditional(eta_, state.omega[j], r[j]);
    state.t[j] = mean + std::sqrt(var) * rng.normal();
  }
}

Vector GibbsSampler::beta_mean(const AugmentedState& state) const {
  const Vector rhs = eta_ * (x_.transpose() * (y_ - state.t)) + prior_shift_;
  return lambda_factor_.solve(rhs);
}

void GibbsSampler::step_beta(AugmentedState& state, Rng& rng) const {
  Vector z(p_);
  for (int j = 0; j < p_; ++j) z[j] = rng.normal();
  state.beta = beta_mean(state) + lambda_factor_.inv_sqrt.dense() * z;
}

DrawMatrix GibbsSampler::run() const {
  Rng rng(seed_);
  AugmentedState state = initial_state();
  const int d_total = iterations_ - burn_in_;
  DrawMatrix out{Matrix(d_total, p_), eta_, seed_};
  for (int it = 0; it < iterations_; ++it) {
    step_omega(state, rng);
    step_t(state, rng);
    step_beta(state, rng);
    if (it >= burn_in_) out.draws.row(it - burn_in_) = state.beta.transpose();
  }
  return out;
}

DrawMatrix run_chain(const WhitenedDataset& wd, const HuberSpec& h,
                     const RidgeSpec& spec, const SamplerConfig& cfg,
                     long s_n) {
  return GibbsSampler(wd, h, spec, cfg, s_n).run();
}

}  // namespace gbcalib
