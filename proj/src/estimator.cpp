#include "gbcalib/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gbcalib {

namespace {

double objective(const WhitenedDataset& wd, const HuberSpec& h,
                 const RidgeSpec& spec, double lam_sn, const Vector& beta) {
  return loss(wd, beta, h) + lam_sn * rho(spec, beta);
}

Vector objective_grad(const WhitenedDataset& wd, const HuberSpec& h,
                      const RidgeSpec& spec, double lam_sn,
                      const Vector& beta) {
  return static_cast<double>(wd.n) * score(wd, beta, h) +
         lam_sn * rho_grad(spec, beta);
}

}  // namespace

FitResult fit_penalized(const WhitenedDataset& wd, const HuberSpec& h,
                        const RidgeSpec& spec, long s_n) {
  constexpr int kMaxIter = 200;
  constexpr int kMaxHalvings = 60;
  const double lam_sn = spec.lambda * static_cast<double>(s_n);

  Vector beta = spec.mu;  // penalty gradient vanishes here
  double f = objective(wd, h, spec, lam_sn, beta);

  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const Vector g = objective_grad(wd, h, spec, lam_sn, beta);
    const double g_norm = g.lpNorm<Eigen::Infinity>();
    if (g_norm <= 1e-10 * (1.0 + std::abs(f)))
      return FitResult{beta, iter, g_norm, true};

    const Matrix hess = static_cast<double>(wd.n) * hessian(wd, beta, h).dense() +
                        lam_sn * spec.q.dense();
    const Vector direction = -sym_sqrt(SymMatrix(hess)).solve(g);

    // Line search along the Newton ray. Comparing objective values
    // stalls for large n: near the optimum the true decrease is
    // O(‖g‖²) while the O(n)-term objective carries summation noise
    // that swamps it. The directional derivative has no such
    // cancellation, and the objective is convex piecewise quadratic,
    // so halving on the sign of φ'(t) = g(β + t·d)ᵀd brackets the
    // exact ray minimizer; every accepted point is on the descent
    // side, which keeps the objective non-increasing.
    const auto dir_slope = [&](double t) {
      return objective_grad(wd, h, spec, lam_sn, Vector(beta + t * direction))
          .dot(direction);
    };
    double step = 1.0;
    if (dir_slope(1.0) > 0.0) {  // overshot the ray minimizer
      double lo = 0.0;
      double hi = 1.0;
      for (int k = 0; k < kMaxHalvings; ++k) {
        const double mid = 0.5 * (lo + hi);
        (dir_slope(mid) > 0.0 ? hi : lo) = mid;
      }
      step = lo;
    }
    beta += step * direction;
    f = objective(wd, h, spec, lam_sn, beta);
  }

  const double g_norm =
      objective_grad(wd, h, spec, lam_sn, beta).lpNorm<Eigen::Infinity>();
  return FitResult{beta, iter, g_norm,
                   g_norm <= 1e-10 * (1.0 + std::abs(f))};
}

Vector map_center(const WhitenedDataset& wd, const HuberSpec& h,
                  const RidgeSpec& spec, long s_n, double eta) {
  if (!(eta > 0.0)) throw InvalidConfig("learning rate must be > 0");
  FitResult fit = fit_penalized(wd, h, spec, s_n);
  if (!fit.converged)
    throw NoConvergence("posterior mode search did not converge");
  return fit.beta_hat;
}

Vector posterior_mean_center(const DrawMatrix& draws) {
  if (draws.draws.rows() < 1) throw EmptyDraws("no posterior draws");
  return draws.draws.colwise().mean().transpose();
}

Vector one_step_newton_center(const WhitenedDataset& wd, const HuberSpec& h,
                              const RidgeSpec& spec, long s_n,
                              const Vector& from) {
  (void)s_n;  // the one-step map lives on the per-observation scale
  const Vector f_n = score(wd, from, h) + spec.lambda * rho_grad(spec, from);
  const Matrix a_n =
      hessian(wd, from, h).dense() + spec.lambda * spec.q.dense();
  return from - solve_spd(SymMatrix(a_n), f_n);
}

double normal_quantile(double prob) {
  // Wichura's algorithm: rational approximations on a central and two
  // tail regions of q = p − 1/2 / r = sqrt(-log(tail)).
  if (!(prob > 0.0 && prob < 1.0))
    throw BadLevel("probability must be in (0, 1)");
  const double q = prob - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

WaldInterval wald_interval(const Vector& beta_hat, const SymMatrix& v_target,
                           long n, int coord, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw BadLevel("confidence level must be in (0, 1)");
  if (coord < 0 || coord >= v_target.dim() || beta_hat.size() != v_target.dim())
    throw DimensionMismatch("coordinate out of range");
  if (n < 1) throw InvalidConfig("n must be >= 1");
  const double v = v_target(coord, coord);
  if (v < -1e-12 * std::abs(v_target.dense().trace()))
    throw NotPsd("negative variance entry");
  const double z = normal_quantile(0.5 * (1.0 + level));
  return WaldInterval{beta_hat[coord],
                      z * std::sqrt(std::max(v, 0.0) / static_cast<double>(n)),
                      level};
}

}  // namespace gbcalib
