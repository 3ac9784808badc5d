#include "gbcalib/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gbcalib {

SymMatrix posterior_cov(const DrawMatrix& draws) {
  const Matrix& d = draws.draws;
  if (d.rows() < 2) throw EmptyDraws("posterior covariance needs >= 2 draws");
  const Eigen::RowVectorXd mean = d.colwise().mean();
  const Matrix centered = d.rowwise() - mean;
  return SymMatrix(Matrix((centered.transpose() * centered) /
                          static_cast<double>(d.rows())));
}

SymMatrix sandwich_v(const SymMatrix& j_lambda, const SymMatrix& k) {
  const SpdFactor jf = sym_sqrt(j_lambda);
  // J⁻¹ K J⁻¹, symmetrized against roundoff
  return SymMatrix(Matrix(jf.solve(Matrix(jf.solve(k.dense()).transpose()))));
}

TargetSandwich target_sandwich(const WhitenedDataset& wd, const HuberSpec& h,
                               const RidgeSpec& spec, const Vector& center) {
  SymMatrix j_lambda(Matrix(hessian(wd, center, h).dense() +
                            spec.lambda * spec.q.dense()));
  SymMatrix k = k_hat(wd, center, h);
  SymMatrix v = sandwich_v(j_lambda, k);
  return TargetSandwich{std::move(j_lambda), std::move(k), std::move(v)};
}

SandwichEstimates sandwich_at(const WhitenedDataset& wd, const HuberSpec& h,
                              const RidgeSpec& spec, const Vector& center,
                              long s_n, const DrawMatrix& draws) {
  if (center.size() != wd.p)
    throw DimensionMismatch("center length does not match dimension");
  TargetSandwich t = target_sandwich(wd, h, spec, center);
  SymMatrix h0_inv(Matrix(static_cast<double>(s_n) *
                          posterior_cov(draws).dense()));
  // diagnostic only: did either factorization need the eigenvalue floor?
  const bool clamped =
      sym_sqrt(t.v_target_hat).clamped || sym_sqrt(h0_inv).clamped;
  return SandwichEstimates{std::move(t.j_lambda_hat), std::move(t.k_hat),
                           std::move(t.v_target_hat), std::move(h0_inv),
                           center, clamped};
}

Matrix build_omega(const SandwichEstimates& est) {
  const SpdFactor v_factor = sym_sqrt(est.v_target_hat);
  const SpdFactor h0_inv_factor = sym_sqrt(est.h0_inv_hat);
  return v_factor.sqrt.dense() * h0_inv_factor.inv_sqrt.dense();
}

CalibratedDraws calibrate_draws(const DrawMatrix& draws,
                                const SandwichEstimates& est) {
  const Matrix& d = draws.draws;
  if (d.rows() < 2) throw EmptyDraws("calibration needs >= 2 draws");
  if (est.center.size() != d.cols())
    throw DimensionMismatch("center length does not match draws");
  const Matrix omega = build_omega(est);
  const Eigen::RowVectorXd mean = d.colwise().mean();
  Matrix out = (d.rowwise() - mean) * omega.transpose();
  out.rowwise() += est.center.transpose();
  return CalibratedDraws{std::move(out), omega, est.center};
}

std::pair<double, double> credible_interval(const Matrix& draws, int coord,
                                            double level) {
  if (!(level > 0.0 && level < 1.0))
    throw BadLevel("credible level must be in (0, 1)");
  if (draws.rows() < 2) throw EmptyDraws("interval needs >= 2 draws");
  if (coord < 0 || coord >= draws.cols())
    throw DimensionMismatch("coordinate out of range");

  std::vector<double> v(draws.rows());
  for (Eigen::Index i = 0; i < draws.rows(); ++i) v[i] = draws(i, coord);
  std::sort(v.begin(), v.end());

  const auto quantile = [&v](double q) {
    const double idx = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(idx));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
  };
  return {quantile(0.5 * (1.0 - level)), quantile(0.5 * (1.0 + level))};
}

}  // namespace gbcalib
